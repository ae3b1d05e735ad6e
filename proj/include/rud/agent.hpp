#ifndef RUD_AGENT_HPP
#define RUD_AGENT_HPP

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rud/env.hpp"
#include "rud/mlp.hpp"
#include "rud/replay.hpp"

namespace rud {

enum class ExplorationType { gaussian, ornstein_uhlenbeck };

struct AgentConfig {
    double gamma = 0.99;
    double tau = 0.005;
    int batch_size = 256;
    double actor_lr = 3e-4;
    double critic_lr = 3e-4;
    double exploration_noise_sigma = 0.1;
    double target_policy_noise_sigma = 0.2;
    double target_noise_clip = 0.5;
    int policy_delay = 2;
    bool use_clipped_double_q = true;       // two critics, min in the target
    bool use_target_policy_smoothing = true;
    ExplorationType exploration_type = ExplorationType::gaussian;
    std::vector<int> hidden_sizes = {64, 64};
    double ou_theta = 0.15;
    double ou_sigma = 0.2;
    double ou_dt = 1.0;

    void validate() const {
        if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("AgentConfig: gamma must be in (0,1]");
        if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("AgentConfig: tau must be in (0,1)");
        if (batch_size < 1) throw std::invalid_argument("AgentConfig: batch_size must be >= 1");
        if (!(target_noise_clip > 0.0)) throw std::invalid_argument("AgentConfig: target_noise_clip must be > 0");
        if (policy_delay < 1) throw std::invalid_argument("AgentConfig: policy_delay must be >= 1");
    }

    static AgentConfig ddpg_defaults() {
        AgentConfig c;
        c.batch_size = 128;
        c.policy_delay = 1;
        c.use_clipped_double_q = false;
        c.use_target_policy_smoothing = false;
        c.exploration_type = ExplorationType::ornstein_uhlenbeck;
        return c;
    }
};

struct Schedule {
    long total_steps = 30000;
    long block_size = 1;  // F; 1 reproduces the streaming schedule
    long warmup_steps = 1000;
    long eval_interval = 1000;

    void validate(int batch_size) const {
        if (block_size < 1 || block_size > total_steps)
            throw std::invalid_argument("Schedule: block_size must be in [1, total_steps]");
        if (warmup_steps < batch_size)
            throw std::invalid_argument("Schedule: warmup_steps must be >= batch_size");
        if (eval_interval < 1) throw std::invalid_argument("Schedule: eval_interval must be >= 1");
    }
};

// Ornstein-Uhlenbeck exploration noise, mean-reverting to zero.
struct OuNoise {
    std::vector<double> current;
    double theta;
    double sigma;
    double dt;

    OuNoise(int dim, double theta_, double sigma_, double dt_)
        : current(dim, 0.0), theta(theta_), sigma(sigma_), dt(dt_) {}

    void reset() { std::fill(current.begin(), current.end(), 0.0); }

    const std::vector<double>& sample(std::mt19937_64& rng) {
        std::normal_distribution<double> n(0.0, 1.0);
        const double diffusion = sigma * std::sqrt(dt);
        for (double& x : current) x += theta * (0.0 - x) * dt + diffusion * n(rng);
        return current;
    }
};

// Mini-batch of transitions laid out as matrices.
struct Batch {
    Matrix states;
    Matrix actions;
    Matrix next_states;
    std::vector<double> rewards;
    std::vector<double> done;  // 1.0 for terminal, 0.0 otherwise (truncation bootstraps)

    Batch(const ReplayBuffer& buf, const std::vector<size_t>& idx, int state_dim, int action_dim)
        : states(static_cast<int>(idx.size()), state_dim),
          actions(static_cast<int>(idx.size()), action_dim),
          next_states(static_cast<int>(idx.size()), state_dim),
          rewards(idx.size()),
          done(idx.size()) {
        for (size_t b = 0; b < idx.size(); ++b) {
            const Transition& t = buf.at(idx[b]);
            for (int i = 0; i < state_dim; ++i) {
                states(static_cast<int>(b), i) = t.state[i];
                next_states(static_cast<int>(b), i) = t.next_state[i];
            }
            for (int i = 0; i < action_dim; ++i) actions(static_cast<int>(b), i) = t.action[i];
            rewards[b] = t.reward;
            done[b] = t.done ? 1.0 : 0.0;
        }
    }
    Batch(Matrix s, Matrix a, Matrix ns, std::vector<double> r, std::vector<double> d)
        : states(std::move(s)),
          actions(std::move(a)),
          next_states(std::move(ns)),
          rewards(std::move(r)),
          done(std::move(d)) {}

    int size() const { return states.rows; }
};

// Actor-critic learner covering DDPG (single critic) and TD3 (twin
// critics, clipped double-Q target, target policy smoothing, delayed
// policy updates), depending on the config flags.
class Learner {
  public:
    Learner(const EnvSpec& spec, const AgentConfig& cfg, std::mt19937_64& init_rng)
        : spec_(spec), cfg_(cfg) {
        cfg_.validate();
        std::vector<int> actor_sizes{spec.state_dim};
        actor_sizes.insert(actor_sizes.end(), cfg_.hidden_sizes.begin(), cfg_.hidden_sizes.end());
        actor_sizes.push_back(spec.action_dim);
        std::vector<int> critic_sizes{spec.state_dim + spec.action_dim};
        critic_sizes.insert(critic_sizes.end(), cfg_.hidden_sizes.begin(), cfg_.hidden_sizes.end());
        critic_sizes.push_back(1);

        actor_ = Mlp(actor_sizes, OutputActivation::tanh_squash);
        actor_.init_weights(init_rng);
        actor_target_ = actor_;

        const int num_critics = cfg_.use_clipped_double_q ? 2 : 1;
        for (int i = 0; i < num_critics; ++i) {
            Mlp q(critic_sizes, OutputActivation::identity);
            q.init_weights(init_rng);
            critic_targets_.push_back(q);
            critics_.push_back(std::move(q));
            critic_opts_.emplace_back(critics_.back().num_params(), cfg_.critic_lr);
        }
        actor_opt_ = AdamState(actor_.num_params(), cfg_.actor_lr);

        center_.resize(spec.action_dim);
        halfrange_.resize(spec.action_dim);
        for (int i = 0; i < spec.action_dim; ++i) {
            center_[i] = 0.5 * (spec.action_high[i] + spec.action_low[i]);
            halfrange_[i] = 0.5 * (spec.action_high[i] - spec.action_low[i]);
        }
    }

    const EnvSpec& spec() const { return spec_; }
    const AgentConfig& config() const { return cfg_; }
    Mlp& actor() { return actor_; }
    const Mlp& actor() const { return actor_; }
    Mlp& critic(int i) { return critics_.at(i); }
    const Mlp& critic(int i) const { return critics_.at(i); }
    Mlp& critic_target(int i) { return critic_targets_.at(i); }
    int num_critics() const { return static_cast<int>(critics_.size()); }
    long critic_update_count() const { return critic_updates_; }
    long actor_update_count() const { return actor_updates_; }

    std::vector<double> scale_action(const std::vector<double>& normalized) const {
        std::vector<double> a(spec_.action_dim);
        for (int i = 0; i < spec_.action_dim; ++i) a[i] = center_[i] + halfrange_[i] * normalized[i];
        return a;
    }

    std::vector<double> deterministic_action(const std::vector<double>& state) const {
        return scale_action(actor_.forward(state));
    }

    std::vector<double> act_gaussian(const std::vector<double>& state, double sigma, std::mt19937_64& rng) const {
        std::vector<double> a = deterministic_action(state);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int i = 0; i < spec_.action_dim; ++i) {
            a[i] += sigma * halfrange_[i] * n(rng);
            a[i] = std::clamp(a[i], spec_.action_low[i], spec_.action_high[i]);
        }
        return a;
    }

    std::vector<double> act_ou(const std::vector<double>& state, OuNoise& noise, std::mt19937_64& rng) const {
        std::vector<double> a = deterministic_action(state);
        const std::vector<double>& eps = noise.sample(rng);
        for (int i = 0; i < spec_.action_dim; ++i) {
            a[i] += halfrange_[i] * eps[i];
            a[i] = std::clamp(a[i], spec_.action_low[i], spec_.action_high[i]);
        }
        return a;
    }

    std::vector<double> random_action(std::mt19937_64& rng) const {
        std::vector<double> a(spec_.action_dim);
        for (int i = 0; i < spec_.action_dim; ++i) {
            std::uniform_real_distribution<double> dist(spec_.action_low[i], spec_.action_high[i]);
            a[i] = dist(rng);
        }
        return a;
    }

    // Bootstrap targets y = r + gamma (1 - done) Q'(s', a') where a' comes
    // from the target actor, optionally perturbed by clipped Gaussian
    // smoothing noise (applied in normalized action units, so the drawn
    // noise itself lies in [-c, c]); with two target critics the minimum
    // is used.
    std::vector<double> compute_targets(const Batch& batch, std::mt19937_64& smoothing_rng) const {
        const int B = batch.size();
        Matrix a_norm = actor_target_.forward_batch(batch.next_states);
        if (cfg_.use_target_policy_smoothing) {
            std::normal_distribution<double> n(0.0, 1.0);
            const double c = cfg_.target_noise_clip;
            for (double& v : a_norm.data) {
                const double eps = std::clamp(cfg_.target_policy_noise_sigma * n(smoothing_rng), -c, c);
                v = std::clamp(v + eps, -1.0, 1.0);
            }
        }
        Matrix qin(B, spec_.state_dim + spec_.action_dim);
        for (int b = 0; b < B; ++b) {
            for (int i = 0; i < spec_.state_dim; ++i) qin(b, i) = batch.next_states(b, i);
            for (int i = 0; i < spec_.action_dim; ++i)
                qin(b, spec_.state_dim + i) = center_[i] + halfrange_[i] * a_norm(b, i);
        }
        std::vector<double> q_min;
        for (size_t k = 0; k < critic_targets_.size(); ++k) {
            Matrix q = critic_targets_[k].forward_batch(qin);
            if (k == 0) {
                q_min.assign(q.data.begin(), q.data.end());
            } else {
                for (int b = 0; b < B; ++b) q_min[b] = std::min(q_min[b], q(b, 0));
            }
        }
        std::vector<double> y(B);
        for (int b = 0; b < B; ++b)
            y[b] = batch.rewards[b] + cfg_.gamma * (1.0 - batch.done[b]) * q_min[b];
        return y;
    }

    // Mean squared error of critic k against y and its gradient with
    // respect to the critic parameters.
    double critic_loss_and_gradient(int k, const Batch& batch, const std::vector<double>& y,
                                    ParameterVector& grad) const {
        const int B = batch.size();
        Matrix qin(B, spec_.state_dim + spec_.action_dim);
        for (int b = 0; b < B; ++b) {
            for (int i = 0; i < spec_.state_dim; ++i) qin(b, i) = batch.states(b, i);
            for (int i = 0; i < spec_.action_dim; ++i) qin(b, spec_.state_dim + i) = batch.actions(b, i);
        }
        Matrix q = critics_[static_cast<size_t>(k)].forward_batch(qin, &ws_);
        Matrix gout(B, 1);
        double loss = 0.0;
        for (int b = 0; b < B; ++b) {
            const double resid = q(b, 0) - y[b];
            loss += resid * resid;
            gout(b, 0) = 2.0 * resid / B;
        }
        loss /= B;
        if (!std::isfinite(loss)) throw std::runtime_error("update_critics: non-finite loss");
        grad.assign(critics_[static_cast<size_t>(k)].num_params(), 0.0);
        critics_[static_cast<size_t>(k)].backward_batch(ws_, gout, grad);
        return loss;
    }

    // One Adam step per critic on the mean squared error against y.
    // Returns the pre-step loss averaged over critics.
    double update_critics(const Batch& batch, const std::vector<double>& y) {
        double loss_sum = 0.0;
        for (size_t k = 0; k < critics_.size(); ++k) {
            loss_sum += critic_loss_and_gradient(static_cast<int>(k), batch, y, grad_);
            adam_step(critic_opts_[k], critics_[k].params(), grad_);
        }
        ++critic_updates_;
        return loss_sum / static_cast<double>(critics_.size());
    }

    // Policy objective J = mean_s Q1(s, mu(s)) and the gradient of -J with
    // respect to the actor parameters (critic frozen): the action gradient
    // of Q1 is pushed through the action scaling into the actor.
    double actor_objective_and_gradient(const Batch& batch, ParameterVector& grad) const {
        const int B = batch.size();
        Matrix a_norm = actor_.forward_batch(batch.states, &actor_ws_);
        Matrix qin(B, spec_.state_dim + spec_.action_dim);
        for (int b = 0; b < B; ++b) {
            for (int i = 0; i < spec_.state_dim; ++i) qin(b, i) = batch.states(b, i);
            for (int i = 0; i < spec_.action_dim; ++i)
                qin(b, spec_.state_dim + i) = center_[i] + halfrange_[i] * a_norm(b, i);
        }
        Matrix q = critics_[0].forward_batch(qin, &ws_);
        double objective = 0.0;
        for (int b = 0; b < B; ++b) objective += q(b, 0);
        objective /= B;

        Matrix gout(B, 1, -1.0 / B);
        Matrix qin_grad;
        critics_[0].backward_batch(ws_, gout, scratch_, &qin_grad, /*want_param_grad=*/false);
        Matrix a_grad(B, spec_.action_dim);
        for (int b = 0; b < B; ++b)
            for (int i = 0; i < spec_.action_dim; ++i)
                a_grad(b, i) = qin_grad(b, spec_.state_dim + i) * halfrange_[i];
        grad.assign(actor_.num_params(), 0.0);
        actor_.backward_batch(actor_ws_, a_grad, grad);
        return objective;
    }

    // Ascent step on the policy objective. Returns the pre-step estimate.
    double update_actor(const Batch& batch) {
        const double objective = actor_objective_and_gradient(batch, grad_);
        adam_step(actor_opt_, actor_.params(), grad_);
        ++actor_updates_;
        return objective;
    }

    void soft_update(double tau) {
        if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must be in (0,1]");
        blend(actor_target_.params(), actor_.params(), tau);
        for (size_t k = 0; k < critics_.size(); ++k)
            blend(critic_targets_[k].params(), critics_[k].params(), tau);
    }

    const Mlp& actor_target() const { return actor_target_; }

  private:
    static void blend(ParameterVector& target, const ParameterVector& online, double tau) {
        for (size_t i = 0; i < target.size(); ++i) target[i] = (1.0 - tau) * target[i] + tau * online[i];
    }

    EnvSpec spec_;
    AgentConfig cfg_;
    Mlp actor_, actor_target_;
    std::vector<Mlp> critics_, critic_targets_;
    AdamState actor_opt_;
    std::vector<AdamState> critic_opts_;
    std::vector<double> center_, halfrange_;
    long critic_updates_ = 0;
    long actor_updates_ = 0;
    mutable MlpWorkspace ws_, actor_ws_;
    ParameterVector grad_;
    mutable ParameterVector scratch_;
};

}  // namespace rud

#endif
