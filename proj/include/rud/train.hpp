#ifndef RUD_TRAIN_HPP
#define RUD_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rud/agent.hpp"
#include "rud/analysis.hpp"
#include "rud/csv.hpp"
#include "rud/env.hpp"
#include "rud/replay.hpp"
#include "rud/rng.hpp"

namespace rud {

struct RunLogRow {
    long step = 0;
    double eval_return_mean = 0;
    double eval_return_std = 0;
    double critic_loss = 0;
    double q_std_diagnostic = 0;
    double q_change_diagnostic = 0;
};

struct RunLog {
    std::vector<RunLogRow> rows;
    long env_steps = 0;
    long critic_updates = 0;
    long actor_updates = 0;

    void write_csv(const std::string& path) const {
        CsvWriter w(path, {"step", "eval_return_mean", "eval_return_std", "critic_loss", "q_std_diagnostic",
                           "q_change_diagnostic"});
        for (const RunLogRow& r : rows)
            w.row(static_cast<double>(r.step), r.eval_return_mean, r.eval_return_std, r.critic_loss,
                  r.q_std_diagnostic, r.q_change_diagnostic);
    }
};

using EvalHook = std::function<void(const RunLogRow&)>;

namespace detail {

// Shared per-run machinery for both schedulers. Holds the episode state,
// the RNG streams, and the evaluation/diagnostic plumbing so the two
// training loops differ only in how they interleave steps and updates.
class TrainDriver {
  public:
    TrainDriver(Learner& learner, Environment& env, Environment& eval_env, ReplayBuffer& buffer,
                const Schedule& schedule, RngStreams& streams, RunLog& log, EvalHook hook, int eval_episodes)
        : learner_(learner),
          env_(env),
          eval_env_(eval_env),
          buffer_(buffer),
          schedule_(schedule),
          streams_(streams),
          log_(log),
          hook_(std::move(hook)),
          eval_episodes_(eval_episodes),
          ou_(learner.spec().action_dim, learner.config().ou_theta, learner.config().ou_sigma,
              learner.config().ou_dt),
          critic_snapshot_(learner.critic(0)) {
        state_ = env_.reset(streams_.env());
        ou_.reset();
    }

    // One environment interaction at global step index t (1-based).
    void env_step(long t) {
        const AgentConfig& cfg = learner_.config();
        std::vector<double> action;
        if (t <= schedule_.warmup_steps) {
            action = learner_.random_action(streams_.exploration);
        } else if (cfg.exploration_type == ExplorationType::ornstein_uhlenbeck) {
            action = learner_.act_ou(state_, ou_, streams_.exploration);
        } else {
            action = learner_.act_gaussian(state_, cfg.exploration_noise_sigma, streams_.exploration);
        }
        StepResult res = env_.step(action);
        buffer_.insert({state_, action, res.reward, res.next_state, res.done, 0});
        if (res.done || res.truncated) {
            state_ = env_.reset(streams_.env());
            ou_.reset();
        } else {
            state_ = std::move(res.next_state);
        }
        ++log_.env_steps;
    }

    // One learning iteration associated with step index t. Updates are
    // gated on the warmup and on having a full batch.
    void update(long t) {
        const AgentConfig& cfg = learner_.config();
        if (t <= schedule_.warmup_steps) return;
        if (buffer_.size() < static_cast<size_t>(cfg.batch_size)) return;
        const std::vector<size_t> idx = buffer_.sample_indices(static_cast<size_t>(cfg.batch_size));
        Batch batch(buffer_, idx, learner_.spec().state_dim, learner_.spec().action_dim);
        const std::vector<double> y = learner_.compute_targets(batch, streams_.smoothing);
        last_loss_ = learner_.update_critics(batch, y);
        ++log_.critic_updates;
        if (learner_.critic_update_count() % cfg.policy_delay == 0) {
            learner_.update_actor(batch);
            learner_.soft_update(cfg.tau);
            ++log_.actor_updates;
        }
    }

    // Evaluation rows for every eval_interval multiple in (from, to].
    void maybe_eval(long from, long to) {
        for (long m = (from / schedule_.eval_interval + 1) * schedule_.eval_interval; m <= to;
             m += schedule_.eval_interval)
            evaluate_at(m);
    }

    void evaluate_at(long step) {
        std::vector<double> returns(static_cast<size_t>(eval_episodes_));
        for (int e = 0; e < eval_episodes_; ++e) {
            std::vector<double> s = eval_env_.reset(streams_.eval());
            double total = 0.0;
            while (true) {
                StepResult res = eval_env_.step(learner_.deterministic_action(s));
                total += res.reward;
                if (res.done || res.truncated) break;
                s = std::move(res.next_state);
            }
            returns[static_cast<size_t>(e)] = total;
        }
        double mean = 0;
        for (double r : returns) mean += r;
        mean /= returns.size();
        double var = 0;
        for (double r : returns) var += (r - mean) * (r - mean);
        var /= returns.size();

        RunLogRow row;
        row.step = step;
        row.eval_return_mean = mean;
        row.eval_return_std = std::sqrt(var);
        row.critic_loss = last_loss_;
        const size_t probe = std::min<size_t>(1000, buffer_.size());
        if (probe > 0) {
            row.q_std_diagnostic = q_std_diagnostic(learner_, buffer_, probe, streams_.diag);
            Matrix probe_inputs = sample_probe_inputs(buffer_, probe, learner_.spec().state_dim,
                                                      learner_.spec().action_dim, streams_.diag);
            row.q_change_diagnostic = q_change_diagnostic(critic_snapshot_, learner_.critic(0), probe_inputs);
        }
        critic_snapshot_ = learner_.critic(0);
        log_.rows.push_back(row);
        if (hook_) hook_(row);
    }

  private:
    Learner& learner_;
    Environment& env_;
    Environment& eval_env_;
    ReplayBuffer& buffer_;
    const Schedule& schedule_;
    RngStreams& streams_;
    RunLog& log_;
    EvalHook hook_;
    int eval_episodes_;
    OuNoise ou_;
    Mlp critic_snapshot_;
    std::vector<double> state_;
    double last_loss_ = 0.0;
};

}  // namespace detail

// Classical schedule: one environment step followed by one learning
// iteration per time step.
inline RunLog train_streaming(Learner& learner, Environment& env, Environment& eval_env, ReplayBuffer& buffer,
                              const Schedule& schedule, RngStreams& streams, EvalHook hook = nullptr,
                              int eval_episodes = 10) {
    schedule.validate(learner.config().batch_size);
    RunLog log;
    detail::TrainDriver driver(learner, env, eval_env, buffer, schedule, streams, log, std::move(hook),
                               eval_episodes);
    for (long t = 1; t <= schedule.total_steps; ++t) {
        driver.env_step(t);
        driver.update(t);
        driver.maybe_eval(t - 1, t);
    }
    buffer.verify_conservation();
    return log;
}

// Regularly updated schedule: F environment steps with the policy frozen,
// then F learning iterations. A final partial block runs min(F, remaining)
// steps in each phase. F = 1 interleaves exactly like train_streaming.
inline RunLog train_regular(Learner& learner, Environment& env, Environment& eval_env, ReplayBuffer& buffer,
                            const Schedule& schedule, RngStreams& streams, EvalHook hook = nullptr,
                            int eval_episodes = 10) {
    schedule.validate(learner.config().batch_size);
    RunLog log;
    detail::TrainDriver driver(learner, env, eval_env, buffer, schedule, streams, log, std::move(hook),
                               eval_episodes);
    long t = 0;
    while (t < schedule.total_steps) {
        const long block = std::min(schedule.block_size, schedule.total_steps - t);
        for (long f = 1; f <= block; ++f) driver.env_step(t + f);
        for (long f = 1; f <= block; ++f) driver.update(t + f);
        driver.maybe_eval(t, t + block);
        t += block;
    }
    buffer.verify_conservation();
    return log;
}

}  // namespace rud

#endif
