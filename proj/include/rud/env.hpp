#ifndef RUD_ENV_HPP
#define RUD_ENV_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rud/linalg.hpp"

namespace rud {

struct EnvSpec {
    int state_dim = 0;
    int action_dim = 0;
    std::vector<double> action_low;
    std::vector<double> action_high;
    int max_episode_steps = 0;
};

struct StepResult {
    std::vector<double> next_state;
    double reward = 0.0;
    bool done = false;       // terminal dynamics
    bool truncated = false;  // step-limit cutoff, bootstrapping continues
};

// Continuous-control MDP. reset(seed) followed by an identical action
// sequence reproduces the trajectory exactly.
class Environment {
  public:
    virtual ~Environment() = default;
    const EnvSpec& spec() const { return spec_; }
    virtual std::vector<double> reset(uint64_t seed) = 0;
    virtual StepResult step(const std::vector<double>& action) = 0;

  protected:
    void check_action(const std::vector<double>& a) const {
        if (static_cast<int>(a.size()) != spec_.action_dim)
            throw std::invalid_argument("Environment::step: action dimension mismatch");
    }
    EnvSpec spec_;
    std::mt19937_64 rng_;
    int steps_ = 0;
};

// Torque-limited pendulum swing-up. State observation (cos th, sin th,
// th_dot); theta = 0 is upright. Per-step reward
// -(angle^2 + 0.1 vel^2 + 0.001 torque^2), bounded in [-16.28, 0].
class PendulumEnv final : public Environment {
  public:
    PendulumEnv() {
        spec_ = {3, 1, {-max_torque_}, {max_torque_}, 200};
    }

    std::vector<double> reset(uint64_t seed) override {
        rng_.seed(seed);
        std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
        std::uniform_real_distribution<double> vel(-1.0, 1.0);
        theta_ = ang(rng_);
        theta_dot_ = vel(rng_);
        steps_ = 0;
        return observe();
    }

    // Pins the internal state; used by value diagnostics and tests.
    void set_state(double theta, double theta_dot) {
        theta_ = theta;
        theta_dot_ = theta_dot;
    }

    StepResult step(const std::vector<double>& action) override {
        check_action(action);
        const double u = std::clamp(action[0], -max_torque_, max_torque_);
        const double a = normalize_angle(theta_);
        const double reward = -(a * a + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u);
        theta_dot_ += (3.0 * g_ / (2.0 * length_) * std::sin(theta_) + 3.0 / (mass_ * length_ * length_) * u) * dt_;
        theta_dot_ = std::clamp(theta_dot_, -max_speed_, max_speed_);
        theta_ += theta_dot_ * dt_;
        ++steps_;
        return {observe(), reward, false, steps_ >= spec_.max_episode_steps};
    }

  private:
    static double normalize_angle(double a) {
        const double two_pi = 2.0 * std::numbers::pi;
        a = std::fmod(a + std::numbers::pi, two_pi);
        if (a < 0) a += two_pi;
        return a - std::numbers::pi;
    }
    std::vector<double> observe() const { return {std::cos(theta_), std::sin(theta_), theta_dot_}; }

    static constexpr double max_torque_ = 2.0;
    static constexpr double max_speed_ = 8.0;
    static constexpr double dt_ = 0.05;
    static constexpr double g_ = 10.0;
    static constexpr double mass_ = 1.0;
    static constexpr double length_ = 1.0;
    double theta_ = 0.0;
    double theta_dot_ = 0.0;
};

// Planar point mass accelerating toward the origin. State (px, py, vx, vy),
// action is acceleration in [-1, 1]^2. Reward -(|p|^2 + 0.01 |v|^2 +
// 0.001 |a|^2); positions and velocities are clamped to [-2, 2], so the
// per-step reward is bounded in [-8.162, 0].
class PointMassEnv final : public Environment {
  public:
    PointMassEnv() {
        spec_ = {4, 2, {-1.0, -1.0}, {1.0, 1.0}, 100};
    }

    std::vector<double> reset(uint64_t seed) override {
        rng_.seed(seed);
        std::uniform_real_distribution<double> pos(-1.0, 1.0);
        do {
            px_ = pos(rng_);
            py_ = pos(rng_);
        } while (px_ * px_ + py_ * py_ < 0.01);  // start away from the goal
        vx_ = vy_ = 0.0;
        steps_ = 0;
        return {px_, py_, vx_, vy_};
    }

    StepResult step(const std::vector<double>& action) override {
        check_action(action);
        const double ax = std::clamp(action[0], -1.0, 1.0);
        const double ay = std::clamp(action[1], -1.0, 1.0);
        const double reward = -(px_ * px_ + py_ * py_ + 0.01 * (vx_ * vx_ + vy_ * vy_) +
                                0.001 * (ax * ax + ay * ay));
        vx_ = std::clamp(damping_ * vx_ + ax * dt_, -2.0, 2.0);
        vy_ = std::clamp(damping_ * vy_ + ay * dt_, -2.0, 2.0);
        px_ = std::clamp(px_ + vx_ * dt_, -2.0, 2.0);
        py_ = std::clamp(py_ + vy_ * dt_, -2.0, 2.0);
        ++steps_;
        return {{px_, py_, vx_, vy_}, reward, false, steps_ >= spec_.max_episode_steps};
    }

  private:
    static constexpr double dt_ = 0.1;
    static constexpr double damping_ = 0.95;
    double px_ = 0, py_ = 0, vx_ = 0, vy_ = 0;
};

// Linear dynamics x' = Ax + Bu with quadratic cost: reward
// -(x'Qx + u'Ru). Deterministic apart from the seeded initial state, so
// the discounted Riccati solution is an exact value oracle.
class LqrEnv final : public Environment {
  public:
    LqrEnv() : A_(2, 2), B_(2, 1), Q_(Matrix::identity(2)), R_(1, 1) {
        A_(0, 0) = 1.0;
        A_(0, 1) = 0.1;
        A_(1, 0) = 0.0;
        A_(1, 1) = 1.0;
        B_(0, 0) = 0.0;
        B_(1, 0) = 0.1;
        R_(0, 0) = 0.1;
        spec_ = {2, 1, {-5.0}, {5.0}, 100};
        x_.assign(2, 0.0);
    }

    std::vector<double> reset(uint64_t seed) override {
        rng_.seed(seed);
        std::uniform_real_distribution<double> dist(-0.5, 0.5);
        for (double& xi : x_) xi = dist(rng_);
        steps_ = 0;
        return x_;
    }

    StepResult step(const std::vector<double>& action) override {
        check_action(action);
        std::vector<double> u(action);
        for (int i = 0; i < spec_.action_dim; ++i)
            u[i] = std::clamp(u[i], spec_.action_low[i], spec_.action_high[i]);
        double cost = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) cost += x_[i] * Q_(i, j) * x_[j];
        cost += u[0] * R_(0, 0) * u[0];
        std::vector<double> next(2, 0.0);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) next[i] += A_(i, j) * x_[j];
            next[i] += B_(i, 0) * u[0];
        }
        x_ = next;
        ++steps_;
        return {x_, -cost, false, steps_ >= spec_.max_episode_steps};
    }

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    const Matrix& Q() const { return Q_; }
    const Matrix& R() const { return R_; }

  private:
    Matrix A_, B_, Q_, R_;
    std::vector<double> x_;
};

// Fixed-point iteration for the discounted discrete algebraic Riccati
// equation P = Q + g A'PA - g^2 A'PB (R + g B'PB)^-1 B'PA.
inline Matrix solve_discounted_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                                    double gamma, double tol = 1e-10, int max_iters = 10000) {
    Matrix P = Q;
    const Matrix At = transpose(A);
    const Matrix Bt = transpose(B);
    for (int it = 0; it < max_iters; ++it) {
        const Matrix PA = P * A;
        const Matrix PB = P * B;
        Matrix gain_inner = R;
        {
            Matrix BtPB = Bt * PB;
            for (size_t i = 0; i < gain_inner.data.size(); ++i) gain_inner.data[i] += gamma * BtPB.data[i];
        }
        const Matrix K = inverse(gain_inner) * (Bt * PA);
        const Matrix AtPA = At * PA;
        Matrix next = Q;
        for (size_t i = 0; i < next.data.size(); ++i) next.data[i] += gamma * AtPA.data[i];
        const Matrix corr = (At * PB) * K;
        for (size_t i = 0; i < next.data.size(); ++i) next.data[i] -= gamma * gamma * corr.data[i];
        const double diff = max_abs_diff(next, P);
        P = next;
        if (diff < tol) return P;
    }
    throw std::runtime_error("solve_discounted_dare: no convergence in 10000 iterations");
}

// Optimal feedback gain for the discounted LQR: u = -K x.
inline Matrix lqr_optimal_gain(const Matrix& A, const Matrix& B, const Matrix& R, const Matrix& P,
                               double gamma) {
    const Matrix Bt = transpose(B);
    Matrix inner = R;
    const Matrix BtPB = Bt * (P * B);
    for (size_t i = 0; i < inner.data.size(); ++i) inner.data[i] += gamma * BtPB.data[i];
    Matrix K = inverse(inner) * (Bt * (P * A));
    for (double& k : K.data) k *= gamma;
    return K;
}

// Analytic value of the LQR environment under the optimal policy:
// V*(s) = -s'Ps where P solves the discounted DARE.
inline double lqr_optimal_value(const LqrEnv& env, const std::vector<double>& state, double gamma) {
    if (state.size() != static_cast<size_t>(env.spec().state_dim))
        throw std::invalid_argument("lqr_optimal_value: state dimension mismatch");
    const Matrix P = solve_discounted_dare(env.A(), env.B(), env.Q(), env.R(), gamma);
    double v = 0.0;
    for (int i = 0; i < P.rows; ++i)
        for (int j = 0; j < P.cols; ++j) v += state[i] * P(i, j) * state[j];
    return -v;
}

inline std::unique_ptr<Environment> make_environment(const std::string& id) {
    if (id == "pendulum") return std::make_unique<PendulumEnv>();
    if (id == "pointmass") return std::make_unique<PointMassEnv>();
    if (id == "lqr") return std::make_unique<LqrEnv>();
    throw std::invalid_argument("unknown environment id: " + id);
}

}  // namespace rud

#endif
