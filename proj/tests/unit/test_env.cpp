#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rud/env.hpp"

using namespace rud;

TEST_CASE("pendulum reset is seeded-deterministic") {
    PendulumEnv env;
    const auto a = env.reset(7);
    const auto b = env.reset(7);
    CHECK(a == b);
    CHECK(a.size() == 3);
    CHECK_THAT(a[0] * a[0] + a[1] * a[1], Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("pendulum reward is zero at upright rest with zero torque") {
    PendulumEnv env;
    env.reset(0);
    env.set_state(0.0, 0.0);
    StepResult r = env.step({0.0});
    CHECK(r.reward == 0.0);
}

TEST_CASE("pendulum reward is bounded") {
    PendulumEnv env;
    env.reset(1);
    const double bound = M_PI * M_PI + 0.1 * 64.0 + 0.001 * 4.0;
    for (int i = 0; i < 200; ++i) {
        StepResult r = env.step({i % 2 ? 2.0 : -2.0});
        CHECK(r.reward <= 0.0);
        CHECK(r.reward >= -bound);
    }
}

TEST_CASE("pendulum truncates at the step limit and never terminates") {
    PendulumEnv env;
    env.reset(3);
    for (int i = 0; i < 199; ++i) {
        StepResult r = env.step({0.5});
        CHECK_FALSE(r.done);
        CHECK_FALSE(r.truncated);
    }
    StepResult last = env.step({0.5});
    CHECK_FALSE(last.done);
    CHECK(last.truncated);
}

TEST_CASE("same seed and action sequence give the same cumulative reward") {
    for (const char* id : {"pendulum", "pointmass", "lqr"}) {
        auto e1 = make_environment(id);
        auto e2 = make_environment(id);
        e1->reset(11);
        e2->reset(11);
        double r1 = 0, r2 = 0;
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 50; ++i) {
            std::vector<double> a(e1->spec().action_dim);
            for (double& v : a) v = u(rng);
            r1 += e1->step(a).reward;
            r2 += e2->step(a).reward;
        }
        CHECK(r1 == r2);
    }
}

TEST_CASE("point-mass reset starts away from the goal") {
    PointMassEnv env;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = env.reset(seed);
        CHECK(s[0] * s[0] + s[1] * s[1] > 0.0);
        CHECK(s[2] == 0.0);
        CHECK(s[3] == 0.0);
    }
}

TEST_CASE("LQR reset stays in the initial box and reward is the quadratic cost") {
    LqrEnv env;
    const auto s = env.reset(9);
    for (double v : s) {
        CHECK(v >= -0.5);
        CHECK(v <= 0.5);
    }
    const std::vector<double> u{0.7};
    StepResult r = env.step(u);
    double expected = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) expected += s[i] * env.Q()(i, j) * s[j];
    expected += u[0] * env.R()(0, 0) * u[0];
    CHECK_THAT(r.reward, Catch::Matchers::WithinAbs(-expected, 1e-12));
}

TEST_CASE("action dimension mismatch is a hard error") {
    PendulumEnv env;
    env.reset(0);
    CHECK_THROWS(env.step({0.1, 0.2}));
}

TEST_CASE("scalar discounted Riccati fixed point matches an independent iteration") {
    // 1-dim LQR A=0.9, B=1, Q=1, R=1, gamma=0.99
    Matrix A(1, 1), B(1, 1), Q(1, 1), R(1, 1);
    A(0, 0) = 0.9;
    B(0, 0) = 1.0;
    Q(0, 0) = 1.0;
    R(0, 0) = 1.0;
    const double gamma = 0.99;
    // oracle: scalar fixed-point iteration written out directly
    double p = 1.0;
    for (int i = 0; i < 100000; ++i) {
        const double next =
            1.0 + gamma * 0.81 * p - gamma * gamma * (0.9 * p) * (0.9 * p) / (1.0 + gamma * p);
        if (std::fabs(next - p) < 1e-14) {
            p = next;
            break;
        }
        p = next;
    }
    const Matrix P = solve_discounted_dare(A, B, Q, R, gamma);
    CHECK_THAT(P(0, 0), Catch::Matchers::WithinAbs(p, 1e-8));
}

TEST_CASE("LQR optimal value: zero at origin, symmetric, matches a discounted rollout") {
    LqrEnv env;
    const double gamma = 0.99;
    CHECK(lqr_optimal_value(env, {0.0, 0.0}, gamma) == 0.0);

    const std::vector<double> s{0.3, -0.2};
    const std::vector<double> neg{-0.3, 0.2};
    CHECK_THAT(lqr_optimal_value(env, s, gamma),
               Catch::Matchers::WithinAbs(lqr_optimal_value(env, neg, gamma), 1e-12));

    // rollout under the optimal linear policy u = -Kx, no clipping
    const Matrix P = solve_discounted_dare(env.A(), env.B(), env.Q(), env.R(), gamma);
    const Matrix K = lqr_optimal_gain(env.A(), env.B(), env.R(), P, gamma);
    std::vector<double> x = s;
    double value = 0.0, discount = 1.0;
    for (int t = 0; t < 5000; ++t) {
        const double u = -(K(0, 0) * x[0] + K(0, 1) * x[1]);
        double cost = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) cost += x[i] * env.Q()(i, j) * x[j];
        cost += u * env.R()(0, 0) * u;
        value += discount * -cost;
        discount *= gamma;
        const std::vector<double> nx{env.A()(0, 0) * x[0] + env.A()(0, 1) * x[1] + env.B()(0, 0) * u,
                                     env.A()(1, 0) * x[0] + env.A()(1, 1) * x[1] + env.B()(1, 0) * u};
        x = nx;
    }
    CHECK_THAT(lqr_optimal_value(env, s, gamma), Catch::Matchers::WithinAbs(value, 1e-4));
}

TEST_CASE("unknown environment id is rejected") {
    CHECK_THROWS(make_environment("mujoco"));
}
