#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rud/analysis.hpp"
#include "rud/rng.hpp"

using namespace rud;

TEST_CASE("expected replay count: boundary values and input checks") {
    // last insert is sampled once with probability N/T
    CHECK_THAT(exact_expected_replay_count(100, 100, 10), Catch::Matchers::WithinAbs(0.1, 1e-15));
    // inserts before sampling starts share the t = N value
    CHECK(exact_expected_replay_count(1, 100, 10) == exact_expected_replay_count(10, 100, 10));
    CHECK_THROWS(exact_expected_replay_count(101, 100, 10));
    CHECK_THROWS(exact_expected_replay_count(5, 100, 200));
    CHECK_THROWS(exact_expected_replay_count(0, 100, 10));
}

TEST_CASE("expected replay count is constant up to N, then strictly decreasing") {
    const long T = 10000, N = 16;
    double prev = exact_expected_replay_count(1, T, N);
    for (long t = 2; t <= T; ++t) {
        const double cur = exact_expected_replay_count(t, T, N);
        if (t <= N)
            CHECK(cur == prev);
        else
            CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("closed-form extremes match the harmonic sum") {
    const auto [max_v, min_v] = theorem1_bounds(12800, 16);
    CHECK(min_v == 16.0 / 12800.0);
    const double exact = exact_expected_replay_count(16, 12800, 16);
    CHECK_THAT(max_v, Catch::Matchers::WithinRel(exact, 0.01));
}

TEST_CASE("simulated streaming replay counts match the exact expectation") {
    const long T = 200, N = 8, trials = 20000;
    const ReplayCountReport rep = simulate_replay_counts(T, N, 1, trials, 99);
    REQUIRE(rep.insert_steps.size() == static_cast<size_t>(T));
    int z_violations = 0;
    for (size_t i = 0; i < rep.insert_steps.size(); ++i) {
        const double se = std::max(rep.simulated_stderr[i], 1e-12);
        const double z = (rep.simulated_means[i] - rep.exact_expectations[i]) / se;
        if (std::fabs(z) > 4.0) ++z_violations;
    }
    // 4-sigma violations over 200 Gaussian-ish cells should be essentially absent
    CHECK(z_violations == 0);
}

TEST_CASE("block-schedule expectation reduces to streaming at F = 1") {
    for (long t : {1L, 7L, 50L, 100L})
        CHECK_THAT(exact_expected_replay_count_block(t, 100, 10, 1),
                   Catch::Matchers::WithinAbs(exact_expected_replay_count(t, 100, 10), 1e-12));
}

TEST_CASE("simulated block replay counts match the block expectation") {
    const long T = 200, N = 8, F = 25, trials = 20000;
    const ReplayCountReport rep = simulate_replay_counts(T, N, F, trials, 7);
    int z_violations = 0;
    for (size_t i = 0; i < rep.insert_steps.size(); ++i) {
        const double se = std::max(rep.simulated_stderr[i], 1e-12);
        if (std::fabs((rep.simulated_means[i] - rep.exact_expectations[i]) / se) > 4.0) ++z_violations;
    }
    CHECK(z_violations == 0);
}

TEST_CASE("binomial ratio agrees with direct factorials and handles edges") {
    CHECK(binomial_ratio(10, 3, 10) == 1.0);
    CHECK(binomial_ratio(2, 3, 10) == 0.0);
    // C(7,3) / C(10,3) = 35 / 120
    CHECK_THAT(binomial_ratio(7, 3, 10), Catch::Matchers::WithinAbs(35.0 / 120.0, 1e-12));
    CHECK_THROWS(binomial_ratio(11, 3, 10));
}

TEST_CASE("hit events: streaming never exceeds the block schedule") {
    for (long t : {100L, 500L, 1000L})
        for (long F : {10L, 50L})
            for (long N : {8L, 32L}) {
                const double s = exact_hit_events_streaming(t, F, N);
                const double b = exact_hit_events_block(t, F, N);
                CHECK(s < b);
                CHECK(b <= static_cast<double>(F));
            }
}

TEST_CASE("hit-event simulation matches both exact formulas") {
    const HitEventsResult r = simulate_hit_events(60, 10, 5, 40000, 4);
    CHECK(std::fabs(r.streaming_sim_mean - r.streaming_exact) < 4.0 * r.streaming_sim_stderr);
    CHECK(std::fabs(r.block_sim_mean - r.block_exact) < 4.0 * r.block_sim_stderr);
    CHECK_THROWS(simulate_hit_events(10, 8, 5, 100, 0));
}

TEST_CASE("min-of-two-critics bias matches sigma / sqrt(pi)") {
    const BiasEstimate e = clipped_double_q_bias_mc(0.0, 1.0, 200000, 5);
    CHECK_THAT(e.analytic_prediction, Catch::Matchers::WithinAbs(-1.0 / std::sqrt(M_PI), 1e-15));
    CHECK(std::fabs(e.mc_mean_of_min - e.analytic_prediction) < 3.0 * e.mc_stderr);

    // scale and shift equivariance
    const BiasEstimate e2 = clipped_double_q_bias_mc(5.0, 2.0, 200000, 6);
    CHECK_THAT(e2.analytic_prediction, Catch::Matchers::WithinAbs(5.0 - 2.0 / std::sqrt(M_PI), 1e-15));
    CHECK(std::fabs(e2.mc_mean_of_min - e2.analytic_prediction) < 3.0 * e2.mc_stderr);
}

TEST_CASE("identical critics have no bias") {
    const BiasEstimate e = clipped_double_q_bias_mc(3.0, 1.0, 200000, 7, /*correlated=*/true);
    CHECK(std::fabs(e.mc_mean_of_min - 3.0) < 3.0 * e.mc_stderr);
}

TEST_CASE("bias estimator input validation") {
    CHECK_THROWS(clipped_double_q_bias_mc(0.0, 0.0, 100000, 0));
    CHECK_THROWS(clipped_double_q_bias_mc(0.0, -1.0, 100000, 0));
    CHECK_THROWS(clipped_double_q_bias_mc(0.0, 1.0, 100, 0));
}

namespace {

// learner whose first critic computes exactly Q(s, a) = s[0]
Learner make_linear_probe_learner() {
    EnvSpec spec;
    spec.state_dim = 2;
    spec.action_dim = 1;
    spec.action_low = {-1.0};
    spec.action_high = {1.0};
    spec.max_episode_steps = 10;
    AgentConfig cfg;
    cfg.hidden_sizes = {};
    cfg.batch_size = 4;
    std::mt19937_64 init(0);
    Learner learner(spec, cfg, init);
    Mlp& q = learner.critic(0);
    std::fill(q.params().begin(), q.params().end(), 0.0);
    q.weight(0)[0] = 1.0;  // picks out s[0]
    return learner;
}

ReplayBuffer uniform_state_buffer(size_t n, uint64_t seed) {
    ReplayBuffer buf(n, seed);
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (size_t i = 0; i < n; ++i) {
        const double s0 = u(rng);
        buf.insert({{s0, 0.0}, {0.25}, 0.0, {s0, 0.0}, false, 0});
    }
    return buf;
}

}  // namespace

TEST_CASE("q_std diagnostic: zero for a constant critic, 1/sqrt(12) for uniform states") {
    Learner learner = make_linear_probe_learner();
    ReplayBuffer buf = uniform_state_buffer(4000, 11);
    std::mt19937_64 diag(3);

    CHECK_THAT(q_std_diagnostic(learner, buf, 2000, diag), Catch::Matchers::WithinAbs(1.0 / std::sqrt(12.0), 0.02));

    std::fill(learner.critic(0).params().begin(), learner.critic(0).params().end(), 0.0);
    learner.critic(0).bias(0)[0] = 7.0;
    CHECK(q_std_diagnostic(learner, buf, 2000, diag) == 0.0);

    CHECK_THROWS(q_std_diagnostic(learner, buf, 5000, diag));
}

TEST_CASE("q_change diagnostic: zero on itself, exact under a bias shift") {
    Learner learner = make_linear_probe_learner();
    ReplayBuffer buf = uniform_state_buffer(100, 13);
    std::mt19937_64 diag(5);
    const Matrix probe = sample_probe_inputs(buf, 50, 2, 1, diag);
    REQUIRE(probe.rows == 50);
    REQUIRE(probe.cols == 3);
    for (int p = 0; p < probe.rows; ++p) CHECK(probe(p, 2) == 0.25);

    const Mlp before = learner.critic(0);
    CHECK(q_change_diagnostic(before, learner.critic(0), probe) == 0.0);

    learner.critic(0).bias(0)[0] += 0.125;
    CHECK_THAT(q_change_diagnostic(before, learner.critic(0), probe), Catch::Matchers::WithinAbs(0.125, 1e-12));

    const Mlp other({2, 1}, OutputActivation::identity);
    CHECK_THROWS(q_change_diagnostic(before, other, probe));
}
