// Command-line harness: training runs, F sweeps, the DDPG ablation, and
// the replay-count / double-Q bias analyses.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rud/analysis.hpp"
#include "rud/csv.hpp"
#include "rud/experiment.hpp"

namespace {

// z-test of a simulated mean against an exact expectation. A saturated cell
// (every trial identical, sample stderr exactly zero) has no defined z; the
// discrepancy there is a deterministic sub-1e-9 tail and is checked absolutely.
bool sim_matches(double sim, double exact, double stderr_, double* z_out) {
    if (stderr_ > 0.0) {
        *z_out = (sim - exact) / stderr_;
        return std::fabs(*z_out) < 3.0;
    }
    *z_out = 0.0;
    return std::fabs(sim - exact) < 1e-9;
}

int analyze_replay_counts(long T, long N, long F, long trials, uint64_t seed, bool exact_only,
                          const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    bool ok = true;

    // Headline values use the N ln((T+1)/N) and N/T closed forms; the
    // harmonic sum is the ground truth the simulations are checked against.
    const double m_first = rud::exact_expected_replay_count(N, T, N);
    const double m_last = rud::exact_expected_replay_count(T, T, N);
    const auto [bound_max, bound_min] = rud::theorem1_bounds(T, N);
    std::printf("replay-counts T=%ld N=%ld\n", T, N);
    std::printf("  E[M_%ld] = %.2f   (harmonic sum %.2f)\n", N, bound_max, m_first);
    std::printf("  E[M_%ld] = %.6g (harmonic sum %.6g)\n", T, bound_min, m_last);

    // strict monotonicity of the exact expectation on [N, T]
    {
        bool mono = true;
        double prev = m_first;
        const long points = std::min<long>(T - N, 200);
        for (long i = 1; i <= points; ++i) {
            const long t = N + i * (T - N) / points;
            const double v = rud::exact_expected_replay_count(t, T, N);
            if (v >= prev) mono = false;
            prev = v;
        }
        std::printf("  [%s] exact E[M_t] strictly decreasing on [N, T]\n", mono ? "PASS" : "FAIL");
        ok = ok && mono;
    }

    if (!exact_only) {
        rud::ReplayCountReport rep = rud::simulate_replay_counts(T, N, F, trials, seed);
        rep.write_csv(out_dir + "/replay_counts.csv");
        bool sim_ok = true;
        const long points = 20;
        for (long i = 0; i < points; ++i) {
            const long t = 1 + i * (T - 1) / (points - 1);
            double z;
            if (!sim_matches(rep.simulated_means[t - 1], rep.exact_expectations[t - 1],
                             rep.simulated_stderr[t - 1], &z)) {
                sim_ok = false;
                std::printf("    t=%ld z=%.2f exceeds 3\n", t, z);
            }
        }
        std::printf("  [%s] simulated means match exact expectations (F=%ld, %ld trials, |z| < 3)\n",
                    sim_ok ? "PASS" : "FAIL", F, trials);
        ok = ok && sim_ok;

        // Theorem-2 style ordering: block vs streaming hit expectations.
        rud::CsvWriter t2(out_dir + "/theorem2.csv",
                          {"t", "F", "N", "streaming_exact", "streaming_sim_mean", "streaming_sim_stderr",
                           "block_exact", "block_sim_mean", "block_sim_stderr"});
        bool order_ok = true, t2_sim_ok = true;
        for (long t : {100L, 500L, 1000L}) {
            for (long f : {10L, 50L}) {
                for (long n : {8L, 32L}) {
                    if (t < f + n) continue;
                    const rud::HitEventsResult r = rud::simulate_hit_events(t, f, n, trials, seed + t + f + n);
                    t2.row(t, f, n, r.streaming_exact, r.streaming_sim_mean, r.streaming_sim_stderr,
                           r.block_exact, r.block_sim_mean, r.block_sim_stderr);
                    if (!(r.streaming_exact < r.block_exact)) order_ok = false;
                    double z1, z2;
                    const bool ok1 = sim_matches(r.streaming_sim_mean, r.streaming_exact,
                                                 r.streaming_sim_stderr, &z1);
                    const bool ok2 = sim_matches(r.block_sim_mean, r.block_exact, r.block_sim_stderr, &z2);
                    if (!ok1 || !ok2) {
                        t2_sim_ok = false;
                        std::printf("    t=%ld F=%ld N=%ld z_streaming=%.2f z_block=%.2f\n", t, f, n, z1, z2);
                    }
                }
            }
        }
        std::printf("  [%s] block expectation strictly exceeds streaming on the (t, F, N) grid\n",
                    order_ok ? "PASS" : "FAIL");
        std::printf("  [%s] hit-event simulations agree with exact formulas (|z| < 3)\n",
                    t2_sim_ok ? "PASS" : "FAIL");
        ok = ok && order_ok && t2_sim_ok;
    }
    return ok ? 0 : 1;
}

int analyze_bias(double sigma, double v_star, long samples, uint64_t seed, bool correlated,
                 const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const rud::BiasEstimate e = rud::clipped_double_q_bias_mc(v_star, sigma, samples, seed, correlated);
    const double reference = correlated ? v_star : e.analytic_prediction;
    const double z = (e.mc_mean_of_min - reference) / std::max(e.mc_stderr, 1e-300);
    rud::CsvWriter out(out_dir + "/bias.csv",
                       {"sigma", "v_star", "mc_mean_of_min", "mc_stderr", "analytic_prediction", "z_score"});
    out.row(e.sigma, e.v_star, e.mc_mean_of_min, e.mc_stderr, e.analytic_prediction, z);
    std::printf("bias sigma=%g v_star=%g%s\n", sigma, v_star, correlated ? " (correlated draws)" : "");
    std::printf("  mc_mean=%.6f analytic=%.6f stderr=%.2e z=%.2f\n", e.mc_mean_of_min, reference, e.mc_stderr,
                z);
    const bool ok = std::fabs(z) < 3.0;
    std::printf("  [%s] Monte Carlo mean within 3 standard errors of prediction\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic policy gradient laboratory: DDPG/TD3 with streaming and regularly "
                 "updated schedules, plus replay-count and double-Q bias analyses"};
    app.require_subcommand(1);
    unsigned jobs = 0;
    app.add_option("--jobs", jobs, "max concurrent seed runs (default: hardware threads)");

    std::string config_path;
    auto* train = app.add_subcommand("train", "run (algorithm x scheduler) for every seed in the config");
    train->add_option("config", config_path, "experiment config file")->required();

    std::string sweep_config;
    std::vector<long> f_values;
    auto* sweep = app.add_subcommand("sweep-f", "rerun the experiment across block sizes F");
    sweep->add_option("config", sweep_config, "experiment config file")->required();
    sweep->add_option("--values", f_values, "F values to sweep (1 = streaming baseline)")->required();

    std::string ablate_config;
    auto* ablate = app.add_subcommand("ablate-ddpg", "plain DDPG under streaming vs regular schedules");
    ablate->add_option("config", ablate_config, "experiment config file")->required();

    auto* analyze = app.add_subcommand("analyze", "theorem-verification oracles");
    analyze->require_subcommand(1);

    long rc_T = 1000000, rc_N = 128, rc_F = 1, rc_trials = 10000;
    uint64_t rc_seed = 0;
    bool rc_exact_only = false;
    std::string rc_out = "analysis";
    auto* rc = analyze->add_subcommand("replay-counts", "expected replay counts: exact vs simulation");
    rc->add_option("--T", rc_T, "total steps");
    rc->add_option("--N", rc_N, "batch size");
    rc->add_option("--F", rc_F, "block size for the simulated schedule");
    rc->add_option("--trials", rc_trials, "Monte Carlo trials");
    rc->add_option("--seed", rc_seed, "simulation seed");
    rc->add_flag("--exact-only", rc_exact_only, "skip simulations");
    rc->add_option("--out", rc_out, "output directory");

    double b_sigma = 1.0, b_vstar = 0.0;
    long b_samples = 1000000;
    uint64_t b_seed = 0;
    bool b_correlated = false;
    std::string b_out = "analysis";
    auto* bias = analyze->add_subcommand("bias", "clipped double-Q downward bias Monte Carlo");
    bias->add_option("--sigma", b_sigma, "critic noise standard deviation");
    bias->add_option("--vstar", b_vstar, "reference state value");
    bias->add_option("--samples", b_samples, "Monte Carlo sample pairs");
    bias->add_option("--seed", b_seed, "Monte Carlo seed");
    bias->add_flag("--correlated", b_correlated, "draw Q1 == Q2 (no-bias edge case)");
    bias->add_option("--out", b_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return rud::cmd_train(rud::ExperimentConfig::from_file(config_path), nullptr, jobs) ? 0 : 1;
        if (*sweep) return rud::cmd_sweep_f(rud::ExperimentConfig::from_file(sweep_config), f_values, jobs) ? 0 : 1;
        if (*ablate) return rud::cmd_ablate_ddpg(rud::ExperimentConfig::from_file(ablate_config), jobs) ? 0 : 1;
        if (*rc) return analyze_replay_counts(rc_T, rc_N, rc_F, rc_trials, rc_seed, rc_exact_only, rc_out);
        if (*bias) return analyze_bias(b_sigma, b_vstar, b_samples, b_seed, b_correlated, b_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
