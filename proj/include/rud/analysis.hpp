#ifndef RUD_ANALYSIS_HPP
#define RUD_ANALYSIS_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rud/agent.hpp"
#include "rud/replay.hpp"

namespace rud {

// ---------------------------------------------------------------------------
// Replay-count expectations under the streaming schedule.
//
// With buffer size growing one transition per step and one uniform
// without-replacement mini-batch of N drawn per step, the transition
// inserted at step t is expected to be replayed
//   E[M_t] = sum_{k=t}^{T} N/k        for t >= N,
// and the first N transitions all share the t = N value because sampling
// only starts once N transitions exist.
inline double exact_expected_replay_count(long t, long T, long N) {
    if (t < 1 || N < 1) throw std::invalid_argument("exact_expected_replay_count: t and N must be >= 1");
    if (t > T) throw std::invalid_argument("exact_expected_replay_count: t exceeds T");
    if (N > T) throw std::invalid_argument("exact_expected_replay_count: N exceeds T");
    const long start = std::max(t, N);
    double sum = 0.0;
    for (long k = T; k >= start; --k) sum += static_cast<double>(N) / static_cast<double>(k);
    return sum;
}

// Closed-form extremes of E[M_t]: max N ln((T+1)/N) (log approximation of
// the harmonic sum at t = N), min N/T (at t = T). The log form is checked
// against the exact harmonic sum when T/N is large enough for it to apply.
inline std::pair<double, double> theorem1_bounds(long T, long N) {
    if (N > T) throw std::invalid_argument("theorem1_bounds: N exceeds T");
    const double max_v = N * std::log(static_cast<double>(T + 1) / static_cast<double>(N));
    const double min_v = static_cast<double>(N) / static_cast<double>(T);
    if (T / N >= 100) {
        const double exact = exact_expected_replay_count(N, T, N);
        if (std::fabs(exact - max_v) / exact > 0.01)
            throw std::logic_error("theorem1_bounds: log approximation deviates from harmonic sum by > 1%");
    }
    return {max_v, min_v};
}

// log-domain ratio C(a, N) / C(t, N); zero when fewer than N items fit.
inline double binomial_ratio(long a, long N, long t) {
    if (a < N) return 0.0;
    if (a > t) throw std::invalid_argument("binomial_ratio: a exceeds t");
    double log_ratio = 0.0;
    for (long j = 0; j < N; ++j)
        log_ratio += std::log(static_cast<double>(a - j)) - std::log(static_cast<double>(t - j));
    return std::exp(log_ratio);
}

// Expected number of the F sampling events before t that touch the newest
// F transitions, streaming accounting: the i-th event credits only the
// F - i newest transitions.
inline double exact_hit_events_streaming(long t, long F, long N) {
    double sum = 0.0;
    for (long i = 1; i <= F; ++i) sum += 1.0 - binomial_ratio(t - F + i, N, t);
    return sum;
}

// Same quantity under the block schedule: all F events see the full
// newest-F set, so each contributes 1 - C(t-F, N)/C(t, N).
inline double exact_hit_events_block(long t, long F, long N) {
    return static_cast<double>(F) * (1.0 - binomial_ratio(t - F, N, t));
}

namespace detail {

// Draw n distinct values in [0, size) via Floyd's algorithm using an
// epoch-stamped mark array (no per-call allocation).
inline void floyd_sample(std::mt19937_64& rng, long size, long n, std::vector<long>& out,
                         std::vector<uint64_t>& stamps, uint64_t& epoch) {
    ++epoch;
    if (static_cast<long>(stamps.size()) < size) stamps.resize(size, 0);
    out.clear();
    for (long j = size - n; j < size; ++j) {
        std::uniform_int_distribution<long> dist(0, j);
        const long t = dist(rng);
        if (stamps[t] == epoch) {
            stamps[j] = epoch;
            out.push_back(j);
        } else {
            stamps[t] = epoch;
            out.push_back(t);
        }
    }
}

}  // namespace detail

struct HitEventsResult {
    long t = 0, F = 0, N = 0, trials = 0;
    double streaming_exact = 0, streaming_sim_mean = 0, streaming_sim_stderr = 0;
    double block_exact = 0, block_sim_mean = 0, block_sim_stderr = 0;
};

// Monte Carlo of the per-event hit indicators for both schedules at one
// (t, F, N). Slots are indices 1..t; the newest F are t-F+1..t.
inline HitEventsResult simulate_hit_events(long t, long F, long N, long trials, uint64_t seed) {
    if (t < F + N) throw std::invalid_argument("simulate_hit_events: requires t >= F + N");
    HitEventsResult r{t, F, N, trials};
    r.streaming_exact = exact_hit_events_streaming(t, F, N);
    r.block_exact = exact_hit_events_block(t, F, N);
    std::mt19937_64 rng(seed);
    std::vector<long> draw;
    std::vector<uint64_t> stamps;
    uint64_t epoch = 0;
    double s1 = 0, s1sq = 0, s2 = 0, s2sq = 0;
    for (long trial = 0; trial < trials; ++trial) {
        long hits_stream = 0, hits_block = 0;
        for (long i = 1; i <= F; ++i) {
            // streaming accounting: event i credits indices > t - F + i
            detail::floyd_sample(rng, t, N, draw, stamps, epoch);
            for (long d : draw)
                if (d >= t - F + i) {
                    ++hits_stream;
                    break;
                }
            // block schedule: every event credits indices > t - F
            detail::floyd_sample(rng, t, N, draw, stamps, epoch);
            for (long d : draw)
                if (d >= t - F) {
                    ++hits_block;
                    break;
                }
        }
        s1 += hits_stream;
        s1sq += static_cast<double>(hits_stream) * hits_stream;
        s2 += hits_block;
        s2sq += static_cast<double>(hits_block) * hits_block;
    }
    const double n = static_cast<double>(trials);
    r.streaming_sim_mean = s1 / n;
    r.block_sim_mean = s2 / n;
    r.streaming_sim_stderr = std::sqrt(std::max(0.0, s1sq / n - r.streaming_sim_mean * r.streaming_sim_mean) / n);
    r.block_sim_stderr = std::sqrt(std::max(0.0, s2sq / n - r.block_sim_mean * r.block_sim_mean) / n);
    return r;
}

struct ReplayCountReport {
    long T = 0, N = 0, F = 1, num_trials = 0;
    std::vector<long> insert_steps;
    std::vector<double> exact_expectations;
    std::vector<double> simulated_means;
    std::vector<double> simulated_stderr;

    void write_csv(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("ReplayCountReport: cannot open " + path);
        f << "insert_step,exact_expectation,simulated_mean,simulated_stderr\n";
        f.precision(17);
        for (size_t i = 0; i < insert_steps.size(); ++i)
            f << insert_steps[i] << "," << exact_expectations[i] << "," << simulated_means[i] << ","
              << simulated_stderr[i] << "\n";
    }
};

// Exact E[M_t] under the block schedule: updates run in bursts of F at
// buffer sizes bF (sampling only once the buffer holds N), each event
// giving a present slot probability N / (bF).
inline double exact_expected_replay_count_block(long t, long T, long N, long F) {
    double sum = 0.0;
    long pos = 0;
    while (pos < T) {
        const long block = std::min(F, T - pos);
        pos += block;
        if (pos < N || pos < t) continue;
        sum += static_cast<double>(block) * static_cast<double>(N) / static_cast<double>(pos);
    }
    return sum;
}

// Simulates the pure index process of the chosen schedule (F = 1 is
// streaming) and accumulates per-insert-step replay counts over trials.
inline ReplayCountReport simulate_replay_counts(long T, long N, long F, long trials, uint64_t seed) {
    if (N > T) throw std::invalid_argument("simulate_replay_counts: N exceeds T");
    if (F < 1 || F > T) throw std::invalid_argument("simulate_replay_counts: F must be in [1, T]");
    ReplayCountReport rep;
    rep.T = T;
    rep.N = N;
    rep.F = F;
    rep.num_trials = trials;
    std::vector<double> sum(T, 0.0), sumsq(T, 0.0);
    std::vector<long> counts(T);
    std::mt19937_64 rng(seed);
    std::vector<long> draw;
    std::vector<uint64_t> stamps;
    uint64_t epoch = 0;
    for (long trial = 0; trial < trials; ++trial) {
        std::fill(counts.begin(), counts.end(), 0);
        long events = 0;
        long pos = 0;
        while (pos < T) {
            const long block = std::min(F, T - pos);
            pos += block;  // block inserts
            for (long f = 0; f < block; ++f) {
                if (pos < N) continue;
                detail::floyd_sample(rng, pos, N, draw, stamps, epoch);
                for (long d : draw) ++counts[d];
                ++events;
            }
        }
        long total = 0;
        for (long c : counts) total += c;
        if (total != events * N)
            throw std::logic_error("simulate_replay_counts: counter conservation violated");
        for (long i = 0; i < T; ++i) {
            sum[i] += counts[i];
            sumsq[i] += static_cast<double>(counts[i]) * counts[i];
        }
    }
    const double n = static_cast<double>(trials);
    for (long i = 0; i < T; ++i) {
        rep.insert_steps.push_back(i + 1);
        rep.exact_expectations.push_back(F == 1 ? exact_expected_replay_count(i + 1, T, N)
                                                : exact_expected_replay_count_block(i + 1, T, N, F));
        const double mean = sum[i] / n;
        rep.simulated_means.push_back(mean);
        rep.simulated_stderr.push_back(std::sqrt(std::max(0.0, sumsq[i] / n - mean * mean) / n));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Downward bias of the min of two unbiased critics.

struct BiasEstimate {
    double sigma = 0;
    double v_star = 0;
    double mc_mean_of_min = 0;
    double mc_stderr = 0;
    double analytic_prediction = 0;  // v_star - sigma / sqrt(pi)
};

// Draws (Q1, Q2) i.i.d. Normal(v_star, sigma^2) and estimates
// E[min(Q1, Q2)]. With correlated = true the two draws are identical,
// exercising the no-bias edge where the critics coincide.
inline BiasEstimate clipped_double_q_bias_mc(double v_star, double sigma, long samples, uint64_t seed,
                                             bool correlated = false) {
    if (!(sigma > 0.0)) throw std::invalid_argument("clipped_double_q_bias_mc: sigma must be > 0");
    if (samples < 10000) throw std::invalid_argument("clipped_double_q_bias_mc: need at least 10^4 samples");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(v_star, sigma);
    double s = 0, ssq = 0;
    for (long i = 0; i < samples; ++i) {
        const double q1 = n(rng);
        const double q2 = correlated ? q1 : n(rng);
        const double m = std::min(q1, q2);
        s += m;
        ssq += m * m;
    }
    BiasEstimate e;
    e.sigma = sigma;
    e.v_star = v_star;
    e.mc_mean_of_min = s / samples;
    e.mc_stderr =
        std::sqrt(std::max(0.0, ssq / samples - e.mc_mean_of_min * e.mc_mean_of_min) / static_cast<double>(samples));
    e.analytic_prediction = v_star - sigma / std::sqrt(std::numbers::pi);
    return e;
}

// ---------------------------------------------------------------------------
// Training diagnostics.

// Standard deviation of Q1(s, mu(s)) over probe_size states drawn
// uniformly from the buffer. Reads slots directly; replay counters are
// untouched.
inline double q_std_diagnostic(const Learner& learner, const ReplayBuffer& buffer, size_t probe_size,
                               std::mt19937_64& rng) {
    if (buffer.size() < probe_size) throw std::runtime_error("q_std_diagnostic: insufficient buffer");
    std::uniform_int_distribution<size_t> dist(0, buffer.size() - 1);
    const int sdim = learner.spec().state_dim;
    const int adim = learner.spec().action_dim;
    Matrix states(static_cast<int>(probe_size), sdim);
    for (size_t p = 0; p < probe_size; ++p) {
        const Transition& t = buffer.at(dist(rng));
        for (int i = 0; i < sdim; ++i) states(static_cast<int>(p), i) = t.state[i];
    }
    Matrix a_norm = learner.actor().forward_batch(states);
    Matrix qin(static_cast<int>(probe_size), sdim + adim);
    for (int p = 0; p < static_cast<int>(probe_size); ++p) {
        std::vector<double> norm(adim);
        for (int i = 0; i < adim; ++i) norm[i] = a_norm(p, i);
        const std::vector<double> act = learner.scale_action(norm);
        for (int i = 0; i < sdim; ++i) qin(p, i) = states(p, i);
        for (int i = 0; i < adim; ++i) qin(p, sdim + i) = act[i];
    }
    Matrix q = learner.critic(0).forward_batch(qin);
    double mean = 0;
    for (double v : q.data) mean += v;
    mean /= static_cast<double>(probe_size);
    double var = 0;
    for (double v : q.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(probe_size);
    return std::sqrt(var);
}

// Mean |Q_before - Q_after| of the first critic over fixed (s, a) probe
// pairs, the per-update data-utilization signal.
inline double q_change_diagnostic(const Mlp& critic_before, const Mlp& critic_after,
                                  const Matrix& probe_inputs) {
    if (!critic_before.same_architecture(critic_after))
        throw std::invalid_argument("q_change_diagnostic: snapshot architecture mismatch");
    if (probe_inputs.rows == 0) return 0.0;
    Matrix qb = critic_before.forward_batch(probe_inputs);
    Matrix qa = critic_after.forward_batch(probe_inputs);
    double sum = 0;
    for (int b = 0; b < qb.rows; ++b) sum += std::fabs(qa(b, 0) - qb(b, 0));
    return sum / qb.rows;
}

// Uniform (s, a) probe from the buffer for q_change_diagnostic.
inline Matrix sample_probe_inputs(const ReplayBuffer& buffer, size_t probe_size, int state_dim, int action_dim,
                                  std::mt19937_64& rng) {
    probe_size = std::min(probe_size, buffer.size());
    Matrix probe(static_cast<int>(probe_size), state_dim + action_dim);
    if (probe_size == 0) return probe;
    std::uniform_int_distribution<size_t> dist(0, buffer.size() - 1);
    for (int p = 0; p < static_cast<int>(probe_size); ++p) {
        const Transition& t = buffer.at(dist(rng));
        for (int i = 0; i < state_dim; ++i) probe(p, i) = t.state[i];
        for (int i = 0; i < action_dim; ++i) probe(p, state_dim + i) = t.action[i];
    }
    return probe;
}

}  // namespace rud

#endif
