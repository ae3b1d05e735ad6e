#ifndef RUD_EXPERIMENT_HPP
#define RUD_EXPERIMENT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "rud/config.hpp"
#include "rud/csv.hpp"
#include "rud/train.hpp"

namespace rud {

struct SeedResult {
    uint64_t seed = 0;
    RunLog log;
    bool failed = false;
    std::string error;
};

inline std::string run_label(const ExperimentConfig& cfg) {
    const std::string sched = cfg.scheduler == SchedulerKind::streaming
                                  ? "streaming"
                                  : "regular-F" + std::to_string(cfg.schedule.block_size);
    return cfg.algorithm + "-" + sched;
}

// One full training run for one seed; deterministic in (config, seed).
inline RunLog run_single(const ExperimentConfig& cfg, uint64_t seed, EvalHook hook = nullptr) {
    RngStreams streams(seed);
    auto env = make_environment(cfg.env_id);
    auto eval_env = make_environment(cfg.env_id);
    Learner learner(env->spec(), cfg.agent, streams.init);
    const size_t capacity =
        cfg.replay_capacity ? cfg.replay_capacity : static_cast<size_t>(cfg.schedule.total_steps);
    ReplayBuffer buffer(capacity, make_stream(seed, "sampling")());
    if (cfg.scheduler == SchedulerKind::streaming)
        return train_streaming(learner, *env, *eval_env, buffer, cfg.schedule, streams, std::move(hook),
                               cfg.eval_episodes);
    return train_regular(learner, *env, *eval_env, buffer, cfg.schedule, streams, std::move(hook),
                         cfg.eval_episodes);
}

// Runs every seed (concurrently up to max_jobs) and writes one CSV per
// seed plus an aggregate of mean/std across seeds per evaluation step.
// Returns false if any seed run failed.
inline bool cmd_train(const ExperimentConfig& cfg, std::vector<SeedResult>* out_results = nullptr,
                      unsigned max_jobs = 0) {
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);
    const std::string label = run_label(cfg);
    if (max_jobs == 0) max_jobs = std::max(1u, std::thread::hardware_concurrency());

    std::vector<SeedResult> results(cfg.seeds.size());
    size_t next = 0;
    while (next < cfg.seeds.size()) {
        const size_t wave = std::min<size_t>(max_jobs, cfg.seeds.size() - next);
        std::vector<std::future<SeedResult>> futures;
        for (size_t j = 0; j < wave; ++j) {
            const uint64_t seed = cfg.seeds[next + j];
            futures.push_back(std::async(std::launch::async, [&cfg, seed]() {
                SeedResult r;
                r.seed = seed;
                try {
                    r.log = run_single(cfg, seed);
                } catch (const std::exception& e) {
                    r.failed = true;
                    r.error = e.what();
                }
                return r;
            }));
        }
        for (size_t j = 0; j < wave; ++j) results[next + j] = futures[j].get();
        next += wave;
    }

    bool ok = true;
    for (const SeedResult& r : results) {
        if (r.failed) {
            std::cerr << label << " seed " << r.seed << " failed: " << r.error << "\n";
            ok = false;
            continue;
        }
        r.log.write_csv(cfg.output_dir + "/" + label + "_seed" + std::to_string(r.seed) + ".csv");
    }

    // Aggregate across seeds, computed from the same in-memory doubles the
    // per-seed CSVs serialize losslessly.
    CsvWriter agg(cfg.output_dir + "/" + label + "_aggregate.csv",
                  {"step", "mean_eval_return", "std_eval_return", "num_seeds"});
    size_t num_rows = 0;
    for (const SeedResult& r : results)
        if (!r.failed) num_rows = std::max(num_rows, r.log.rows.size());
    for (size_t i = 0; i < num_rows; ++i) {
        std::vector<double> vals;
        long step = 0;
        for (const SeedResult& r : results) {
            if (r.failed || i >= r.log.rows.size()) continue;
            vals.push_back(r.log.rows[i].eval_return_mean);
            step = r.log.rows[i].step;
        }
        double mean = 0;
        for (double v : vals) mean += v;
        mean /= vals.size();
        double var = 0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var /= vals.size();
        agg.row(step, mean, std::sqrt(var), static_cast<long>(vals.size()));
    }

    if (out_results) *out_results = std::move(results);
    return ok;
}

// F sweep: reruns the experiment per block size and emits one long-format
// CSV. F = 1 is the streaming baseline.
inline bool cmd_sweep_f(const ExperimentConfig& base, const std::vector<long>& f_values, unsigned max_jobs = 0) {
    if (f_values.empty()) throw std::runtime_error("sweep-f: value list is empty");
    std::vector<long> values;
    std::set<long> seen;
    for (long f : f_values) {
        if (!seen.insert(f).second) {
            std::cerr << "sweep-f: duplicate F value " << f << " ignored\n";
            continue;
        }
        values.push_back(f);
    }
    std::filesystem::create_directories(base.output_dir);
    CsvWriter out(base.output_dir + "/sweep_f.csv", {"F", "step", "mean_eval_return", "std_eval_return"});
    bool ok = true;
    for (long f : values) {
        ExperimentConfig cfg = base;
        cfg.schedule.block_size = f;
        cfg.scheduler = f == 1 ? SchedulerKind::streaming : SchedulerKind::regular;
        std::vector<SeedResult> results;
        ok = cmd_train(cfg, &results, max_jobs) && ok;
        size_t num_rows = 0;
        for (const SeedResult& r : results)
            if (!r.failed) num_rows = std::max(num_rows, r.log.rows.size());
        for (size_t i = 0; i < num_rows; ++i) {
            std::vector<double> vals;
            long step = 0;
            for (const SeedResult& r : results) {
                if (r.failed || i >= r.log.rows.size()) continue;
                vals.push_back(r.log.rows[i].eval_return_mean);
                step = r.log.rows[i].step;
            }
            double mean = 0;
            for (double v : vals) mean += v;
            mean /= vals.size();
            double var = 0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= vals.size();
            out.row(f, step, mean, std::sqrt(var));
        }
    }
    return ok;
}

// Plain DDPG (single critic, OU exploration, no smoothing, no delay,
// batch 128) under the streaming and the regularly updated schedule,
// paired per seed.
inline bool cmd_ablate_ddpg(const ExperimentConfig& base, unsigned max_jobs = 0) {
    ExperimentConfig cfg = base;
    cfg.algorithm = "ddpg";
    AgentConfig ddpg = AgentConfig::ddpg_defaults();
    ddpg.gamma = base.agent.gamma;
    ddpg.tau = base.agent.tau;
    ddpg.actor_lr = base.agent.actor_lr;
    ddpg.critic_lr = base.agent.critic_lr;
    ddpg.hidden_sizes = base.agent.hidden_sizes;
    cfg.agent = ddpg;
    cfg.schedule.warmup_steps = std::max<long>(ddpg.batch_size, base.schedule.warmup_steps);

    std::filesystem::create_directories(cfg.output_dir);
    CsvWriter out(cfg.output_dir + "/ablate_ddpg.csv",
                  {"group", "step", "mean_eval_return", "std_eval_return"});
    bool ok = true;
    for (const char* group : {"ddpg-streaming", "ddpg-regular"}) {
        cfg.scheduler =
            std::string(group) == "ddpg-streaming" ? SchedulerKind::streaming : SchedulerKind::regular;
        std::vector<SeedResult> results;
        ok = cmd_train(cfg, &results, max_jobs) && ok;
        size_t num_rows = 0;
        for (const SeedResult& r : results)
            if (!r.failed) num_rows = std::max(num_rows, r.log.rows.size());
        for (size_t i = 0; i < num_rows; ++i) {
            std::vector<double> vals;
            long step = 0;
            for (const SeedResult& r : results) {
                if (r.failed || i >= r.log.rows.size()) continue;
                vals.push_back(r.log.rows[i].eval_return_mean);
                step = r.log.rows[i].step;
            }
            double mean = 0;
            for (double v : vals) mean += v;
            mean /= vals.size();
            double var = 0;
            for (double v : vals) var += (v - mean) * (v - mean);
            var /= vals.size();
            out.row(group, step, mean, std::sqrt(var));
        }
    }
    return ok;
}

}  // namespace rud

#endif
