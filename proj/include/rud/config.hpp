#ifndef RUD_CONFIG_HPP
#define RUD_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rud/agent.hpp"

namespace rud {

// Flat key = value config with dotted section keys. Unknown keys are hard
// errors so a misspelled hyperparameter cannot silently fall back to a
// default.
class KeyValueConfig {
  public:
    static KeyValueConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str());
    }

    static KeyValueConfig parse_string(const std::string& text) {
        KeyValueConfig cfg;
        std::stringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config: line " + std::to_string(lineno) + " is not key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw std::runtime_error("config: empty key on line " + std::to_string(lineno));
            cfg.values_[key] = value;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& def) {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        consumed_.insert(key);
        return it->second;
    }
    double get_double(const std::string& key, double def) {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        consumed_.insert(key);
        try {
            return std::stod(it->second);
        } catch (...) {
            throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
        }
    }
    long get_long(const std::string& key, long def) {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        consumed_.insert(key);
        try {
            return std::stol(it->second);
        } catch (...) {
            throw std::runtime_error("config: key '" + key + "' is not an integer: " + it->second);
        }
    }
    bool get_bool(const std::string& key, bool def) {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        consumed_.insert(key);
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw std::runtime_error("config: key '" + key + "' is not a boolean: " + it->second);
    }
    template <typename T>
    std::vector<T> get_list(const std::string& key, const std::vector<T>& def) {
        auto it = values_.find(key);
        if (it == values_.end()) return def;
        consumed_.insert(key);
        std::vector<T> out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            if constexpr (std::is_integral_v<T>)
                out.push_back(static_cast<T>(std::stoll(tok)));
            else
                out.push_back(static_cast<T>(std::stod(tok)));
        }
        return out;
    }

    // Call after all reads: any key never consumed is unknown.
    void reject_unknown_keys() const {
        for (const auto& [key, value] : values_)
            if (consumed_.count(key) == 0) throw std::runtime_error("config: unknown key '" + key + "'");
    }

  private:
    static std::string trim(const std::string& s) {
        const size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
};

enum class SchedulerKind { streaming, regular };

struct ExperimentConfig {
    std::string env_id = "pendulum";
    std::string algorithm = "td3";  // "ddpg" | "td3"
    SchedulerKind scheduler = SchedulerKind::regular;
    Schedule schedule;
    std::vector<uint64_t> seeds = {0, 1, 2, 3, 4};
    AgentConfig agent;
    int eval_episodes = 10;
    size_t replay_capacity = 0;  // 0: equal to total_steps
    std::string output_dir = "runs";

    void validate() const {
        if (algorithm != "ddpg" && algorithm != "td3")
            throw std::runtime_error("config: algorithm must be ddpg or td3, got '" + algorithm + "'");
        if (seeds.empty()) throw std::runtime_error("config: seeds must be nonempty");
        if (eval_episodes < 1) throw std::runtime_error("config: eval_episodes must be >= 1");
        agent.validate();
        schedule.validate(agent.batch_size);
    }

    static ExperimentConfig from_file(const std::string& path) {
        KeyValueConfig kv = KeyValueConfig::parse_file(path);
        return from_kv(kv);
    }

    static ExperimentConfig from_kv(KeyValueConfig& kv) {
        ExperimentConfig c;
        c.env_id = kv.get_string("env", c.env_id);
        c.algorithm = kv.get_string("algorithm", c.algorithm);
        if (c.algorithm == "ddpg") c.agent = AgentConfig::ddpg_defaults();
        const std::string sched = kv.get_string("scheduler", "regular");
        if (sched == "streaming")
            c.scheduler = SchedulerKind::streaming;
        else if (sched == "regular")
            c.scheduler = SchedulerKind::regular;
        else
            throw std::runtime_error("config: scheduler must be streaming or regular, got '" + sched + "'");

        c.schedule.total_steps = kv.get_long("run.total_steps", c.schedule.total_steps);
        c.schedule.block_size = kv.get_long("run.block_size", 250);
        c.schedule.eval_interval = kv.get_long("run.eval_interval", c.schedule.eval_interval);
        c.eval_episodes = static_cast<int>(kv.get_long("run.eval_episodes", c.eval_episodes));
        c.seeds = kv.get_list<uint64_t>("run.seeds", c.seeds);
        c.output_dir = kv.get_string("run.output_dir", c.output_dir);
        c.replay_capacity = static_cast<size_t>(kv.get_long("replay.capacity", 0));

        AgentConfig& a = c.agent;
        a.gamma = kv.get_double("agent.gamma", a.gamma);
        a.tau = kv.get_double("agent.tau", a.tau);
        a.batch_size = static_cast<int>(kv.get_long("agent.batch_size", a.batch_size));
        a.actor_lr = kv.get_double("agent.actor_lr", a.actor_lr);
        a.critic_lr = kv.get_double("agent.critic_lr", a.critic_lr);
        a.exploration_noise_sigma = kv.get_double("agent.exploration_noise_sigma", a.exploration_noise_sigma);
        a.target_policy_noise_sigma =
            kv.get_double("agent.target_policy_noise_sigma", a.target_policy_noise_sigma);
        a.target_noise_clip = kv.get_double("agent.target_noise_clip", a.target_noise_clip);
        a.policy_delay = static_cast<int>(kv.get_long("agent.policy_delay", a.policy_delay));
        a.use_clipped_double_q = kv.get_bool("agent.use_clipped_double_q", a.use_clipped_double_q);
        a.use_target_policy_smoothing =
            kv.get_bool("agent.use_target_policy_smoothing", a.use_target_policy_smoothing);
        const std::string expl =
            kv.get_string("agent.exploration_type",
                          a.exploration_type == ExplorationType::gaussian ? "gaussian" : "ornstein_uhlenbeck");
        if (expl == "gaussian")
            a.exploration_type = ExplorationType::gaussian;
        else if (expl == "ornstein_uhlenbeck")
            a.exploration_type = ExplorationType::ornstein_uhlenbeck;
        else
            throw std::runtime_error("config: agent.exploration_type must be gaussian or ornstein_uhlenbeck");
        a.hidden_sizes = kv.get_list<int>("agent.hidden_sizes", a.hidden_sizes);
        a.ou_theta = kv.get_double("agent.ou_theta", a.ou_theta);
        a.ou_sigma = kv.get_double("agent.ou_sigma", a.ou_sigma);
        a.ou_dt = kv.get_double("agent.ou_dt", a.ou_dt);

        c.schedule.warmup_steps = kv.get_long("run.warmup_steps", std::max<long>(a.batch_size, 1000));

        kv.reject_unknown_keys();
        c.validate();
        return c;
    }
};

}  // namespace rud

#endif
