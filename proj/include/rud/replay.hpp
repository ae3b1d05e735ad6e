#ifndef RUD_REPLAY_HPP
#define RUD_REPLAY_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rud {

struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;  // terminal, not truncation
    long insert_step = 0;
};

// Fixed-capacity ring store with uniform without-replacement mini-batch
// sampling and a per-slot replay counter. The counters are the measured
// quantity behind the replay-count analyses, so their conservation
// (sum of live counters + counters lost to eviction == batch size times
// number of sample calls) is checked on every sample.
class ReplayBuffer {
  public:
    ReplayBuffer(size_t capacity, uint64_t seed) : capacity_(capacity), rng_(seed) {
        if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
        slots_.resize(capacity);
        counts_.assign(capacity, 0);
        stamps_.assign(capacity, 0);
    }

    size_t capacity() const { return capacity_; }
    size_t size() const { return size_; }
    long sample_calls() const { return sample_calls_; }
    long total_drawn() const { return total_drawn_; }

    size_t insert(Transition t) {
        const size_t slot = cursor_;
        t.insert_step = ++insert_counter_;
        if (size_ == capacity_) {
            evicted_drawn_ += counts_[slot];
            live_sum_ -= counts_[slot];
        }
        counts_[slot] = 0;
        slots_[slot] = std::move(t);
        cursor_ = (cursor_ + 1) % capacity_;
        if (size_ < capacity_) ++size_;
        return slot;
    }

    const Transition& at(size_t slot) const { return slots_[slot]; }
    long replay_count(size_t slot) const { return counts_[slot]; }

    // Draws n distinct occupied slots uniformly (Floyd's algorithm) and
    // increments their replay counters.
    std::vector<size_t> sample_indices(size_t n) {
        if (size_ < n) throw std::runtime_error("ReplayBuffer::sample: insufficient data");
        ++epoch_;
        std::vector<size_t> picked;
        picked.reserve(n);
        for (size_t j = size_ - n; j < size_; ++j) {
            std::uniform_int_distribution<size_t> dist(0, j);
            const size_t t = dist(rng_);
            if (stamps_[t] == epoch_) {
                stamps_[j] = epoch_;
                picked.push_back(j);
            } else {
                stamps_[t] = epoch_;
                picked.push_back(t);
            }
        }
        for (size_t s : picked) ++counts_[s];
        ++sample_calls_;
        total_drawn_ += static_cast<long>(n);
        live_sum_ += static_cast<long>(n);
        if (live_sum_ + evicted_drawn_ != total_drawn_)
            throw std::logic_error("ReplayBuffer: replay counter conservation violated");
        if (sample_calls_ % 1024 == 0) verify_conservation();
        return picked;
    }

    // Full recount of the conservation invariant.
    void verify_conservation() const {
        long sum = 0;
        for (size_t i = 0; i < size_; ++i) sum += counts_[i];
        if (sum != live_sum_ || sum + evicted_drawn_ != total_drawn_)
            throw std::logic_error("ReplayBuffer: replay counter conservation violated");
    }

    // Live counters keyed by insert step.
    std::vector<std::pair<long, long>> replay_count_snapshot() const {
        verify_conservation();
        std::vector<std::pair<long, long>> out;
        out.reserve(size_);
        for (size_t i = 0; i < size_; ++i) out.emplace_back(slots_[i].insert_step, counts_[i]);
        std::sort(out.begin(), out.end());
        return out;
    }

    void write_snapshot_csv(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("ReplayBuffer: cannot open " + path);
        f << "insert_step,replay_count\n";
        for (const auto& [step, count] : replay_count_snapshot()) f << step << "," << count << "\n";
    }

  private:
    size_t capacity_;
    std::vector<Transition> slots_;
    std::vector<long> counts_;
    std::vector<uint64_t> stamps_;
    uint64_t epoch_ = 0;
    size_t size_ = 0;
    size_t cursor_ = 0;
    long insert_counter_ = 0;
    long sample_calls_ = 0;
    long total_drawn_ = 0;
    long evicted_drawn_ = 0;
    long live_sum_ = 0;
    std::mt19937_64 rng_;
};

}  // namespace rud

#endif
