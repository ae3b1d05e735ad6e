#ifndef RUD_RNG_HPP
#define RUD_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace rud {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Derives an independent generator from a master seed and a stream label.
// Every consumer of randomness in a run owns one labeled stream, so the
// order in which unrelated components draw cannot perturb each other.
inline std::mt19937_64 make_stream(uint64_t master_seed, std::string_view label) {
    return std::mt19937_64(splitmix64(master_seed ^ fnv1a(label)));
}

// The fixed set of streams a training run uses. Evaluation and diagnostics
// draw from their own streams and never advance the training streams.
struct RngStreams {
    std::mt19937_64 env;
    std::mt19937_64 exploration;
    std::mt19937_64 sampling;
    std::mt19937_64 smoothing;
    std::mt19937_64 eval;
    std::mt19937_64 init;
    std::mt19937_64 diag;

    explicit RngStreams(uint64_t master_seed)
        : env(make_stream(master_seed, "env")),
          exploration(make_stream(master_seed, "exploration")),
          sampling(make_stream(master_seed, "sampling")),
          smoothing(make_stream(master_seed, "smoothing")),
          eval(make_stream(master_seed, "eval")),
          init(make_stream(master_seed, "init")),
          diag(make_stream(master_seed, "diag")) {}
};

}  // namespace rud

#endif
