#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lambdacoal {

/// SplitMix64 mixing step. Used as the documented seed-splitting function:
/// replicate r of a run with master seed s is seeded with split_seed(s, tag, r).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed from (master, stream tag, replicate index).
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t replicate) {
    std::uint64_t s = splitmix64(master ^ splitmix64(tag));
    return splitmix64(s ^ splitmix64(replicate + 0x632be59bd9b4e019ull));
}

/// Random stream with samplers implemented on top of mt19937_64 raw output
/// only, so sequences are identical across standard library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0,1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0,1]; safe as argument of log().
    double uniform_pos() { return 1.0 - uniform(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection keeps the distribution exact and the stream portable.
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace lambdacoal
