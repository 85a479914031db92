#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "tabletask/util.hpp"

namespace tabletask {

/// Seeded random source with fully reproducible output. The mt19937_64
/// engine is specified by the standard; the bounded draws below avoid
/// std distributions, whose sequences are implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    /// Uniform in [0, n). Rejection sampling, so no modulo bias.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        uint64_t mask = ~uint64_t{0};
        uint64_t limit = mask - mask % n;
        for (;;) {
            uint64_t v = eng_();
            if (v < limit) return v % n;
        }
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    /// Uniform in [lo, hi], inclusive.
    uint64_t between(uint64_t lo, uint64_t hi) { return lo + below(hi - lo + 1); }

    double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[index(v.size())];
    }

    /// n distinct indices from [0, pool), in shuffled order.
    std::vector<std::size_t> sample_indices(std::size_t pool, std::size_t n) {
        std::vector<std::size_t> idx(pool);
        for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
        shuffle(idx);
        idx.resize(n);
        return idx;
    }

private:
    std::mt19937_64 eng_;
};

/// Per-instance seed derivation: parallel workers get identical streams no
/// matter how work is scheduled.
inline uint64_t derive_seed(uint64_t global_seed, std::string_view digest, std::string_view label) {
    uint64_t h = fnv1a64(digest);
    h = fnv1a64(label, h ^ 0x9e3779b97f4a7c15ULL);
    h ^= global_seed + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    // splitmix64 finalizer to spread low-entropy seeds
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

} // namespace tabletask
