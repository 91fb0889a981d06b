#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace ptensor {

/// splitmix64 finalizer; used to derive independent seeds from (seed, salt) pairs.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt = 0) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Platform-independent random source: std::mt19937_64 (fully specified by the
/// standard) seeded with mix_seed(seed), with explicit integer and real
/// mappings instead of the implementation-defined std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi] via modulo reduction (bias below 2^-50 for small ranges).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next() % span);
    }

    /// Uniform double in [lo, hi) from the top 53 bits.
    double uniform_real(double lo, double hi) {
        const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

    /// Fisher-Yates, using index().
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ptensor
