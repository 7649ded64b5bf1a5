#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace tabgap {

// All randomness in the toolkit flows through this header so that seeded
// runs are bit-reproducible across platforms and thread counts. The
// generator is std::mt19937_64, whose output sequence is mandated by the
// C++ standard. Bounded draws and floating-point draws are implemented
// here instead of <random> distributions, whose mappings are
// implementation-defined.

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a hash of a byte string, used to derive per-name RNG streams.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Sub-stream seed derivation: mixes the study seed, a stream tag (for
/// example the hash of a feature name) and an index (for example the
/// bootstrap resample number). Stated contract: substreams are independent
/// of evaluation order, so parallel loops reproduce sequential output.
constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t index) noexcept {
    return splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ (index + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t u64() { return gen_(); }

    /// Draw from [0, n) via 128-bit multiply-shift.
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(gen_()) * static_cast<unsigned __int128>(n)) >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; consumes exactly two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 == 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Fisher-Yates permutation of {0, ..., n-1}.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            std::swap(p[i - 1], p[below(i)]);
        }
        return p;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace tabgap
