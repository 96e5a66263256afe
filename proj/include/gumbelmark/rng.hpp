#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace gumbelmark {

/// SplitMix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the substream addressed by `path` under `seed`. Streams with
/// different paths are statistically independent; the same path always
/// yields the same stream regardless of execution order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::span<const std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(seed);
    for (auto p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
    return derive_seed(seed, std::span<const std::uint64_t>(path.begin(), path.size()));
}

/// Named stream tags, so call sites read as derive_seed(seed, {tag::null, i}).
namespace tag {
inline constexpr std::uint64_t null_pivots = 1;
inline constexpr std::uint64_t alt_pivots = 2;
inline constexpr std::uint64_t fallback = 3;
inline constexpr std::uint64_t ntp = 4;
inline constexpr std::uint64_t edit = 5;
inline constexpr std::uint64_t permutation = 6;
inline constexpr std::uint64_t key = 7;
inline constexpr std::uint64_t prompt = 8;
inline constexpr std::uint64_t trial = 9;
}  // namespace tag

/// Seeded 64-bit stream with open-interval uniform draws.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t seed) : engine_(mix64(seed)) {}

    static constexpr result_type min() noexcept { return std::mt19937_64::min(); }
    static constexpr result_type max() noexcept { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform on the open interval (0,1), 53-bit resolution.
    double uniform() {
        const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
        return u < 1.0 ? u : 0x1.fffffffffffffp-1;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

private:
    std::mt19937_64 engine_;
};

}  // namespace gumbelmark
