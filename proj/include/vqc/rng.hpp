#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace vqc {

// All randomness in the library flows through RngStream so that results are a
// pure function of (master seed, stream tag, ordinal). Distributions are
// implemented by hand because the std:: ones are implementation-defined and
// would break the bit-exact determinism contract across toolchains.

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t combine64(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Substream keyed by (master, tag, ordinal); independent of draw order elsewhere.
    static RngStream derive(std::uint64_t master, std::uint64_t tag, std::uint64_t ordinal) {
        return RngStream(combine64(combine64(master, tag), ordinal));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [lo, hi], inclusive, rejection-sampled for exactness.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = n * (UINT64_MAX / n);
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % n;
    }

    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// +1 or -1 with equal probability.
    double sign() { return (next_u64() & 1ULL) ? 1.0 : -1.0; }

    bool bernoulli(double p) { return next_double() < p; }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = 1.0 - next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle driven by an explicit stream.
template <typename T>
void shuffle(std::vector<T>& items, RngStream& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = rng.uniform_index(i);
        std::swap(items[i - 1], items[j]);
    }
}

/// Index of the first cumulative weight exceeding u; cumulative must end >= u.
inline std::size_t sample_cdf(std::span<const double> cumulative, double u) {
    std::size_t lo = 0;
    std::size_t hi = cumulative.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (cumulative[mid] <= u) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    return lo < cumulative.size() ? lo : cumulative.size() - 1;
}

// Stream tags. Keeping them in one place guarantees two subsystems never
// collide on the same derived stream.
inline constexpr std::uint64_t kStreamEval = 1;
inline constexpr std::uint64_t kStreamShuffle = 2;
inline constexpr std::uint64_t kStreamSpsaDirections = 3;
inline constexpr std::uint64_t kStreamInit = 4;
inline constexpr std::uint64_t kStreamDatagen = 5;
inline constexpr std::uint64_t kStreamSplit = 6;

} // namespace vqc
