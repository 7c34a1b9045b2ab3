#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>

namespace surveykit {

/// Neumaier-compensated running sum. Merging two accumulators is exact up to
/// the final rounding, so partitioned reductions agree with a serial pass.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }

    void merge(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }

    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

[[nodiscard]] inline double compensated_sum(std::span<const double> values) noexcept {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

[[nodiscard]] inline double compensated_mean(std::span<const double> values) noexcept {
    return compensated_sum(values) / static_cast<double>(values.size());
}

/// SplitMix64. Used directly as a cheap per-replicate generator and to derive
/// independent substream seeds from (seed, index).
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

[[nodiscard]] inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    SplitMix64 a(seed);
    SplitMix64 b(a() ^ (index * 0xD1B54A32D192ED03ULL));
    return b();
}

/// Uniform double in [0, 1) from the top 53 bits.
template <class Engine>
[[nodiscard]] double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Unbiased integer in [0, bound) by rejection (bound > 0).
template <class Engine>
[[nodiscard]] std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = eng();
    } while (r >= limit);
    return r % bound;
}

/// Binomial coefficient, saturating at UINT64_MAX.
[[nodiscard]] inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // result * (n - k + i) / i is exact; cancel the common factor first.
        const std::uint64_t g = std::gcd(result, i);
        const std::uint64_t factor = (n - k + i) / (i / g);
        result /= g;
        if (result > kMax / factor) return kMax;
        result *= factor;
    }
    return result;
}

[[nodiscard]] inline bool relative_close(double a, double b, double rel) noexcept {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace surveykit
