#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace expplan {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// What a substream is used for. Values are part of the reproducibility
// contract: changing one changes every draw made under it.
enum class purpose : std::uint64_t {
    trial = 1,
    offline_context = 2,
    context = 3,
    action = 4,
    noise = 5,
    f_star = 6,
    tree_descent = 7,
    property = 8,
};

// Counter-based random stream. The n-th output is mix64(key + n * gamma),
// so a stream is fully described by (key, counter). Substreams are keyed by
// hashing labels into the parent key and do not depend on how many values
// the parent has produced, which makes every (trial, t, purpose) draw
// independent of scheduling.
class stream {
public:
    using result_type = std::uint64_t;

    constexpr explicit stream(std::uint64_t key = 0) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * kGamma);
    }

    constexpr stream substream(std::uint64_t label) const noexcept {
        return stream(mix64(mix64(key_ ^ 0xD1B54A32D192ED03ULL) + label * 0xA24BAED4963EE407ULL));
    }

    constexpr stream substream(std::uint64_t index, purpose p) const noexcept {
        return substream(index).substream(static_cast<std::uint64_t>(p));
    }

    constexpr stream substream(purpose p) const noexcept {
        return substream(static_cast<std::uint64_t>(p)).substream(0x5851F42D4C957F2DULL);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(*this);
    }

    double normal(double mean = 0.0, double sigma = 1.0) {
        return std::normal_distribution<double>(mean, sigma)(*this);
    }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace expplan
