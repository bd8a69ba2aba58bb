#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "expplan/core.hpp"

namespace expplan {

struct confidence_config {
    double delta = 0.1;
    double c_bar = 1.0;
    double range_bound = 1.0; // B
    double noise_bound = 1.0; // B-bar

    void validate() const {
        require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
        require(c_bar > 0.0 && std::isfinite(c_bar), "c_bar must be positive");
        require(range_bound >= 0.0 && noise_bound >= 0.0, "range and noise bounds must be non-negative");
    }
};

struct calibration_constants {
    double c_eluder = 1.0;
    double c_uniform = 1.0;
    double c_modsel = 1.0;

    void validate() const {
        require(c_eluder > 0.0 && c_uniform > 0.0 && c_modsel > 0.0, "calibration constants must be positive");
    }
};

// beta(t) = c_bar (B + B-bar) sqrt(ln(|F| t / delta)).
inline double confidence_radius(const confidence_config& cfg, std::uint64_t t, std::size_t class_size) {
    cfg.validate();
    require(t >= 1 && class_size >= 1, "confidence radius needs t >= 1 and |F| >= 1");
    const double arg = static_cast<double>(class_size) * static_cast<double>(t) / cfg.delta;
    return cfg.c_bar * (cfg.range_bound + cfg.noise_bound) * std::sqrt(std::log(arg));
}

// Empirical squared loss of f on a set of samples.
inline double squared_loss(const function_class& F, function_id f, std::span<const sample> records) {
    double loss = 0.0;
    for (const auto& s : records) {
        const double d = F(f, s.context, s.action) - s.reward;
        loss += d * d;
    }
    return loss;
}

inline function_id argmin_lowest(std::span<const double> v) {
    return static_cast<function_id>(std::min_element(v.begin(), v.end()) - v.begin());
}

// Brute-force least squares over the class; lowest index on ties.
inline function_id least_squares(const function_class& F, std::span<const sample> records) {
    function_id best = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (function_id f = 0; f < F.size(); ++f) {
        const double l = squared_loss(F, f, records);
        if (l < best_loss) {
            best_loss = l;
            best = f;
        }
    }
    return best;
}

inline function_id least_squares(const function_class& F, const labeled_dataset& D) {
    return least_squares(F, D.records());
}

// Running per-function squared losses, so that the least-squares fit of
// every prefix costs O(|F|) per appended sample.
class squared_loss_tracker {
public:
    explicit squared_loss_tracker(const function_class& F) : F_(&F), loss_(F.size(), 0.0) {}

    void add(const sample& s) {
        const std::size_t na = F_->num_actions();
        const std::size_t stride = F_->num_contexts() * na;
        const double* col = F_->values().data() + s.context * na + s.action;
        for (std::size_t f = 0; f < loss_.size(); ++f) {
            const double d = col[f * stride] - s.reward;
            loss_[f] += d * d;
        }
    }

    function_id argmin() const { return argmin_lowest(loss_); }
    const std::vector<double>& losses() const noexcept { return loss_; }

private:
    const function_class* F_;
    std::vector<double> loss_;
};

// Smallest T with T >= c max(B, B-bar)^2 |A| ln(|F| / (eps delta)) / eps^2.
inline std::uint64_t required_samples_uniform(const confidence_config& cfg, const calibration_constants& k,
                                              std::size_t class_size, std::size_t n_actions, double eps) {
    cfg.validate();
    k.validate();
    require(eps > 0.0, "eps must be positive");
    const double m = std::max(cfg.range_bound, cfg.noise_bound);
    const double rhs = k.c_uniform * m * m * static_cast<double>(n_actions) *
                       std::log(static_cast<double>(class_size) / (eps * cfg.delta)) / (eps * eps);
    if (rhs <= 1.0) return 1;
    return static_cast<std::uint64_t>(std::ceil(rhs));
}

inline constexpr std::uint64_t kSampleCap = std::uint64_t{1} << 40;

// Smallest T with T >= c max(B, B-bar, 1)^2 d(T) ln(|F| T / delta) / eps^2,
// located by doubling and then bisection.
inline std::uint64_t required_samples_eluder(const confidence_config& cfg, const calibration_constants& k,
                                             std::size_t class_size, const std::function<double(std::uint64_t)>& d_fn,
                                             double eps) {
    cfg.validate();
    k.validate();
    require(eps > 0.0, "eps must be positive");
    const double m = std::max({cfg.range_bound, cfg.noise_bound, 1.0});
    auto ok = [&](std::uint64_t T) {
        const double rhs = k.c_eluder * m * m * d_fn(T) *
                           std::log(static_cast<double>(class_size) * static_cast<double>(T) / cfg.delta) / (eps * eps);
        return static_cast<double>(T) >= rhs;
    };
    if (ok(1)) return 1;
    std::uint64_t hi = 2;
    while (!ok(hi)) {
        if (hi >= kSampleCap) throw unsatisfiable_error("no sample size up to 2^40 satisfies the eluder bound");
        hi *= 2;
    }
    // ok(lo) is false, ok(hi) is true.
    std::uint64_t lo = hi / 2;
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (ok(mid)) hi = mid; else lo = mid;
    }
    return hi;
}

} // namespace expplan
