#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

#include "expplan/core.hpp"
#include "expplan/modsel.hpp"
#include "expplan/rng.hpp"

namespace expplan {

// Two-dimensional linear rewards f_theta(x, a) = <theta, phi(x, a)> with
// theta restricted to a fan of unit vectors around theta*. In each context
// actions 0 and 1 are the contenders; the direction along which they swap
// order sits at a context-specific angular distance from theta*, spread
// geometrically from tiny to large. Actions 2 and 3 are clearly worse.
// Thresholds close to theta* make the policy-relevant part of the class hard
// to resolve, which keeps the regret of fitted policies strictly positive
// over a wide range of sample sizes. With theta* off-center the fan is
// lopsided, so optimism alone does not land on the right action.
struct linear_fixture_spec {
    std::size_t contexts = 20;
    std::size_t functions = 256;
    double spacing = std::numbers::pi / 512; // angle between neighbouring thetas
    std::size_t star_index = 64;             // position of theta* in the fan; off-center on purpose
    double theta_star = 0.3;
    double contrast = 0.8;   // ||phi(x,0) - phi(x,1)||
    double offset = 0.15;    // common component of actions 0 and 1 along theta*
    double min_gap = 0.004;  // smallest threshold distance (radians)
    double max_gap = 0.5;
    std::uint64_t seed = 3;
};

struct fixture {
    std::shared_ptr<const function_class> F;
    function_id f_star = 0;
};

inline fixture make_linear_fixture(const linear_fixture_spec& s = {}) {
    require(s.contexts >= 2 && s.contexts % 2 == 0, "linear fixture needs an even number of contexts");
    require(s.star_index < s.functions, "theta* must lie inside the fan");
    const std::size_t na = 4, pairs = s.contexts / 2;
    const double h = s.spacing;
    const std::array<double, 2> u{std::cos(s.theta_star), std::sin(s.theta_star)};
    stream rng = stream(s.seed).substream(purpose::property);

    std::vector<std::array<double, 2>> phi(s.contexts * na);
    for (std::size_t x = 0; x < s.contexts; ++x) {
        const double frac = pairs > 1 ? static_cast<double>(x / 2) / static_cast<double>(pairs - 1) : 0.0;
        const double d = s.min_gap * std::pow(s.max_gap / s.min_gap, frac);
        const double side = (x % 2 == 0) ? 1.0 : -1.0;
        const double psi = s.theta_star + side * d - side * std::numbers::pi / 2;
        const std::array<double, 2> w{s.contrast * std::cos(psi), s.contrast * std::sin(psi)};
        const std::array<double, 2> m{s.offset * u[0], s.offset * u[1]};
        phi[x * na + 0] = {m[0] + w[0] / 2, m[1] + w[1] / 2};
        phi[x * na + 1] = {m[0] - w[0] / 2, m[1] - w[1] / 2};
        for (action_id a = 2; a < na; ++a) {
            phi[x * na + a] = {-0.3 * u[0] + rng.normal(0.0, 0.1), -0.3 * u[1] + rng.normal(0.0, 0.1)};
        }
    }

    std::vector<double> values(s.functions * s.contexts * na);
    for (function_id k = 0; k < s.functions; ++k) {
        const double th = s.theta_star + (static_cast<double>(k) - static_cast<double>(s.star_index)) * h;
        const double c = std::cos(th), sn = std::sin(th);
        for (std::size_t i = 0; i < s.contexts * na; ++i) {
            values[k * s.contexts * na + i] = c * phi[i][0] + sn * phi[i][1];
        }
    }
    fixture out;
    out.F = std::make_shared<const function_class>(context_space(registry::numbered(s.contexts, "x")),
                                                   action_space(registry::numbered(na, "a")), std::move(values), 1.0);
    out.f_star = s.star_index;
    return out;
}

// Linear rewards in d dimensions with theta on the corners of a small cube
// around a center: theta = center + (bits - 1/2) h. Function k has bit j
// equal to bit (d-1-j) of k, so the first coordinates are the most
// significant. Nested classes free the first 2, the first 6, and all d bits.
struct nested_fixture_spec {
    std::size_t contexts = 20;
    std::size_t actions = 4;
    std::size_t dim = 10;
    double cube = 0.3;     // h
    double center_norm = 0.5;
    double feature_radius = 0.8;
    double margin = 0.03;  // best-action lead under the center parameter
    std::vector<std::size_t> free_bits{2, 6, 10};
    std::uint64_t seed = 5;
};

struct nested_fixture {
    std::shared_ptr<const function_class> F; // the largest class, every cube corner
    model_family family;
    std::vector<std::vector<function_id>> members; // indices into F per class
};

inline function_id corner_index(std::span<const int> bits) {
    function_id k = 0;
    for (int b : bits) k = 2 * k + static_cast<function_id>(b != 0);
    return k;
}

inline nested_fixture make_nested_fixture(const nested_fixture_spec& s = {}) {
    require(s.dim >= 1 && s.dim <= 16, "nested fixture dimension must lie in [1, 16]");
    require(!s.free_bits.empty(), "nested fixture needs at least one class");
    stream rng = stream(s.seed).substream(purpose::property);
    const std::size_t d = s.dim, nx = s.contexts, na = s.actions;

    std::vector<double> center(d);
    double cn = 0.0;
    for (auto& v : center) {
        v = rng.normal();
        cn += v * v;
    }
    cn = std::sqrt(cn);
    for (auto& v : center) v *= s.center_norm / cn;

    std::vector<double> phi(nx * na * d);
    for (std::size_t i = 0; i < nx * na; ++i) {
        double n = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            phi[i * d + j] = rng.normal();
            n += phi[i * d + j] * phi[i * d + j];
        }
        const double r = s.feature_radius * std::sqrt(0.2 + 0.8 * rng.uniform01());
        for (std::size_t j = 0; j < d; ++j) phi[i * d + j] *= r / std::sqrt(n);
    }
    auto dot_center = [&](std::size_t i) {
        double v = 0.0;
        for (std::size_t j = 0; j < d; ++j) v += phi[i * d + j] * center[j];
        return v;
    };
    for (std::size_t x = 0; x < nx; ++x) {
        std::size_t best = x * na;
        for (std::size_t a = 1; a < na; ++a)
            if (dot_center(x * na + a) > dot_center(best)) best = x * na + a;
        double runner = -1e300;
        for (std::size_t a = 0; a < na; ++a)
            if (x * na + a != best) runner = std::max(runner, dot_center(x * na + a));
        const double need = s.margin - (dot_center(best) - runner);
        if (need > 0) {
            for (std::size_t j = 0; j < d; ++j) phi[best * d + j] += need / s.center_norm * center[j] / s.center_norm;
        }
        double n = 0.0;
        for (std::size_t j = 0; j < d; ++j) n += phi[best * d + j] * phi[best * d + j];
        n = std::sqrt(n);
        if (n > s.feature_radius)
            for (std::size_t j = 0; j < d; ++j) phi[best * d + j] *= s.feature_radius / n;
    }

    const std::size_t nf = std::size_t{1} << d;
    std::vector<double> values(nf * nx * na);
    std::vector<double> theta(d);
    for (function_id k = 0; k < nf; ++k) {
        for (std::size_t j = 0; j < d; ++j) {
            const double bit = static_cast<double>((k >> (d - 1 - j)) & 1u);
            theta[j] = center[j] + (bit - 0.5) * s.cube;
        }
        for (std::size_t i = 0; i < nx * na; ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j < d; ++j) v += theta[j] * phi[i * d + j];
            values[k * nx * na + i] = v;
        }
    }
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, std::abs(v));
    require(peak <= 1.0, "nested fixture values exceed the unit range bound");

    auto F = std::make_shared<const function_class>(context_space(registry::numbered(nx, "x")),
                                                    action_space(registry::numbered(na, "a")), std::move(values), 1.0);
    std::vector<std::vector<function_id>> members;
    std::vector<std::shared_ptr<const function_class>> classes;
    for (std::size_t free : s.free_bits) {
        require(free <= d, "free bit count exceeds dimension");
        std::vector<function_id> ids;
        // Free bits are the leading coordinates, i.e. the high bits of k.
        const std::size_t shift = d - free;
        for (function_id c = 0; c < (std::size_t{1} << free); ++c) ids.push_back(c << shift);
        classes.push_back(std::make_shared<const function_class>(F->subset(ids)));
        members.push_back(std::move(ids));
    }
    return {F, model_family(std::move(classes)), std::move(members)};
}

} // namespace expplan
