#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "expplan/core.hpp"
#include "expplan/planning.hpp"
#include "expplan/rng.hpp"

namespace expplan {

enum class noise_kind { truncated_gaussian, uniform, zero, gaussian };

struct noise_model {
    noise_kind kind = noise_kind::truncated_gaussian;
    double sigma = 1.0;
    double bound = 3.0; // B-bar; unused by zero and gaussian

    static noise_model truncated_gaussian(double sigma = 1.0, double bound = 3.0) {
        return {noise_kind::truncated_gaussian, sigma, bound};
    }
    static noise_model uniform(double bound) { return {noise_kind::uniform, 0.0, bound}; }
    static noise_model zero() { return {noise_kind::zero, 0.0, 0.0}; }
    static noise_model gaussian(double sigma = 1.0) { return {noise_kind::gaussian, sigma, 0.0}; }

    bool bounded() const noexcept { return kind != noise_kind::gaussian; }

    void validate() const {
        switch (kind) {
        case noise_kind::truncated_gaussian:
            require(sigma > 0.0 && sigma <= 1.0, "truncated gaussian needs 0 < sigma <= 1");
            require(bound > 0.0, "truncation bound must be positive");
            break;
        case noise_kind::gaussian: require(sigma > 0.0 && sigma <= 1.0, "gaussian needs 0 < sigma <= 1"); break;
        case noise_kind::uniform: require(bound >= 0.0, "uniform noise bound must be non-negative"); break;
        case noise_kind::zero: break;
        }
    }

    // The truncation is symmetric, so the rejection sampler already has mean
    // exactly zero and needs no recentering.
    double draw(stream& s) const {
        switch (kind) {
        case noise_kind::zero: return 0.0;
        case noise_kind::uniform: return bound * (2.0 * s.uniform01() - 1.0);
        case noise_kind::gaussian: return s.normal(0.0, sigma);
        case noise_kind::truncated_gaussian:
            for (;;) {
                const double z = s.normal(0.0, sigma);
                if (std::abs(z) <= bound) return z;
            }
        }
        return 0.0;
    }
};

inline std::string to_string(noise_kind k) {
    switch (k) {
    case noise_kind::truncated_gaussian: return "truncated_gaussian";
    case noise_kind::uniform: return "uniform";
    case noise_kind::zero: return "zero";
    case noise_kind::gaussian: return "gaussian";
    }
    return "?";
}

inline noise_kind noise_kind_from_string(const std::string& s) {
    if (s == "truncated_gaussian") return noise_kind::truncated_gaussian;
    if (s == "uniform") return noise_kind::uniform;
    if (s == "zero") return noise_kind::zero;
    if (s == "gaussian") return noise_kind::gaussian;
    throw config_error("unknown noise kind '" + s + "'");
}

struct environment {
    std::shared_ptr<const function_class> F;
    context_distribution P;
    function_id f_star;
    noise_model noise;
    std::uint64_t seed = 0;

    environment(std::shared_ptr<const function_class> cls, context_distribution dist, function_id star,
                noise_model nm, std::uint64_t s = 0)
        : F(std::move(cls)), P(std::move(dist)), f_star(star), noise(nm), seed(s) {
        require(F != nullptr, "environment needs a function class");
        require(P.size() == F->num_contexts(), "context distribution does not match context space");
        if (f_star >= F->size()) throw index_error("f* index out of range");
        noise.validate();
    }

    double mean_reward(context_id x, action_id a) const { return (*F)(f_star, x, a); }
};

inline context_id sample_context(const environment& env, stream& s) { return env.P.quantile(s.uniform01()); }

inline double sample_reward(const environment& env, context_id x, action_id a, stream& s) {
    return env.F->at(env.f_star, x, a) + env.noise.draw(s);
}

// i.i.d. contexts handed to the planner.
inline std::vector<context_id> draw_offline_contexts(const environment& env, std::size_t m, const stream& root) {
    std::vector<context_id> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto s = root.substream(i + 1, purpose::offline_context);
        out[i] = sample_context(env, s);
    }
    return out;
}

// Deploys a static plan. The plan only ever sees (t, x); rewards are
// recorded but never read back while choosing actions.
inline labeled_dataset run_sampler(const environment& env, const plan& p, const stream& root) {
    labeled_dataset D;
    plan_cursor cur(p);
    const std::size_t na = env.F->num_actions();
    for (std::size_t t = 1; t <= p.horizon; ++t) {
        auto cs = root.substream(t, purpose::context);
        const context_id x = sample_context(env, cs);
        action_id a;
        if (auto chosen = cur.action(x)) {
            a = *chosen;
        } else {
            auto as = root.substream(t, purpose::action);
            a = static_cast<action_id>(as.below(na));
        }
        auto ns = root.substream(t, purpose::noise);
        D.push_back({x, a, sample_reward(env, x, a, ns)});
        cur.advance();
    }
    return D;
}

} // namespace expplan
