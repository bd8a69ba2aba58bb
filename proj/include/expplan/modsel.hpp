#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "expplan/core.hpp"
#include "expplan/environment.hpp"
#include "expplan/evaluation.hpp"
#include "expplan/regression.hpp"

namespace expplan {

struct model_family {
    std::vector<std::shared_ptr<const function_class>> classes;
    std::optional<std::size_t> true_index; // fixtures only

    explicit model_family(std::vector<std::shared_ptr<const function_class>> cs, std::optional<std::size_t> hint = {})
        : classes(std::move(cs)), true_index(hint) {
        require(!classes.empty(), "model family needs at least one class");
        for (const auto& c : classes) {
            require(c != nullptr, "null class in model family");
            require(c->same_spaces(*classes.front()), "model family classes must share context and action spaces");
            require(c->range_bound() == classes.front()->range_bound(), "model family classes must share B");
        }
        if (true_index) require(*true_index < classes.size(), "true index out of range");
    }

    std::size_t size() const noexcept { return classes.size(); }
    const function_class& operator[](std::size_t i) const { return *classes.at(i); }
};

inline std::pair<labeled_dataset, labeled_dataset> split_dataset(const labeled_dataset& D) {
    require(D.size() >= 2, "split needs at least two records");
    const std::size_t h = D.size() / 2;
    auto r = D.records();
    return {labeled_dataset({r.begin(), r.begin() + h}), labeled_dataset({r.begin() + h, r.end()})};
}

inline std::vector<function_id> fit_all(const model_family& fam, const labeled_dataset& train) {
    std::vector<function_id> fits;
    fits.reserve(fam.size());
    for (const auto& c : fam.classes) fits.push_back(least_squares(*c, train));
    return fits;
}

inline std::vector<double> test_losses(const model_family& fam, std::span<const function_id> fits,
                                       const labeled_dataset& test) {
    require(fits.size() == fam.size(), "fits do not align with the family");
    std::vector<double> out;
    for (std::size_t i = 0; i < fam.size(); ++i) out.push_back(squared_loss(fam[i], fits[i], test.records()));
    return out;
}

// argmin_i of the raw test squared loss; lowest i on ties.
inline std::size_t select_index(const model_family& fam, std::span<const function_id> fits,
                                const labeled_dataset& test) {
    const auto l = test_losses(fam, fits, test);
    return argmin_lowest(l);
}

// The selector for a known eps: smallest i whose uniform sample size is met by T.
inline std::size_t select_index_known_eps(const model_family& fam, const confidence_config& cfg,
                                          const calibration_constants& k, double eps, std::uint64_t T) {
    for (std::size_t i = 0; i < fam.size(); ++i) {
        if (T >= required_samples_uniform(cfg, k, fam[i].size(), fam[i].num_actions(), eps)) return i;
    }
    throw unsatisfiable_error("no class in the family is covered by T = " + std::to_string(T) + " samples");
}

// E_{x~P, a~Unif(A)} (f*(x,a) - f(x,a))^2, computed exactly.
inline double population_loss(const function_class& Fc, function_id f, const environment& env) {
    require(Fc.same_spaces(*env.F), "class and environment spaces differ");
    const std::size_t na = Fc.num_actions();
    double total = 0.0;
    for (context_id x = 0; x < Fc.num_contexts(); ++x) {
        double s = 0.0;
        for (action_id a = 0; a < na; ++a) {
            const double d = env.mean_reward(x, a) - Fc(f, x, a);
            s += d * d;
        }
        total += env.P[x] * s / static_cast<double>(na);
    }
    return total;
}

struct modsel_result {
    deterministic_policy policy;
    std::size_t selected = 0;
    std::vector<function_id> fits;
    std::vector<double> test_losses;
    double population_loss = 0.0;
    regret_report regret;
};

inline modsel_result modsel_from_data(const model_family& fam, const environment& env, const labeled_dataset& D) {
    require(fam[0].same_spaces(*env.F), "family and environment spaces differ");
    auto [train, test] = split_dataset(D);
    modsel_result r;
    r.fits = fit_all(fam, train);
    r.test_losses = test_losses(fam, r.fits, test);
    r.selected = argmin_lowest(r.test_losses);
    const auto& cls = fam[r.selected];
    r.policy = greedy_policy(cls, r.fits[r.selected]);
    r.population_loss = population_loss(cls, r.fits[r.selected], env);
    r.regret = simple_regret(r.policy, env);
    return r;
}

// Uniform sampling for T steps, split, fit every class, select, act greedily.
inline modsel_result modsel_pipeline(const model_family& fam, const environment& env, std::size_t T,
                                     const stream& root) {
    require(T >= 2, "model selection needs T >= 2");
    return modsel_from_data(fam, env, run_sampler(env, uniform_plan(T), root));
}

struct single_class_result {
    function_id fit = 0;
    deterministic_policy policy;
    double population_loss = 0.0;
    regret_report regret;
};

// Plain uniform strategy on one class using all of D.
inline single_class_result uniform_strategy(const function_class& cls, const environment& env,
                                            const labeled_dataset& D) {
    single_class_result r;
    r.fit = least_squares(cls, D);
    r.policy = greedy_policy(cls, r.fit);
    r.population_loss = population_loss(cls, r.fit, env);
    r.regret = simple_regret(r.policy, env);
    return r;
}

// Reference pipeline told the true class index. It draws the same T samples
// and fits on the same training half, so the only difference from
// modsel_pipeline is that the test half is not needed to pick the class.
inline single_class_result oracle_pipeline(const model_family& fam, std::size_t i_star, const environment& env,
                                           std::size_t T, const stream& root) {
    require(T >= 2, "model selection needs T >= 2");
    require(i_star < fam.size(), "true index out of range");
    return uniform_strategy(fam[i_star], env, split_dataset(run_sampler(env, uniform_plan(T), root)).first);
}

// Upper envelope C max(B, noise)^2 ln(T max(M, |F_i|) / delta) / T for the
// population loss of the selected model.
inline double modsel_envelope(const model_family& fam, std::size_t i, const confidence_config& cfg,
                              const calibration_constants& k, std::size_t T) {
    require(T >= 1, "T must be at least 1");
    cfg.validate();
    const double m = std::max(cfg.range_bound, cfg.noise_bound);
    const double n = static_cast<double>(std::max(fam.size(), fam[i].size()));
    return k.c_modsel * m * m * std::log(static_cast<double>(T) * n / cfg.delta) / static_cast<double>(T);
}

} // namespace expplan
