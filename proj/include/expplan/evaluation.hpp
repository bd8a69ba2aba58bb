#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "expplan/core.hpp"
#include "expplan/environment.hpp"
#include "expplan/regression.hpp"

namespace expplan {

struct regret_report {
    double policy_value = 0.0;
    double optimal_value = 0.0;
    double simple_regret = 0.0;
};

// Indices f with ||f - center||^2 <= beta^2, read off a pairwise-norm row.
inline std::vector<function_id> confidence_ball(const pairwise_sq_norms& M, function_id center, double beta) {
    std::vector<function_id> ball;
    const double b2 = beta * beta;
    auto row = M.row(center);
    for (function_id f = 0; f < row.size(); ++f)
        if (row[f] <= b2) ball.push_back(f);
    return ball;
}

// argmax_a of max_{f in ball} f(x, a); lowest action on ties.
inline action_id optimistic_action_in_ball(const function_class& F, std::span<const function_id> ball, context_id x) {
    std::vector<double> best(F.num_actions(), -std::numeric_limits<double>::infinity());
    for (function_id f : ball) {
        auto r = F.row(f, x);
        for (action_id a = 0; a < r.size(); ++a) best[a] = std::max(best[a], r[a]);
    }
    return static_cast<action_id>(std::max_element(best.begin(), best.end()) - best.begin());
}

// Brute-force optimistic action: the ball is built by direct data-norm sums.
inline action_id optimistic_action(const function_class& F, function_id f_hat, std::span<const sample> D, double beta,
                                   context_id x) {
    require(beta >= 0.0, "beta must be non-negative");
    F.at(f_hat, x, 0);
    std::vector<function_id> ball;
    for (function_id f = 0; f < F.size(); ++f) {
        const double n = data_norm(F, f, f_hat, D);
        if (n * n <= beta * beta) ball.push_back(f);
    }
    return optimistic_action_in_ball(F, ball, x);
}

inline deterministic_policy optimistic_policy(const function_class& F, std::span<const function_id> ball) {
    std::vector<action_id> table(F.num_contexts());
    for (context_id x = 0; x < F.num_contexts(); ++x) table[x] = optimistic_action_in_ball(F, ball, x);
    return deterministic_policy(std::move(table));
}

// Mixture of the T optimistic policies, one per prefix of the sampled data.
// Members are materialized as context tables.
inline mixture_policy extract_eluder_policy(const function_class& F, const labeled_dataset& sampled,
                                            const confidence_config& cfg) {
    require(!sampled.empty(), "cannot extract a policy from an empty dataset");
    cfg.validate();
    squared_loss_tracker losses(F);
    pairwise_sq_norms M(F.size());
    std::vector<deterministic_policy> members;
    members.reserve(sampled.size());
    std::vector<function_id> last_ball;
    for (std::size_t t = 1; t <= sampled.size(); ++t) {
        // State here reflects prefix(t), the first t-1 samples.
        const function_id f_hat = losses.argmin();
        const double beta = confidence_radius(cfg, t, F.size());
        auto ball = confidence_ball(M, f_hat, beta);
        if (members.empty() || ball != last_ball) {
            members.push_back(optimistic_policy(F, ball));
            last_ball = std::move(ball);
        } else {
            members.push_back(members.back());
        }
        const auto& s = sampled[t - 1];
        losses.add(s);
        M.add(F, s.context, s.action);
    }
    return mixture_policy(std::move(members));
}

inline deterministic_policy extract_greedy_policy(const function_class& F, const labeled_dataset& sampled) {
    return greedy_policy(F, least_squares(F, sampled));
}

inline regret_report simple_regret(const deterministic_policy& pi, const environment& env) {
    regret_report r;
    r.optimal_value = optimal_value(*env.F, env.f_star, env.P);
    r.policy_value = policy_value(pi, *env.F, env.f_star, env.P);
    r.simple_regret = r.optimal_value - r.policy_value;
    return r;
}

inline regret_report simple_regret(const mixture_policy& pi, const environment& env) {
    regret_report r;
    r.optimal_value = optimal_value(*env.F, env.f_star, env.P);
    r.policy_value = mixture_value(pi, *env.F, env.f_star, env.P);
    r.simple_regret = r.optimal_value - r.policy_value;
    return r;
}

} // namespace expplan
