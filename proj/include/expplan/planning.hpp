#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "expplan/core.hpp"
#include "expplan/regression.hpp"

namespace expplan {

// eluder: pi_t is the uncertainty-maximizing policy of the planner data D_t.
// uniform: every pi_t is Uniform(A); the sampler draws the action.
// fixed: pi_t plays a fixed action at every context (round-robin baselines).
enum class plan_kind { eluder, uniform, fixed };

struct plan {
    plan_kind kind = plan_kind::uniform;
    std::size_t horizon = 0;
    confidence_config confidence;
    unlabeled_dataset planner_dataset;
    std::vector<action_id> fixed_actions;
    std::shared_ptr<const function_class> F; // required for eluder plans
};

// omega(x, a, D) with D summarized by its pairwise squared norms: the largest
// f(x,a) - g(x,a) over ordered pairs with ||f - g||_D <= radius.
// Feasibility is tested on squares, ||f - g||_D^2 <= radius^2.
inline std::vector<double> uncertainty_radii(const function_class& F, context_id x, const pairwise_sq_norms& M,
                                             double radius) {
    const std::size_t n = F.size(), na = F.num_actions();
    std::vector<double> omega(na, 0.0);
    const double r2 = radius * radius;
    if (M.max_entry() <= r2) {
        for (action_id a = 0; a < na; ++a) {
            double lo = F(0, x, a), hi = lo;
            for (function_id f = 1; f < n; ++f) {
                lo = std::min(lo, F(f, x, a));
                hi = std::max(hi, F(f, x, a));
            }
            omega[a] = hi - lo;
        }
        return omega;
    }
    for (function_id f = 0; f < n; ++f) {
        auto rf = F.row(f, x);
        auto mf = M.row(f);
        for (function_id g = f + 1; g < n; ++g) {
            if (mf[g] > r2) continue;
            auto rg = F.row(g, x);
            for (action_id a = 0; a < na; ++a) omega[a] = std::max(omega[a], std::abs(rf[a] - rg[a]));
        }
    }
    return omega;
}

// Brute-force omega straight from the dataset.
inline double uncertainty_radius(const function_class& F, context_id x, action_id a, std::span<const query> D,
                                 double radius) {
    require(radius >= 0.0, "radius must be non-negative");
    F.at(0, x, a);
    const auto M = pairwise_sq_norms::from_records<query>(F, D);
    const double r2 = radius * radius;
    double best = 0.0;
    for (function_id f = 0; f < F.size(); ++f)
        for (function_id g = 0; g < F.size(); ++g)
            if (M(f, g) <= r2) best = std::max(best, F(f, x, a) - F(g, x, a));
    return best;
}

inline action_id argmax_lowest(std::span<const double> v) {
    return static_cast<action_id>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Steps through a plan's policies in order without recomputing prefixes.
class plan_cursor {
public:
    explicit plan_cursor(const plan& p) : plan_(&p) {
        if (p.kind == plan_kind::eluder) {
            require(p.F != nullptr, "eluder plan has no function class");
            M_ = pairwise_sq_norms(p.F->size());
        }
    }

    std::size_t step() const noexcept { return t_; }

    // Action of pi_t at x; nullopt means "draw uniformly".
    std::optional<action_id> action(context_id x) const {
        switch (plan_->kind) {
        case plan_kind::uniform: return std::nullopt;
        case plan_kind::fixed: return plan_->fixed_actions.at(t_ - 1);
        case plan_kind::eluder: {
            const double r = 4.0 * confidence_radius(plan_->confidence, t_, plan_->F->size());
            return argmax_lowest(uncertainty_radii(*plan_->F, x, M_, r));
        }
        }
        return std::nullopt;
    }

    // Moves from pi_t to pi_{t+1}.
    void advance() {
        if (plan_->kind == plan_kind::eluder && t_ <= plan_->planner_dataset.size()) {
            const auto& z = plan_->planner_dataset[t_ - 1];
            M_.add(*plan_->F, z.context, z.action);
        }
        ++t_;
    }

    const pairwise_sq_norms& norms() const noexcept { return M_; }

private:
    const plan* plan_;
    std::size_t t_ = 1;
    pairwise_sq_norms M_;
};

// Runs the planner over the first T offline contexts.
inline plan eluder_plan(std::shared_ptr<const function_class> F, std::span<const context_id> offline_contexts,
                        std::size_t T, const confidence_config& cfg) {
    require(F != nullptr, "eluder plan needs a function class");
    require(T >= 1, "horizon must be at least 1");
    require(offline_contexts.size() >= T, "need at least T offline contexts");
    cfg.validate();
    plan p;
    p.kind = plan_kind::eluder;
    p.horizon = T;
    p.confidence = cfg;
    p.F = std::move(F);
    pairwise_sq_norms M(p.F->size());
    for (std::size_t t = 1; t <= T; ++t) {
        const context_id x = offline_contexts[t - 1];
        require(x < p.F->num_contexts(), "offline context out of range");
        const double r = 4.0 * confidence_radius(cfg, t, p.F->size());
        const action_id a = argmax_lowest(uncertainty_radii(*p.F, x, M, r));
        p.planner_dataset.push_back({x, a});
        M.add(*p.F, x, a);
    }
    return p;
}

inline plan uniform_plan(std::size_t T) {
    require(T >= 1, "horizon must be at least 1");
    plan p;
    p.kind = plan_kind::uniform;
    p.horizon = T;
    return p;
}

inline plan fixed_plan(std::vector<action_id> actions) {
    require(!actions.empty(), "horizon must be at least 1");
    plan p;
    p.kind = plan_kind::fixed;
    p.horizon = actions.size();
    p.fixed_actions = std::move(actions);
    return p;
}

// Round-robin over the listed actions, remainder to the first entries.
inline plan round_robin_plan(std::span<const action_id> cycle, std::size_t T) {
    require(!cycle.empty(), "round robin needs at least one action");
    std::vector<action_id> actions(T);
    for (std::size_t t = 0; t < T; ++t) actions[t] = cycle[t % cycle.size()];
    return fixed_plan(std::move(actions));
}

// pi_t(x) by recomputing D_t from scratch; nullopt means "draw uniformly".
inline std::optional<action_id> plan_policy_action(const plan& p, std::size_t t, context_id x) {
    if (t < 1 || t > p.horizon) throw index_error("plan step " + std::to_string(t) + " out of range");
    switch (p.kind) {
    case plan_kind::uniform: return std::nullopt;
    case plan_kind::fixed: return p.fixed_actions.at(t - 1);
    case plan_kind::eluder: {
        if (x >= p.F->num_contexts()) throw index_error("context out of range");
        const auto M = pairwise_sq_norms::from_records<query>(*p.F, p.planner_dataset.prefix(t));
        const double r = 4.0 * confidence_radius(p.confidence, t, p.F->size());
        return argmax_lowest(uncertainty_radii(*p.F, x, M, r));
    }
    }
    return std::nullopt;
}

// omega(x_t, pi_t(x_t), D_t) along the planner's own trajectory.
inline std::vector<double> planner_radii(const plan& p) {
    require(p.kind == plan_kind::eluder, "planner radii need an eluder plan");
    std::vector<double> out;
    plan_cursor cur(p);
    for (std::size_t t = 1; t <= p.horizon; ++t) {
        const auto& z = p.planner_dataset[t - 1];
        const double r = 4.0 * confidence_radius(p.confidence, t, p.F->size());
        out.push_back(uncertainty_radii(*p.F, z.context, cur.norms(), r)[z.action]);
        cur.advance();
    }
    return out;
}

} // namespace expplan
