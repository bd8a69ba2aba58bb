#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "expplan/core.hpp"
#include "expplan/eluder.hpp"
#include "expplan/environment.hpp"
#include "expplan/evaluation.hpp"
#include "expplan/planning.hpp"

namespace expplan {

// Binary tree of height L with nodes numbered level by level, so node n has
// children 2n+1 and 2n+2. There is one function per root-to-leaf path.
struct tree_class_spec {
    int levels = 2;   // L
    double eps = 0.1; // gap parameter

    void validate() const {
        require(levels >= 2 && levels <= 24, "tree height must lie in [2, 24]");
        require(eps > 0.0 && eps <= 1.0 / 6.0, "tree gap must lie in (0, 1/6] so values stay in [-1, 1]");
    }

    std::size_t num_actions() const { return (std::size_t{1} << levels) - 1; }
    std::size_t num_leaves() const { return std::size_t{1} << (levels - 1); }
    action_id first_leaf() const { return num_leaves() - 1; }
    action_id leaf(function_id f) const { return first_leaf() + f; }
};

inline action_id tree_parent(action_id n) { return (n - 1) / 2; }
inline action_id tree_left(action_id n) { return 2 * n + 1; }
inline action_id tree_right(action_id n) { return 2 * n + 2; }

// Nodes on the root-to-leaf path of function f, root first.
inline std::vector<action_id> tree_path(const tree_class_spec& spec, function_id f) {
    std::vector<action_id> path;
    for (action_id n = spec.leaf(f);; n = tree_parent(n)) {
        path.insert(path.begin(), n);
        if (n == 0) break;
    }
    return path;
}

inline action_space tree_action_space(const tree_class_spec& spec) {
    std::vector<std::string> ids;
    for (int l = 1; l <= spec.levels; ++l) {
        const std::size_t width = std::size_t{1} << (l - 1);
        for (std::size_t i = 1; i <= width; ++i) ids.push_back("a" + std::to_string(l) + "," + std::to_string(i));
    }
    return action_space(std::move(ids));
}

inline function_class build_tree_class(const tree_class_spec& spec) {
    spec.validate();
    const std::size_t na = spec.num_actions(), nf = spec.num_leaves();
    std::vector<double> values(nf * na, 1.0 - 12.0 * spec.eps);
    for (function_id f = 0; f < nf; ++f) {
        for (action_id n : tree_path(spec, f)) values[f * na + n] = 1.0 - 2.0 * spec.eps;
        values[f * na + spec.leaf(f)] = 1.0;
    }
    return function_class(context_space::singleton(), tree_action_space(spec), std::move(values), 1.0);
}

inline bool is_tree_class(const function_class& F, const tree_class_spec& spec) {
    return F.num_contexts() == 1 && F.num_actions() == spec.num_actions() && F.size() == spec.num_leaves() &&
           F == build_tree_class(spec);
}

struct descent_result {
    action_id leaf = 0;
    std::size_t samples = 0;
};

// Descends L-1 levels, sampling each child M times and moving to the child
// with the larger empirical mean (left on ties).
inline descent_result adaptive_tree_sampling(const environment& env, const tree_class_spec& spec, std::size_t M,
                                             const stream& root) {
    spec.validate();
    require(M >= 1, "samples per node must be at least 1");
    require(is_tree_class(*env.F, spec), "adaptive tree sampling needs a tree environment");
    descent_result out;
    auto s = root.substream(purpose::tree_descent);
    action_id node = 0;
    for (int round = 1; round < spec.levels; ++round) {
        const action_id b = tree_left(node), c = tree_right(node);
        double sb = 0.0, sc = 0.0;
        for (std::size_t i = 0; i < M; ++i) sb += sample_reward(env, 0, b, s);
        for (std::size_t i = 0; i < M; ++i) sc += sample_reward(env, 0, c, s);
        out.samples += 2 * M;
        node = (sb / M >= sc / M) ? b : c;
    }
    out.leaf = node;
    return out;
}

// Leaves a_{L,1}, ..., a_{L,2^{L-1}-1}, each checked against its predecessors
// with the brute-force dependence test at the tree's own gap.
inline eluder_certificate tree_eluder_certificate(const tree_class_spec& spec) {
    const auto F = build_tree_class(spec);
    eluder_certificate cert;
    cert.epsilon = spec.eps;
    for (function_id f = 0; f + 1 < spec.num_leaves(); ++f) {
        const query z{0, spec.leaf(f)};
        if (eps_dependent(F, z, cert.points, spec.eps)) {
            throw consistency_error("tree certificate failed at leaf " + std::to_string(f + 1));
        }
        cert.points.push_back(z);
    }
    cert.verified_length = cert.points.size();
    return cert;
}

// floor(2^{L-5} / (9 eps^2)); zero when the threshold is below one sample.
inline std::size_t static_failure_budget(const tree_class_spec& spec) {
    return static_cast<std::size_t>(std::floor(std::ldexp(1.0, spec.levels - 5) / (9.0 * spec.eps * spec.eps)));
}

// ceil(2L ln(2L/eps) / eps^2).
inline std::size_t adaptive_budget(const tree_class_spec& spec) {
    const double L = spec.levels;
    return static_cast<std::size_t>(std::ceil(2.0 * L * std::log(2.0 * L / spec.eps) / (spec.eps * spec.eps)));
}

inline std::size_t samples_per_node(const tree_class_spec& spec, std::size_t budget) {
    return budget / (2 * static_cast<std::size_t>(spec.levels - 1));
}

struct gap_budgets {
    std::size_t static_budget = 0;
    std::size_t adaptive_budget = 0;
};

struct strategy_summary {
    std::string strategy;
    std::size_t budget = 0;
    std::size_t trials = 0;
    double success_rate = 0.0;
    double mean_regret = 0.0;
    double std_regret = 0.0; // population standard deviation over trials
    std::vector<double> regrets;
};

struct gap_report {
    std::vector<strategy_summary> strategies; // static_uniform_leaves, static_eluder, adaptive
    std::vector<function_id> f_stars;
    // f* is drawn uniformly per trial, so rates are averages over F_tree
    // rather than the worst case over f*.
    std::string note = "f* uniform over the tree class";
};

inline void summarize(strategy_summary& s, double eps) {
    s.trials = s.regrets.size();
    if (s.trials == 0) return;
    double sum = 0.0, hits = 0.0;
    for (double r : s.regrets) {
        sum += r;
        hits += (r <= eps) ? 1.0 : 0.0;
    }
    s.mean_regret = sum / s.trials;
    s.success_rate = hits / s.trials;
    double var = 0.0;
    for (double r : s.regrets) var += (r - s.mean_regret) * (r - s.mean_regret);
    s.std_regret = std::sqrt(var / s.trials);
}

struct gap_trial {
    function_id f_star = 0;
    double static_uniform = 0.0;
    double static_eluder = 0.0;
    double adaptive = 0.0;
};

// One trial of the three strategies on a freshly drawn f*.
inline gap_trial gap_single_trial(const std::shared_ptr<const function_class>& F, const tree_class_spec& spec,
                                  const gap_budgets& budgets, const confidence_config& cfg, const noise_model& noise,
                                  const stream& trial_stream) {
    gap_trial out;
    auto fs = trial_stream.substream(purpose::f_star);
    out.f_star = static_cast<function_id>(fs.below(F->size()));
    const environment env(F, context_distribution::point_mass(1, 0), out.f_star, noise);

    if (budgets.static_budget > 0) {
        std::vector<action_id> leaves(spec.num_leaves());
        for (function_id f = 0; f < leaves.size(); ++f) leaves[f] = spec.leaf(f);
        const auto rr = round_robin_plan(leaves, budgets.static_budget);
        const auto D = run_sampler(env, rr, trial_stream.substream(1));
        out.static_uniform = simple_regret(extract_greedy_policy(*F, D), env).simple_regret;

        const std::vector<context_id> offline(budgets.static_budget, 0);
        const auto ep = eluder_plan(F, offline, budgets.static_budget, cfg);
        const auto De = run_sampler(env, ep, trial_stream.substream(2));
        out.static_eluder = simple_regret(extract_eluder_policy(*F, De, cfg), env).simple_regret;
    } else {
        // No samples at all: both static strategies fall back to the first function's greedy leaf.
        out.static_uniform = out.static_eluder = simple_regret(greedy_policy(*F, 0), env).simple_regret;
    }

    const std::size_t M = samples_per_node(spec, budgets.adaptive_budget);
    require(M >= 1, "adaptive budget too small for one sample per node");
    const auto d = adaptive_tree_sampling(env, spec, M, trial_stream.substream(3));
    out.adaptive = 1.0 - env.mean_reward(0, d.leaf);
    return out;
}

inline gap_report assemble_gap_report(const std::vector<gap_trial>& trials, const gap_budgets& budgets, double eps) {
    gap_report rep;
    const std::pair<const char*, std::size_t> names[] = {{"static_uniform_leaves", budgets.static_budget},
                                                         {"static_eluder", budgets.static_budget},
                                                         {"adaptive", budgets.adaptive_budget}};
    for (const auto& [name, budget] : names) {
        strategy_summary s;
        s.strategy = name;
        s.budget = budget;
        rep.strategies.push_back(std::move(s));
    }
    for (const auto& t : trials) {
        rep.f_stars.push_back(t.f_star);
        rep.strategies[0].regrets.push_back(t.static_uniform);
        rep.strategies[1].regrets.push_back(t.static_eluder);
        rep.strategies[2].regrets.push_back(t.adaptive);
    }
    for (auto& s : rep.strategies) summarize(s, eps);
    return rep;
}

inline gap_report gap_experiment(const tree_class_spec& spec, std::size_t trials, const gap_budgets& budgets,
                                 const confidence_config& cfg, const stream& root,
                                 const noise_model& noise = noise_model::gaussian(1.0)) {
    spec.validate();
    require(trials >= 1, "need at least one trial");
    auto F = std::make_shared<const function_class>(build_tree_class(spec));
    std::vector<gap_trial> rows;
    rows.reserve(trials);
    for (std::size_t i = 0; i < trials; ++i) {
        rows.push_back(gap_single_trial(F, spec, budgets, cfg, noise, root.substream(i, purpose::trial)));
    }
    return assemble_gap_report(rows, budgets, spec.eps);
}

} // namespace expplan
