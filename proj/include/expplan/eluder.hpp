#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "expplan/core.hpp"

namespace expplan {

struct eluder_certificate {
    std::vector<query> points;
    double epsilon = 0.0;
    std::size_t verified_length = 0;
};

enum class search_mode { exact, greedy };

namespace detail {

// True when some ordered pair within eps in data norm on the predecessors
// (given as squared norms in M) differs by more than eps at z.
inline bool independent_given(const function_class& F, const pairwise_sq_norms& M, query z, double eps) {
    const double eps2 = eps * eps;
    const std::size_t n = F.size();
    const std::size_t stride = F.num_contexts() * F.num_actions();
    const double* col = F.values().data() + z.context * F.num_actions() + z.action;
    for (std::size_t f = 0; f < n; ++f) {
        const double vf = col[f * stride];
        auto row = M.row(f);
        for (std::size_t g = 0; g < n; ++g) {
            if (vf - col[g * stride] > eps && row[g] <= eps2) return true;
        }
    }
    return false;
}

} // namespace detail

// Definition of eps-dependence, by brute force over all ordered pairs.
inline bool eps_dependent(const function_class& F, query z, std::span<const query> predecessors, double eps) {
    require(eps > 0.0, "eps must be positive");
    F.at(0, z.context, z.action);
    auto M = pairwise_sq_norms::from_records<query>(F, predecessors);
    return !detail::independent_given(F, M, z, eps);
}

inline bool verify_certificate(const function_class& F, const eluder_certificate& cert) {
    if (cert.verified_length != cert.points.size() || !(cert.epsilon > 0.0)) return false;
    pairwise_sq_norms M(F.size());
    for (const auto& z : cert.points) {
        if (!detail::independent_given(F, M, z, cert.epsilon)) return false;
        M.add(F, z.context, z.action);
    }
    return true;
}

inline constexpr std::size_t kExactDomainLimit = 20;

namespace detail {

// Branch and bound over predecessor sets. A point that is dependent on a set
// stays dependent on every superset (more predecessors only shrink the set
// of close pairs), so |S| plus the number of currently independent points
// bounds every extension of S.
class exact_search {
public:
    exact_search(const function_class& F, std::span<const query> domain, double eps)
        : F_(F), domain_(domain), eps_(eps) {}

    std::vector<std::size_t> run() {
        std::vector<std::size_t> seq;
        dfs(0, pairwise_sq_norms(F_.size()), seq);
        return best_;
    }

private:
    void dfs(std::uint32_t mask, const pairwise_sq_norms& M, std::vector<std::size_t>& seq) {
        if (!seen_.insert(mask).second) return;
        if (seq.size() > best_.size()) best_ = seq;
        std::vector<std::size_t> open;
        for (std::size_t i = 0; i < domain_.size(); ++i) {
            if (mask & (1u << i)) continue;
            if (independent_given(F_, M, domain_[i], eps_)) open.push_back(i);
        }
        if (seq.size() + open.size() <= best_.size()) return;
        for (std::size_t i : open) {
            auto next = M;
            next.add(F_, domain_[i].context, domain_[i].action);
            seq.push_back(i);
            dfs(mask | (1u << i), next, seq);
            seq.pop_back();
            if (best_.size() == seq.size() + open.size()) return;
        }
    }

    const function_class& F_;
    std::span<const query> domain_;
    double eps_;
    std::unordered_set<std::uint32_t> seen_;
    std::vector<std::size_t> best_;
};

} // namespace detail

inline eluder_certificate longest_independent_sequence(const function_class& F, std::span<const query> domain,
                                                       double eps, search_mode mode) {
    require(eps > 0.0, "eps must be positive");
    for (const auto& z : domain) F.at(0, z.context, z.action);
    eluder_certificate cert;
    cert.epsilon = eps;
    if (mode == search_mode::exact) {
        if (domain.size() > kExactDomainLimit) {
            throw size_error("exact search supports at most " + std::to_string(kExactDomainLimit) + " domain points");
        }
        for (std::size_t i : detail::exact_search(F, domain, eps).run()) cert.points.push_back(domain[i]);
    } else {
        pairwise_sq_norms M(F.size());
        for (const auto& z : domain) {
            if (detail::independent_given(F, M, z, eps)) {
                cert.points.push_back(z);
                M.add(F, z.context, z.action);
            }
        }
    }
    cert.verified_length = cert.points.size();
    return cert;
}

// Geometric grid eps, 2 eps, 4 eps, ... up to the largest value spread on the domain.
inline std::vector<double> default_eps_grid(const function_class& F, std::span<const query> domain, double eps) {
    require(eps > 0.0, "eps must be positive");
    double diameter = 0.0;
    for (const auto& z : domain) {
        double lo = F.at(0, z.context, z.action), hi = lo;
        for (function_id f = 1; f < F.size(); ++f) {
            lo = std::min(lo, F(f, z.context, z.action));
            hi = std::max(hi, F(f, z.context, z.action));
        }
        diameter = std::max(diameter, hi - lo);
    }
    std::vector<double> grid{eps};
    for (double e = 2.0 * eps; e <= diameter; e *= 2.0) grid.push_back(e);
    return grid;
}

// Max over the grid of the independent-sequence length: a lower bound on the
// eluder dimension (exact over the grid in exact mode).
inline std::size_t eluder_dimension_estimate(const function_class& F, std::span<const query> domain, double eps,
                                             std::span<const double> grid, search_mode mode) {
    require(!grid.empty(), "eps grid must be nonempty");
    std::size_t best = 0;
    for (double e : grid) {
        require(e >= eps, "grid values must be at least eps");
        best = std::max(best, longest_independent_sequence(F, domain, e, mode).verified_length);
    }
    return best;
}

// Every (context, action) pair of the class, context-major.
inline std::vector<query> full_domain(const function_class& F) {
    std::vector<query> out;
    for (context_id x = 0; x < F.num_contexts(); ++x)
        for (action_id a = 0; a < F.num_actions(); ++a) out.push_back({x, a});
    return out;
}

} // namespace expplan
