#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "expplan/errors.hpp"

namespace expplan {

using context_id = std::size_t;
using action_id = std::size_t;
using function_id = std::size_t;

// Ordered registry of unique identifiers. Everything downstream refers to
// entries by their dense position.
class registry {
public:
    registry() = default;

    explicit registry(std::vector<std::string> ids) : ids_(std::move(ids)) {
        require(!ids_.empty(), "registry must be nonempty");
        std::unordered_set<std::string> seen;
        for (const auto& id : ids_) {
            require(seen.insert(id).second, "duplicate identifier '" + id + "'");
        }
    }

    // Identifiers "0", "1", ..., "n-1".
    static registry numbered(std::size_t n, const std::string& prefix = "") {
        std::vector<std::string> ids;
        ids.reserve(n);
        for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
        return registry(std::move(ids));
    }

    std::size_t size() const noexcept { return ids_.size(); }
    const std::string& name(std::size_t i) const {
        if (i >= ids_.size()) throw index_error("registry index " + std::to_string(i) + " out of range");
        return ids_[i];
    }
    std::size_t index_of(const std::string& id) const {
        auto it = std::find(ids_.begin(), ids_.end(), id);
        if (it == ids_.end()) throw index_error("unknown identifier '" + id + "'");
        return static_cast<std::size_t>(it - ids_.begin());
    }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    friend bool operator==(const registry&, const registry&) = default;

private:
    std::vector<std::string> ids_;
};

struct context_space : registry {
    using registry::registry;
    explicit context_space(registry r) : registry(std::move(r)) {}

    // The structured-bandit case: a single empty context.
    static context_space singleton() { return context_space(std::vector<std::string>{"none"}); }
};

struct action_space : registry {
    using registry::registry;
    explicit action_space(registry r) : registry(std::move(r)) {}
};

// Dense table of reward functions f(x, a), laid out function-major, then
// context, then action. Every stored value satisfies |v| <= range_bound.
class function_class {
public:
    function_class(context_space contexts, action_space actions, std::vector<double> values, double range_bound)
        : contexts_(std::move(contexts)), actions_(std::move(actions)), values_(std::move(values)), range_bound_(range_bound) {
        require(contexts_.size() > 0 && actions_.size() > 0, "function class needs nonempty spaces");
        const std::size_t cell = contexts_.size() * actions_.size();
        require(!values_.empty() && values_.size() % cell == 0, "value table size does not match |X| x |A|");
        require(range_bound_ >= 0.0 && std::isfinite(range_bound_), "range bound must be finite and non-negative");
        for (double v : values_) {
            require(std::isfinite(v) && std::abs(v) <= range_bound_, "function value exceeds range bound");
        }
        size_ = values_.size() / cell;
    }

    std::size_t size() const noexcept { return size_; }
    std::size_t num_contexts() const noexcept { return contexts_.size(); }
    std::size_t num_actions() const noexcept { return actions_.size(); }
    double range_bound() const noexcept { return range_bound_; }
    const context_space& contexts() const noexcept { return contexts_; }
    const action_space& actions() const noexcept { return actions_; }
    std::span<const double> values() const noexcept { return values_; }

    // Unchecked access.
    double operator()(function_id f, context_id x, action_id a) const noexcept {
        return values_[(f * contexts_.size() + x) * actions_.size() + a];
    }

    // Values of f at context x, one per action.
    std::span<const double> row(function_id f, context_id x) const noexcept {
        return {values_.data() + (f * contexts_.size() + x) * actions_.size(), actions_.size()};
    }

    double at(function_id f, context_id x, action_id a) const {
        if (f >= size_ || x >= num_contexts() || a >= num_actions()) {
            throw index_error("evaluate: index out of range (f=" + std::to_string(f) + ", x=" + std::to_string(x) +
                              ", a=" + std::to_string(a) + ")");
        }
        return (*this)(f, x, a);
    }

    // Class made of the listed functions, in the listed order.
    function_class subset(std::span<const function_id> members) const {
        require(!members.empty(), "subset must be nonempty");
        const std::size_t cell = num_contexts() * num_actions();
        std::vector<double> values;
        values.reserve(members.size() * cell);
        for (function_id f : members) {
            if (f >= size_) throw index_error("subset member out of range");
            values.insert(values.end(), values_.begin() + f * cell, values_.begin() + (f + 1) * cell);
        }
        return function_class(contexts_, actions_, std::move(values), range_bound_);
    }

    bool same_spaces(const function_class& other) const {
        return contexts_ == other.contexts_ && actions_ == other.actions_;
    }

    friend bool operator==(const function_class&, const function_class&) = default;

private:
    context_space contexts_;
    action_space actions_;
    std::vector<double> values_;
    double range_bound_;
    std::size_t size_ = 0;
};

inline double evaluate(const function_class& F, function_id f, context_id x, action_id a) { return F.at(f, x, a); }

// A (context, action) pair.
struct query {
    context_id context;
    action_id action;
    friend bool operator==(const query&, const query&) = default;
};

// A (context, action, reward) triple.
struct sample {
    context_id context;
    action_id action;
    double reward;
    friend bool operator==(const sample&, const sample&) = default;
};

template <class Record>
class dataset {
public:
    using record_type = Record;

    dataset() = default;
    explicit dataset(std::vector<Record> records) : records_(std::move(records)) {}

    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    void push_back(const Record& r) { records_.push_back(r); }
    const Record& operator[](std::size_t i) const { return records_[i]; }
    std::span<const Record> records() const noexcept { return records_; }

    // The first t-1 records, for 1 <= t <= size()+1.
    std::span<const Record> prefix(std::size_t t) const {
        if (t < 1 || t > records_.size() + 1) {
            throw index_error("prefix(" + std::to_string(t) + ") out of range for dataset of size " +
                              std::to_string(records_.size()));
        }
        return std::span<const Record>(records_).first(t - 1);
    }

    friend bool operator==(const dataset&, const dataset&) = default;

private:
    std::vector<Record> records_;
};

using unlabeled_dataset = dataset<query>;
using labeled_dataset = dataset<sample>;

// Total map context -> action.
class deterministic_policy {
public:
    deterministic_policy() = default;
    explicit deterministic_policy(std::vector<action_id> actions) : actions_(std::move(actions)) {}

    action_id operator()(context_id x) const {
        if (x >= actions_.size()) throw index_error("policy queried at unknown context");
        return actions_[x];
    }
    std::size_t num_contexts() const noexcept { return actions_.size(); }
    const std::vector<action_id>& table() const noexcept { return actions_; }

    friend bool operator==(const deterministic_policy&, const deterministic_policy&) = default;

private:
    std::vector<action_id> actions_;
};

// Uniform mixture over deterministic members.
class mixture_policy {
public:
    explicit mixture_policy(std::vector<deterministic_policy> members) : members_(std::move(members)) {
        require(!members_.empty(), "mixture policy needs at least one member");
    }

    const std::vector<deterministic_policy>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }

    // Probability of playing each action at x.
    std::vector<double> distribution(context_id x, std::size_t num_actions) const {
        std::vector<double> p(num_actions, 0.0);
        const double w = 1.0 / static_cast<double>(members_.size());
        for (const auto& m : members_) p.at(m(x)) += w;
        return p;
    }

private:
    std::vector<deterministic_policy> members_;
};

// Categorical distribution over the context registry.
class context_distribution {
public:
    explicit context_distribution(std::vector<double> probs) : probs_(std::move(probs)) {
        require(!probs_.empty(), "context distribution must be nonempty");
        double total = 0.0;
        for (double p : probs_) {
            require(std::isfinite(p) && p >= 0.0, "context probabilities must be non-negative");
            total += p;
        }
        require(std::abs(total - 1.0) <= 1e-12, "context probabilities must sum to 1");
        cdf_.resize(probs_.size());
        std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
    }

    static context_distribution uniform(std::size_t n) {
        std::vector<double> p(n, 1.0 / static_cast<double>(n));
        // Push the rounding residue onto the last entry so the sum check holds.
        double head = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) head += p[i];
        p.back() = 1.0 - head;
        return context_distribution(std::move(p));
    }

    static context_distribution point_mass(std::size_t n, context_id x) {
        std::vector<double> p(n, 0.0);
        p.at(x) = 1.0;
        return context_distribution(std::move(p));
    }

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](context_id x) const { return probs_.at(x); }
    const std::vector<double>& probabilities() const noexcept { return probs_; }

    // Inverse-CDF lookup of u in [0, 1). Zero-probability contexts are never returned.
    context_id quantile(double u) const {
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        auto x = static_cast<context_id>(it - cdf_.begin());
        if (x >= probs_.size()) x = probs_.size() - 1;
        while (probs_[x] == 0.0 && x > 0) --x;
        return x;
    }

private:
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

// ||f - g||_D over the (context, action) pairs of any record type.
template <class Record>
double data_norm(const function_class& F, function_id f, function_id g, std::span<const Record> records) {
    double acc = 0.0;
    for (const auto& r : records) {
        const double d = F(f, r.context, r.action) - F(g, r.context, r.action);
        acc += d * d;
    }
    return std::sqrt(acc);
}

template <class Record>
double data_norm(const function_class& F, function_id f, function_id g, const dataset<Record>& D) {
    return data_norm(F, f, g, D.records());
}

template <class Record>
double data_norm(const function_class& F, function_id f, function_id g, const std::vector<Record>& records) {
    return data_norm(F, f, g, std::span<const Record>(records));
}

// Squared data norms between every pair of functions, maintained as the
// dataset grows one record at a time. Symmetric with zero diagonal.
class pairwise_sq_norms {
public:
    pairwise_sq_norms() = default;
    explicit pairwise_sq_norms(std::size_t n) : n_(n), m_(n * n, 0.0) {}

    template <class Record>
    static pairwise_sq_norms from_records(const function_class& F, std::span<const Record> records) {
        pairwise_sq_norms M(F.size());
        for (const auto& r : records) M.add(F, r.context, r.action);
        return M;
    }

    std::size_t size() const noexcept { return n_; }
    double operator()(function_id f, function_id g) const noexcept { return m_[f * n_ + g]; }
    std::span<const double> row(function_id f) const noexcept { return {m_.data() + f * n_, n_}; }
    double max_entry() const noexcept { return max_; }
    std::size_t records() const noexcept { return records_; }

    void add(const function_class& F, context_id x, action_id a) {
        const std::size_t na = F.num_actions();
        const std::size_t stride = F.num_contexts() * na;
        const double* col = F.values().data() + x * na + a;
        scratch_.resize(n_);
        for (std::size_t f = 0; f < n_; ++f) scratch_[f] = col[f * stride];
        for (std::size_t f = 0; f < n_; ++f) {
            const double vf = scratch_[f];
            double* row_f = m_.data() + f * n_;
            for (std::size_t g = f + 1; g < n_; ++g) {
                const double d = vf - scratch_[g];
                const double v = row_f[g] + d * d;
                row_f[g] = v;
                m_[g * n_ + f] = v;
                max_ = std::max(max_, v);
            }
        }
        ++records_;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> m_;
    std::vector<double> scratch_;
    double max_ = 0.0;
    std::size_t records_ = 0;
};

// Functional form of pairwise_sq_norms::add.
inline pairwise_sq_norms pairwise_sq_norms_update(pairwise_sq_norms M, const function_class& F, query z) {
    M.add(F, z.context, z.action);
    return M;
}

// Greedy policy of one function; ties go to the lowest action index.
inline deterministic_policy greedy_policy(const function_class& F, function_id f) {
    std::vector<action_id> table(F.num_contexts());
    for (context_id x = 0; x < F.num_contexts(); ++x) {
        auto row = F.row(f, x);
        table[x] = static_cast<action_id>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return deterministic_policy(std::move(table));
}

// Exact value sum_x P(x) f*(x, pi(x)).
inline double policy_value(const deterministic_policy& pi, const function_class& F, function_id f_star,
                           const context_distribution& P) {
    require(P.size() == F.num_contexts(), "context distribution does not match context space");
    require(pi.num_contexts() == F.num_contexts(), "policy does not cover the context space");
    double v = 0.0;
    for (context_id x = 0; x < F.num_contexts(); ++x) v += P[x] * F.at(f_star, x, pi(x));
    return v;
}

// Exact value of the uniform mixture: mean of member values.
inline double mixture_value(const mixture_policy& pi, const function_class& F, function_id f_star,
                            const context_distribution& P) {
    double total = 0.0;
    for (const auto& m : pi.members()) total += policy_value(m, F, f_star, P);
    return total / static_cast<double>(pi.size());
}

// sum_x P(x) max_a f*(x, a).
inline double optimal_value(const function_class& F, function_id f_star, const context_distribution& P) {
    require(P.size() == F.num_contexts(), "context distribution does not match context space");
    double v = 0.0;
    for (context_id x = 0; x < F.num_contexts(); ++x) {
        auto row = F.row(f_star, x);
        v += P[x] * *std::max_element(row.begin(), row.end());
    }
    return v;
}

} // namespace expplan
