#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "expplan/core.hpp"
#include "expplan/eluder.hpp"
#include "expplan/environment.hpp"
#include "expplan/evaluation.hpp"
#include "expplan/fixtures.hpp"
#include "expplan/io.hpp"
#include "expplan/modsel.hpp"
#include "expplan/planning.hpp"
#include "expplan/regression.hpp"
#include "expplan/treebandit.hpp"

namespace expplan {

inline constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;
using json = nlohmann::json;

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---- configuration -----------------------------------------------------------

struct experiment_config {
    std::string kind;
    fs::path base_dir; // relative paths in the config resolve against this
    json raw;          // effective configuration, overrides applied

    std::uint64_t seed = 0;
    std::size_t trials = 1;
    std::size_t workers = 0; // 0: hardware concurrency
    fs::path out = "out";

    std::size_t T = 0;
    double eps = 0.1;
    double delta = 0.1;
    double c_bar = 1.0;
    calibration_constants calibration;
    std::string strategy = "eluder"; // eluder | uniform

    fs::path resolve(const std::string& p) const {
        fs::path q(p);
        return q.is_absolute() ? q : base_dir / q;
    }
};

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> k{"plan", "sample", "evaluate", "pipeline", "gap", "modsel", "eluder"};
    return k;
}

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return j.at(key).get<T>();
}

inline json load_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw config_error("cannot open '" + p.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw config_error("'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

} // namespace detail

struct config_overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::string> out;
    std::optional<std::string> kind; // from the subcommand; must agree with the file if both are given
};

inline experiment_config config_from_json(json raw, const fs::path& base_dir, const config_overrides& ov = {}) {
    if (ov.seed) raw["seed"] = *ov.seed;
    if (ov.trials) raw["trials"] = *ov.trials;
    if (ov.out) raw["out"] = *ov.out;
    if (ov.kind) {
        if (raw.contains("kind") && raw.at("kind") != *ov.kind) {
            throw config_error("config kind does not match subcommand '" + *ov.kind + "'");
        }
        raw["kind"] = *ov.kind;
    }
    experiment_config c;
    c.base_dir = base_dir;
    try {
        c.kind = raw.at("kind").get<std::string>();
        c.seed = detail::get_or<std::uint64_t>(raw, "seed", 0);
        c.trials = detail::get_or<std::size_t>(raw, "trials", 1);
        c.workers = detail::get_or<std::size_t>(raw, "workers", 0);
        c.out = detail::get_or<std::string>(raw, "out", "out");
        c.T = detail::get_or<std::size_t>(raw, "T", 0);
        c.eps = detail::get_or<double>(raw, "eps", 0.1);
        c.delta = detail::get_or<double>(raw, "delta", 0.1);
        c.c_bar = detail::get_or<double>(raw, "c_bar", 1.0);
        c.strategy = detail::get_or<std::string>(raw, "strategy", "eluder");
        if (raw.contains("calibration")) {
            const auto& k = raw.at("calibration");
            c.calibration.c_eluder = detail::get_or<double>(k, "c_eluder", 1.0);
            c.calibration.c_uniform = detail::get_or<double>(k, "c_uniform", 1.0);
            c.calibration.c_modsel = detail::get_or<double>(k, "c_modsel", 1.0);
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed config: ") + e.what());
    }
    if (!c.out.is_absolute() && !ov.out) c.out = base_dir / c.out;
    if (std::find(experiment_kinds().begin(), experiment_kinds().end(), c.kind) == experiment_kinds().end()) {
        throw config_error("unknown experiment kind '" + c.kind + "'");
    }
    if (!(c.delta > 0.0 && c.delta < 1.0)) throw config_error("delta must lie in (0, 1)");
    if (!(c.eps > 0.0)) throw config_error("eps must be positive");
    if (!(c.c_bar > 0.0)) throw config_error("c_bar must be positive");
    if (c.trials < 1) throw config_error("trials must be at least 1");
    if (c.strategy != "eluder" && c.strategy != "uniform") throw config_error("strategy must be eluder or uniform");
    if (!(c.calibration.c_eluder > 0 && c.calibration.c_uniform > 0 && c.calibration.c_modsel > 0)) {
        throw config_error("calibration constants must be positive");
    }
    const bool needs_T = c.kind == "plan" || c.kind == "pipeline" || c.kind == "modsel" || c.kind == "sample";
    if (needs_T && c.T < 1 && !raw.contains("plan")) throw config_error("T must be at least 1");
    // Referenced files must exist at load time.
    for (const char* key : {"environment", "family", "plan", "dataset", "class"}) {
        if (raw.contains(key) && raw.at(key).is_string() && !fs::exists(c.resolve(raw.at(key).get<std::string>()))) {
            throw config_error(std::string("referenced file for '") + key + "' does not exist");
        }
    }
    c.raw = std::move(raw);
    return c;
}

inline experiment_config load_config(const fs::path& path, const config_overrides& ov = {}) {
    return config_from_json(detail::load_json(path), fs::absolute(path).parent_path(), ov);
}

// ---- fixture references ------------------------------------------------------

struct resolved_class {
    std::shared_ptr<const function_class> F;
    std::optional<tree_class_spec> tree;
};

inline tree_class_spec tree_spec_from_json(const json& j) {
    tree_class_spec s;
    s.levels = detail::get_or<int>(j, "levels", 2);
    s.eps = detail::get_or<double>(j, "eps", 0.1);
    s.validate();
    return s;
}

inline nested_fixture_spec nested_spec_from_json(const json& j) {
    nested_fixture_spec s;
    s.seed = detail::get_or<std::uint64_t>(j, "seed", s.seed);
    s.dim = detail::get_or<std::size_t>(j, "dim", s.dim);
    s.contexts = detail::get_or<std::size_t>(j, "contexts", s.contexts);
    s.actions = detail::get_or<std::size_t>(j, "actions", s.actions);
    s.cube = detail::get_or<double>(j, "cube", s.cube);
    s.margin = detail::get_or<double>(j, "margin", s.margin);
    if (j.contains("free_bits")) s.free_bits = j.at("free_bits").get<std::vector<std::size_t>>();
    return s;
}

inline linear_fixture_spec linear_spec_from_json(const json& j) {
    linear_fixture_spec s;
    s.seed = detail::get_or<std::uint64_t>(j, "seed", s.seed);
    s.contexts = detail::get_or<std::size_t>(j, "contexts", s.contexts);
    s.functions = detail::get_or<std::size_t>(j, "functions", s.functions);
    s.star_index = detail::get_or<std::size_t>(j, "star_index", s.functions / 4);
    return s;
}

// A class is either a table file path or {"generator": tree|linear|nested, ...}.
inline resolved_class resolve_class(const json& ref, const fs::path& base) {
    resolved_class rc;
    if (ref.is_string()) {
        fs::path p(ref.get<std::string>());
        if (!p.is_absolute()) p = base / p;
        if (!fs::exists(p)) throw config_error("function class file '" + p.string() + "' does not exist");
        rc.F = std::make_shared<const function_class>(read_function_class(p.string()));
        return rc;
    }
    if (!ref.is_object() || !ref.contains("generator")) throw config_error("class reference must be a path or generator");
    const auto gen = ref.at("generator").get<std::string>();
    if (gen == "tree") {
        rc.tree = tree_spec_from_json(ref);
        rc.F = std::make_shared<const function_class>(build_tree_class(*rc.tree));
    } else if (gen == "linear") {
        rc.F = make_linear_fixture(linear_spec_from_json(ref)).F;
    } else if (gen == "nested") {
        auto nf = make_nested_fixture(nested_spec_from_json(ref));
        const std::size_t member = detail::get_or<std::size_t>(ref, "member", nf.family.size() - 1);
        if (member >= nf.family.size()) throw config_error("nested member index out of range");
        rc.F = nf.family.classes[member];
    } else {
        throw config_error("unknown class generator '" + gen + "'");
    }
    return rc;
}

inline noise_model noise_from_json(const json& j) {
    noise_model n;
    n.kind = noise_kind_from_string(detail::get_or<std::string>(j, "kind", "truncated_gaussian"));
    n.sigma = detail::get_or<double>(j, "sigma", n.kind == noise_kind::uniform || n.kind == noise_kind::zero ? 0.0 : 1.0);
    n.bound = detail::get_or<double>(j, "bound", n.kind == noise_kind::gaussian || n.kind == noise_kind::zero ? 0.0 : 3.0);
    return n;
}

struct resolved_environment {
    std::shared_ptr<environment> env;
    std::optional<tree_class_spec> tree;
};

// f* is an index or {"values": [...]} matched exactly against the class table.
inline function_id resolve_f_star(const json& j, const function_class& F) {
    if (j.is_number_unsigned()) {
        const auto i = j.get<std::size_t>();
        if (i >= F.size()) throw config_error("f_star index out of range");
        return i;
    }
    if (j.is_object() && j.contains("values")) {
        const auto v = j.at("values").get<std::vector<double>>();
        const std::size_t cell = F.num_contexts() * F.num_actions();
        if (v.size() != cell) throw config_error("f_star value table has the wrong size");
        for (function_id f = 0; f < F.size(); ++f) {
            if (std::equal(v.begin(), v.end(), F.values().begin() + f * cell)) return f;
        }
        throw config_error("f_star value table is not a member of the class");
    }
    throw config_error("f_star must be an index or a value table");
}

inline resolved_environment resolve_environment(const json& ref, const fs::path& base) {
    json j = ref;
    fs::path dir = base;
    if (ref.is_string()) {
        fs::path p(ref.get<std::string>());
        if (!p.is_absolute()) p = base / p;
        j = detail::load_json(p);
        dir = p.parent_path();
    }
    try {
        auto rc = resolve_class(j.at("class"), dir);
        const auto& F = *rc.F;
        std::vector<double> probs;
        if (!j.contains("context_probs") || j.at("context_probs") == "uniform") {
            probs = context_distribution::uniform(F.num_contexts()).probabilities();
        } else {
            probs = j.at("context_probs").get<std::vector<double>>();
        }
        const function_id fs_idx = resolve_f_star(j.at("f_star"), F);
        const auto noise = j.contains("noise") ? noise_from_json(j.at("noise")) : noise_model::truncated_gaussian();
        const auto seed = detail::get_or<std::uint64_t>(j, "seed", 0);
        resolved_environment out;
        out.env = std::make_shared<environment>(rc.F, context_distribution(std::move(probs)), fs_idx, noise, seed);
        out.tree = rc.tree;
        return out;
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed environment: ") + e.what());
    }
}

// {"classes": [refs...], "true_index": i} or {"generator": "nested", ...}.
inline model_family resolve_family(const json& ref, const fs::path& base) {
    json j = ref;
    fs::path dir = base;
    if (ref.is_string()) {
        fs::path p(ref.get<std::string>());
        if (!p.is_absolute()) p = base / p;
        j = detail::load_json(p);
        dir = p.parent_path();
    }
    try {
        std::optional<std::size_t> hint;
        if (j.contains("true_index")) hint = j.at("true_index").get<std::size_t>();
        if (j.contains("generator")) {
            if (j.at("generator") != "nested") throw config_error("unknown family generator");
            auto nf = make_nested_fixture(nested_spec_from_json(j));
            return model_family(nf.family.classes, hint);
        }
        std::vector<std::shared_ptr<const function_class>> cs;
        for (const auto& c : j.at("classes")) cs.push_back(resolve_class(c, dir).F);
        return model_family(std::move(cs), hint);
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed family: ") + e.what());
    }
}

// ---- orchestration -----------------------------------------------------------

inline std::size_t worker_count(std::size_t requested, std::size_t jobs) {
    std::size_t w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(w, jobs));
}

// Runs fn(i) for i in [0, n) on a small pool; results come back in index
// order no matter which worker finished first. The first exception thrown by
// any trial is rethrown after the pool drains.
template <class Fn>
auto parallel_trials(std::size_t n, std::size_t workers, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next.store(n);
            }
        }
    };
    const std::size_t w = worker_count(workers, n);
    if (w == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < w; ++k) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

struct run_manifest {
    std::string config_hash;
    std::uint64_t master_seed = 0;
    std::string version = kVersion;
    std::vector<std::uint64_t> trial_seeds;
    std::string started;
    std::string finished;

    json to_json() const {
        return json{{"config_hash", config_hash}, {"master_seed", master_seed}, {"version", version},
                    {"trial_seeds", trial_seeds},  {"started", started},         {"finished", finished}};
    }
};

inline stream trial_stream(std::uint64_t master, std::size_t trial) {
    return stream(master).substream(trial, purpose::trial);
}

// Sorted-sample quantile with linear interpolation.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

struct regret_summary {
    double mean = 0.0, median = 0.0, p90 = 0.0, success_rate = 0.0;
};

inline regret_summary summarize_regrets(const std::vector<double>& r, double eps) {
    regret_summary s;
    s.mean = mean(r);
    s.median = quantile(r, 0.5);
    s.p90 = quantile(r, 0.9);
    double hits = 0.0;
    for (double x : r) hits += (x <= eps) ? 1.0 : 0.0;
    s.success_rate = r.empty() ? 0.0 : hits / static_cast<double>(r.size());
    return s;
}

inline table regret_summary_table(const std::vector<double>& r, double eps) {
    const auto s = summarize_regrets(r, eps);
    return {{"trials", "eps", "mean_regret", "median_regret", "p90_regret", "success_rate"},
            {{std::to_string(r.size()), format_real(eps), format_real(s.mean), format_real(s.median),
              format_real(s.p90), format_real(s.success_rate)}}};
}

inline table gap_table(const gap_report& rep) {
    table t{{"strategy", "budget", "trials", "success_rate", "mean_regret", "std_regret"}, {}};
    for (const auto& s : rep.strategies) {
        t.rows.push_back({s.strategy, std::to_string(s.budget), std::to_string(s.trials), format_real(s.success_rate),
                          format_real(s.mean_regret), format_real(s.std_regret)});
    }
    return t;
}

inline confidence_config confidence_for(const experiment_config& c, const environment& env) {
    confidence_config cfg;
    cfg.delta = c.delta;
    cfg.c_bar = c.c_bar;
    cfg.range_bound = env.F->range_bound();
    // Unbounded noise uses a nominal three-sigma bound in the radius.
    cfg.noise_bound = env.noise.bounded() ? env.noise.bound : 3.0 * env.noise.sigma;
    return cfg;
}

struct run_outcome {
    run_manifest manifest;
    fs::path out_dir;
};

namespace detail {

inline const json& need(const experiment_config& c, const char* key) {
    if (!c.raw.contains(key)) throw config_error(std::string("config is missing '") + key + "'");
    return c.raw.at(key);
}

struct pipeline_row {
    double regret = 0.0, policy_value = 0.0, optimal_value = 0.0;
};

} // namespace detail

// Executes the configured experiment and writes trials.csv, summary.csv and
// manifest.json (plus kind-specific artifacts) into the output directory.
inline run_outcome run_experiment(const experiment_config& c) {
    run_outcome res;
    res.out_dir = c.out;
    auto& man = res.manifest;
    man.started = utc_timestamp();
    man.master_seed = c.seed;
    man.config_hash = hex64(fnv1a(c.raw.dump()));
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) throw io_error("cannot create output directory '" + c.out.string() + "'");
    auto path = [&](const char* name) { return (c.out / name).string(); };

    std::size_t n_trials = c.trials;
    if (c.kind == "plan" || c.kind == "eluder" || c.kind == "evaluate") n_trials = 1;
    for (std::size_t i = 0; i < n_trials; ++i) man.trial_seeds.push_back(trial_stream(c.seed, i).key());

    if (c.kind == "plan") {
        auto re = resolve_environment(detail::need(c, "environment"), c.base_dir);
        const auto& env = *re.env;
        const auto cfg = confidence_for(c, env);
        plan p;
        if (c.strategy == "uniform") {
            p = uniform_plan(c.T);
        } else {
            const std::size_t m = detail::get_or<std::size_t>(c.raw, "offline_contexts", c.T);
            const auto ctx = draw_offline_contexts(env, m, trial_stream(c.seed, 0));
            p = eluder_plan(env.F, ctx, c.T, cfg);
        }
        write_plan(p, path("plan.txt"));
        emit_results(table{{"trial", "seed", "kind", "horizon"},
                           {{"1", std::to_string(man.trial_seeds[0]), to_string(p.kind), std::to_string(p.horizon)}}},
                     path("trials.csv"));
        emit_results(table{{"kind", "horizon", "records"},
                           {{to_string(p.kind), std::to_string(p.horizon),
                             std::to_string(p.planner_dataset.size())}}},
                     path("summary.csv"));
    } else if (c.kind == "sample") {
        auto re = resolve_environment(detail::need(c, "environment"), c.base_dir);
        const auto& env = *re.env;
        plan p;
        if (c.raw.contains("plan")) {
            p = read_plan(c.resolve(c.raw.at("plan").get<std::string>()).string(), env.F);
        } else if (c.strategy == "uniform") {
            p = uniform_plan(c.T);
        } else {
            const std::size_t m = detail::get_or<std::size_t>(c.raw, "offline_contexts", c.T);
            p = eluder_plan(env.F, draw_offline_contexts(env, m, stream(c.seed).substream(purpose::offline_context)),
                            c.T, confidence_for(c, env));
        }
        auto rows = parallel_trials(n_trials, c.workers, [&](std::size_t i) {
            return run_sampler(env, p, trial_stream(c.seed, i).substream(purpose::context));
        });
        table trials{{"trial", "seed", "records", "mean_reward"}, {}};
        std::vector<double> means;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double s = 0.0;
            for (const auto& r : rows[i].records()) s += r.reward;
            means.push_back(s / static_cast<double>(rows[i].size()));
            trials.rows.push_back({std::to_string(i + 1), std::to_string(man.trial_seeds[i]),
                                   std::to_string(rows[i].size()), format_real(means.back())});
            emit_results(dataset_table(rows[i]), (c.out / ("dataset_" + std::to_string(i + 1) + ".csv")).string());
        }
        emit_results(trials, path("trials.csv"));
        emit_results(table{{"trials", "horizon", "mean_reward"},
                           {{std::to_string(rows.size()), std::to_string(p.horizon), format_real(mean(means))}}},
                     path("summary.csv"));
    } else if (c.kind == "evaluate") {
        auto re = resolve_environment(detail::need(c, "environment"), c.base_dir);
        const auto& env = *re.env;
        const auto D = dataset_from_table(read_results(c.resolve(detail::need(c, "dataset").get<std::string>()).string()));
        for (const auto& s : D.records()) env.F->at(0, s.context, s.action);
        regret_report rep;
        if (c.strategy == "uniform") {
            const auto pi = extract_greedy_policy(*env.F, D);
            emit_results(policy_table(pi), path("policy.csv"));
            rep = simple_regret(pi, env);
        } else {
            const auto pi = extract_eluder_policy(*env.F, D, confidence_for(c, env));
            emit_results(policy_table(pi), path("policy.csv"));
            rep = simple_regret(pi, env);
        }
        emit_results(table{{"trial", "seed", "strategy", "T", "regret", "policy_value", "optimal_value"},
                           {{"1", std::to_string(man.trial_seeds[0]), c.strategy, std::to_string(D.size()),
                             format_real(rep.simple_regret), format_real(rep.policy_value),
                             format_real(rep.optimal_value)}}},
                     path("trials.csv"));
        emit_results(regret_summary_table({rep.simple_regret}, c.eps), path("summary.csv"));
    } else if (c.kind == "pipeline") {
        auto re = resolve_environment(detail::need(c, "environment"), c.base_dir);
        const auto& env = *re.env;
        const auto cfg = confidence_for(c, env);
        const std::size_t m = detail::get_or<std::size_t>(c.raw, "offline_contexts", c.T);
        if (m < c.T) throw config_error("offline_contexts must be at least T");
        auto rows = parallel_trials(n_trials, c.workers, [&](std::size_t i) {
            const auto ts = trial_stream(c.seed, i);
            regret_report rep;
            if (c.strategy == "uniform") {
                const auto D = run_sampler(env, uniform_plan(c.T), ts.substream(purpose::context));
                rep = simple_regret(extract_greedy_policy(*env.F, D), env);
            } else {
                const auto ctx = draw_offline_contexts(env, m, ts);
                const auto p = eluder_plan(env.F, ctx, c.T, cfg);
                const auto D = run_sampler(env, p, ts.substream(purpose::context));
                rep = simple_regret(extract_eluder_policy(*env.F, D, cfg), env);
            }
            return detail::pipeline_row{rep.simple_regret, rep.policy_value, rep.optimal_value};
        });
        table trials{{"trial", "seed", "strategy", "T", "regret", "policy_value", "optimal_value"}, {}};
        std::vector<double> regrets;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            regrets.push_back(rows[i].regret);
            trials.rows.push_back({std::to_string(i + 1), std::to_string(man.trial_seeds[i]), c.strategy,
                                   std::to_string(c.T), format_real(rows[i].regret), format_real(rows[i].policy_value),
                                   format_real(rows[i].optimal_value)});
        }
        emit_results(trials, path("trials.csv"));
        emit_results(regret_summary_table(regrets, c.eps), path("summary.csv"));
    } else if (c.kind == "gap") {
        const auto spec = tree_spec_from_json(c.raw.contains("tree") ? c.raw.at("tree") : json::object());
        gap_budgets b;
        const json bj = c.raw.contains("budgets") ? c.raw.at("budgets") : json::object();
        b.static_budget = detail::get_or<std::size_t>(bj, "static", static_failure_budget(spec));
        b.adaptive_budget = detail::get_or<std::size_t>(bj, "adaptive", adaptive_budget(spec));
        const auto noise = c.raw.contains("noise") ? noise_from_json(c.raw.at("noise")) : noise_model::gaussian(1.0);
        noise.validate();
        auto F = std::make_shared<const function_class>(build_tree_class(spec));
        confidence_config cfg{c.delta, c.c_bar, 1.0, noise.bounded() ? noise.bound : 3.0 * noise.sigma};
        auto rows = parallel_trials(n_trials, c.workers, [&](std::size_t i) {
            return gap_single_trial(F, spec, b, cfg, noise, trial_stream(c.seed, i));
        });
        const auto rep = assemble_gap_report(rows, b, spec.eps);
        table trials{{"trial", "seed", "f_star", "static_uniform_leaves", "static_eluder", "adaptive"}, {}};
        for (std::size_t i = 0; i < rows.size(); ++i) {
            trials.rows.push_back({std::to_string(i + 1), std::to_string(man.trial_seeds[i]),
                                   std::to_string(rows[i].f_star), format_real(rows[i].static_uniform),
                                   format_real(rows[i].static_eluder), format_real(rows[i].adaptive)});
        }
        emit_results(trials, path("trials.csv"));
        emit_results(gap_table(rep), path("summary.csv"));
    } else if (c.kind == "modsel") {
        auto re = resolve_environment(detail::need(c, "environment"), c.base_dir);
        const auto& env = *re.env;
        const auto fam = resolve_family(detail::need(c, "family"), c.base_dir);
        if (!fam[0].same_spaces(*env.F)) throw config_error("family and environment spaces differ");
        const bool known_eps = detail::get_or<std::string>(c.raw, "selector", "test_loss") == "known_eps";
        struct row {
            std::size_t selected;
            double population_loss, regret, oracle_regret;
        };
        confidence_config cfg = confidence_for(c, env);
        auto rows = parallel_trials(n_trials, c.workers, [&](std::size_t i) {
            const auto ts = trial_stream(c.seed, i);
            const auto D = run_sampler(env, uniform_plan(c.T), ts.substream(purpose::context));
            row r{};
            if (known_eps) {
                r.selected = select_index_known_eps(fam, cfg, c.calibration, c.eps, c.T);
                const auto u = uniform_strategy(fam[r.selected], env, D);
                r.population_loss = u.population_loss;
                r.regret = u.regret.simple_regret;
            } else {
                const auto m = modsel_from_data(fam, env, D);
                r.selected = m.selected;
                r.population_loss = m.population_loss;
                r.regret = m.regret.simple_regret;
            }
            r.oracle_regret = fam.true_index
                                  ? uniform_strategy(fam[*fam.true_index], env, split_dataset(D).first)
                                        .regret.simple_regret
                                  : std::nan("");
            return r;
        });
        table trials{{"trial", "seed", "selected", "population_loss", "regret", "oracle_regret"}, {}};
        std::vector<double> regrets;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            regrets.push_back(rows[i].regret);
            trials.rows.push_back({std::to_string(i + 1), std::to_string(man.trial_seeds[i]),
                                   std::to_string(rows[i].selected + 1), format_real(rows[i].population_loss),
                                   format_real(rows[i].regret), format_real(rows[i].oracle_regret)});
        }
        emit_results(trials, path("trials.csv"));
        emit_results(regret_summary_table(regrets, c.eps), path("summary.csv"));
    } else if (c.kind == "eluder") {
        resolved_class rc;
        if (c.raw.contains("class")) {
            rc = resolve_class(c.raw.at("class"), c.base_dir);
        } else {
            rc.F = resolve_environment(detail::need(c, "environment"), c.base_dir).env->F;
        }
        const auto mode_s = detail::get_or<std::string>(c.raw, "mode", "greedy");
        if (mode_s != "greedy" && mode_s != "exact") throw config_error("mode must be greedy or exact");
        const auto mode = mode_s == "exact" ? search_mode::exact : search_mode::greedy;
        const auto domain = full_domain(*rc.F);
        const auto cert = longest_independent_sequence(*rc.F, domain, c.eps, mode);
        const auto grid = default_eps_grid(*rc.F, domain, c.eps);
        const auto est = eluder_dimension_estimate(*rc.F, domain, c.eps, grid, mode);
        table cert_t{{"index", "context", "action"}, {}};
        for (std::size_t i = 0; i < cert.points.size(); ++i) {
            cert_t.rows.push_back({std::to_string(i + 1), rc.F->contexts().name(cert.points[i].context),
                                   rc.F->actions().name(cert.points[i].action)});
        }
        emit_results(cert_t, path("certificate.csv"));
        emit_results(table{{"trial", "seed", "epsilon", "mode", "length", "verified"},
                           {{"1", std::to_string(man.trial_seeds[0]), format_real(c.eps), mode_s,
                             std::to_string(cert.verified_length), verify_certificate(*rc.F, cert) ? "1" : "0"}}},
                     path("trials.csv"));
        emit_results(table{{"epsilon", "mode", "grid_points", "estimate"},
                           {{format_real(c.eps), mode_s, std::to_string(grid.size()), std::to_string(est)}}},
                     path("summary.csv"));
    }

    man.finished = utc_timestamp();
    auto out = open_out(path("manifest.json"));
    out << man.to_json().dump(2) << '\n';
    if (!out) throw io_error("cannot write manifest");
    return res;
}

} // namespace expplan
