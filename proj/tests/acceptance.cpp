// Acceptance runner: one PASS/FAIL line per criterion. Exit status is 0 only
// when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expplan/expplan.hpp"

using namespace expplan;

namespace {

struct calibration {
    double delta = 0.1;
    double c_bar = 1.0;
    calibration_constants k;
    std::uint64_t seed = 1;
};

calibration load_calibration(const std::string& path) {
    const auto j = detail::load_json(path);
    calibration c;
    c.delta = detail::get_or<double>(j, "delta", c.delta);
    c.c_bar = detail::get_or<double>(j, "c_bar", c.c_bar);
    c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
    if (j.contains("calibration")) {
        const auto& k = j.at("calibration");
        c.k.c_eluder = detail::get_or<double>(k, "c_eluder", 1.0);
        c.k.c_uniform = detail::get_or<double>(k, "c_uniform", 1.0);
        c.k.c_modsel = detail::get_or<double>(k, "c_modsel", 1.0);
    }
    return c;
}

struct outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string g4(double v) { return fmt("%.4g", v); }

stream criterion_root(const calibration& cal, int n) { return stream(cal.seed).substream(static_cast<std::uint64_t>(n)); }

// Linear fixture environment with truncated Gaussian noise, uniform contexts.
environment linear_env() {
    const auto fx = make_linear_fixture();
    return environment(fx.F, context_distribution::uniform(fx.F->num_contexts()), fx.f_star,
                       noise_model::truncated_gaussian());
}

confidence_config confidence(const calibration& cal, const environment& env) {
    return {cal.delta, cal.c_bar, env.F->range_bound(), env.noise.bounded() ? env.noise.bound : 3.0 * env.noise.sigma};
}

double eluder_pipeline_regret(const environment& env, std::size_t T, const confidence_config& cfg, const stream& ts) {
    const auto ctx = draw_offline_contexts(env, T, ts);
    const auto p = eluder_plan(env.F, ctx, T, cfg);
    const auto D = run_sampler(env, p, ts.substream(purpose::context));
    return simple_regret(extract_eluder_policy(*env.F, D, cfg), env).simple_regret;
}

// ---- criteria ----------------------------------------------------------------

outcome gap_criterion(const calibration& cal) {
    const tree_class_spec spec{7, 0.1};
    const gap_budgets b{44, 6918};
    const confidence_config cfg{cal.delta, cal.c_bar, 1.0, 3.0};
    const auto rep = gap_experiment(spec, 200, b, cfg, criterion_root(cal, 1), noise_model::gaussian(1.0));
    const auto& su = rep.strategies[0];
    const auto& se = rep.strategies[1];
    const auto& ad = rep.strategies[2];
    outcome o;
    o.pass = ad.success_rate >= 0.9 && su.mean_regret > spec.eps;
    o.detail = "adaptive success " + g4(ad.success_rate) + " (need >= 0.9), static_uniform_leaves mean regret " +
               g4(su.mean_regret) + " (need > 0.1), static_eluder mean regret " + g4(se.mean_regret) +
               "; formula budgets T_s=" + std::to_string(static_failure_budget(spec)) +
               " T_a=" + std::to_string(adaptive_budget(spec));
    return o;
}

outcome certificate_criterion(const calibration&) {
    const std::size_t expected[] = {1, 3, 7, 15, 31, 63};
    outcome o{true, "lengths"};
    for (int L = 2; L <= 7; ++L) {
        const tree_class_spec spec{L, 0.1};
        const auto F = build_tree_class(spec);
        const auto cert = tree_eluder_certificate(spec);
        bool ok = cert.verified_length == expected[L - 2];
        for (std::size_t i = 0; i < cert.points.size(); ++i) {
            const std::span<const query> preds(cert.points.data(), i);
            ok = ok && !eps_dependent(F, cert.points[i], preds, spec.eps);
        }
        o.pass = o.pass && ok;
        o.detail += " L=" + std::to_string(L) + ":" + std::to_string(cert.verified_length);
    }
    return o;
}

outcome uniform_rate_criterion(const calibration& cal) {
    const auto env = linear_env();
    const std::size_t Ts[] = {125, 500, 2000, 8000};
    const auto root = criterion_root(cal, 3);
    std::vector<double> lx, ly;
    double last = 0.0;
    std::string med;
    for (std::size_t T : Ts) {
        auto r = parallel_trials(100, 0, [&](std::size_t i) {
            const auto ts = root.substream(i, purpose::trial);
            const auto D = run_sampler(env, uniform_plan(T), ts.substream(purpose::context));
            return simple_regret(extract_greedy_policy(*env.F, D), env).simple_regret;
        });
        last = quantile(r, 0.5);
        lx.push_back(std::log(static_cast<double>(T)));
        ly.push_back(std::log(std::max(last, 1e-300)));
        med += " T=" + std::to_string(T) + ":" + g4(last);
    }
    double mx = mean(lx), my = mean(ly), sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    return {slope >= -0.75 && slope <= -0.3 && last <= 0.1,
            "median regret" + med + "; log-log slope " + g4(slope) + " (need in [-0.75, -0.3])"};
}

outcome eluder_pipeline_criterion(const calibration& cal) {
    const auto env = linear_env();
    const auto cfg = confidence(cal, env);
    const auto root = criterion_root(cal, 4);
    const std::size_t Ts[] = {250, 1000, 2000};
    std::vector<double> medians;
    double frac = 0.0;
    for (std::size_t T : Ts) {
        auto r = parallel_trials(50, 0, [&](std::size_t i) {
            return eluder_pipeline_regret(env, T, cfg, root.substream(i, purpose::trial));
        });
        medians.push_back(quantile(r, 0.5));
        if (T == 2000) frac = summarize_regrets(r, 0.1).success_rate;
    }
    const bool monotone = medians[1] <= medians[0] && medians[2] <= medians[1];
    return {frac >= 0.9 && monotone, "fraction with regret <= 0.1 at T=2000: " + g4(frac) +
                                         " (need >= 0.9); medians " + g4(medians[0]) + ", " + g4(medians[1]) +
                                         ", " + g4(medians[2]) + " (need non-increasing); C_bar=" + g4(cal.c_bar)};
}

// True when for every t <= T and every pair, ||f-g||_{sampled_t} <= 2 beta(t)
// implies ||f-g||_{planner_t} <= 4 beta(t).
bool containment_holds(const environment& env, std::size_t T, const confidence_config& cfg, const stream& ts) {
    const auto& F = *env.F;
    const auto ctx = draw_offline_contexts(env, T, ts);
    const auto p = eluder_plan(env.F, ctx, T, cfg);
    const auto D = run_sampler(env, p, ts.substream(purpose::context));
    pairwise_sq_norms planner(F.size()), sampled(F.size());
    const std::size_t n = F.size();
    for (std::size_t t = 1; t <= T; ++t) {
        const double b = confidence_radius(cfg, t, n);
        const double two = 4.0 * b * b, four = 16.0 * b * b;
        if (planner.max_entry() > four) {
            for (function_id f = 0; f < n; ++f) {
                auto sr = sampled.row(f);
                auto pr = planner.row(f);
                for (function_id g = f + 1; g < n; ++g)
                    if (sr[g] <= two && pr[g] > four) return false;
            }
        }
        planner.add(F, p.planner_dataset[t - 1].context, p.planner_dataset[t - 1].action);
        sampled.add(F, D[t - 1].context, D[t - 1].action);
    }
    return true;
}

outcome containment_criterion(const calibration& cal) {
    const std::size_t T = 500, trials = 200;
    const auto root = criterion_root(cal, 5);
    outcome o{true, ""};

    const auto lin = linear_env();
    const auto cfg_lin = confidence(cal, lin);
    auto r1 = parallel_trials(trials, 0, [&](std::size_t i) {
        return containment_holds(lin, T, cfg_lin, root.substream(i, purpose::trial)) ? 1.0 : 0.0;
    });

    const tree_class_spec spec{5, 0.1};
    auto tree = std::make_shared<const function_class>(build_tree_class(spec));
    auto r2 = parallel_trials(trials, 0, [&](std::size_t i) {
        const auto ts = root.substream(1000 + i, purpose::trial);
        auto fs = ts.substream(purpose::f_star);
        const environment env(tree, context_distribution::point_mass(1, 0), fs.below(tree->size()),
                              noise_model::truncated_gaussian());
        return containment_holds(env, T, confidence(cal, env), ts) ? 1.0 : 0.0;
    });
    const double a = mean(r1), b = mean(r2);
    o.pass = a >= 0.85 && b >= 0.85;
    o.detail = "fraction of trials with containment: linear " + g4(a) + ", tree(L=5) " + g4(b) + " (need >= 0.85)";
    return o;
}

outcome concentration_criterion(const calibration& cal) {
    const auto env = linear_env();
    const auto cfg = confidence(cal, env);
    const auto& F = *env.F;
    const std::size_t T = 1000, n = F.size();
    const auto root = criterion_root(cal, 6);
    double worst = 0.0;
    auto r = parallel_trials(200, 0, [&](std::size_t i) {
        const auto D = run_sampler(env, uniform_plan(T), root.substream(i, purpose::trial));
        squared_loss_tracker ls(F);
        std::vector<double> dist(n, 0.0); // ||f - f*||^2 on the prefix
        bool ok = true;
        double ratio = 0.0;
        for (std::size_t t = 1; t <= T; ++t) {
            const double b = confidence_radius(cfg, t, n);
            const double d = dist[ls.argmin()];
            ratio = std::max(ratio, d / (b * b));
            ok = ok && d <= b * b;
            const auto& s = D[t - 1];
            ls.add(s);
            for (function_id f = 0; f < n; ++f) {
                const double e = F(f, s.context, s.action) - F(env.f_star, s.context, s.action);
                dist[f] += e * e;
            }
        }
        return std::pair<double, double>{ok ? 1.0 : 0.0, ratio};
    });
    double hits = 0.0;
    for (const auto& [ok, ratio] : r) {
        hits += ok;
        worst = std::max(worst, ratio);
    }
    const double frac = hits / static_cast<double>(r.size());
    return {frac >= 0.9, "fraction of trials inside the radius for all t: " + g4(frac) +
                             " (need >= 0.9); largest ||f_hat - f*||^2 / beta^2 seen " + g4(worst) +
                             "; C_bar=" + g4(cal.c_bar)};
}

outcome modsel_criterion(const calibration& cal) {
    const auto nf = make_nested_fixture();
    const std::size_t T = 2000, trials = 100;
    const auto root = criterion_root(cal, 7);
    const auto P = context_distribution::uniform(nf.F->num_contexts());

    auto in = [&](std::size_t i, function_id f) {
        return std::find(nf.members[i].begin(), nf.members[i].end(), f) != nf.members[i].end();
    };
    // f* in the smallest class, then f* only in the largest one.
    const function_id inner = 512, outside = 687;
    if (!in(0, inner) || in(1, outside)) return {false, "nested fixture indices moved"};
    const environment small(nf.F, P, inner, noise_model::truncated_gaussian());
    auto pairs = parallel_trials(trials, 0, [&](std::size_t i) {
        const auto ts = root.substream(i, purpose::trial);
        const double m = modsel_pipeline(nf.family, small, T, ts).regret.simple_regret;
        const double o = oracle_pipeline(nf.family, 0, small, T, ts).regret.simple_regret;
        return std::pair<double, double>{m, o};
    });
    std::vector<double> ms, os;
    for (const auto& [m, o] : pairs) ms.push_back(m), os.push_back(o);
    const double pm = quantile(ms, 0.9), po = quantile(os, 0.9);
    const bool first = pm <= 1.5 * po;

    const environment big(nf.F, P, outside, noise_model::truncated_gaussian());
    const confidence_config cfg{cal.delta, cal.c_bar, 1.0, big.noise.bound};
    const double env_bound = modsel_envelope(nf.family, 2, cfg, cal.k, T);
    auto losses = parallel_trials(trials, 0, [&](std::size_t i) {
        return modsel_pipeline(nf.family, big, T, root.substream(5000 + i, purpose::trial)).population_loss;
    });
    double inside = 0.0;
    for (double l : losses) inside += l <= env_bound;
    const double frac = inside / static_cast<double>(trials);
    return {first && frac >= 0.9, "p90 regret modsel " + g4(pm) + " vs oracle told i* " + g4(po) +
                                      " (need <= 1.5x); i*=3: population loss within envelope " + g4(env_bound) +
                                      " in " + g4(frac) + " of trials (need >= 0.9), p90 loss " +
                                      g4(quantile(losses, 0.9)) + ", C=" + g4(cal.k.c_modsel)};
}

outcome property_criterion(const calibration&) {
    const std::string cmd = std::string(EXPPLAN_PROPERTY_TESTS_PATH) + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {false, "could not launch the property suite"};
    std::string out;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    const int rc = pclose(pipe);
    const auto pos = out.rfind("[  PASSED  ]");
    std::string summary = pos == std::string::npos ? "no summary" : out.substr(pos, out.find('\n', pos) - pos);
    const auto fpos = out.find("[  FAILED  ]");
    if (fpos != std::string::npos) summary += "; " + out.substr(fpos, out.find('\n', fpos) - fpos);
    return {rc == 0, summary + " (each property draws >= 1000 cases)"};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string config;
    std::vector<int> only;
    app.add_option("--config", config, "calibration file")->required()->check(CLI::ExistingFile);
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const auto cal = load_calibration(config);
    const std::vector<std::pair<const char*, std::function<outcome(const calibration&)>>> criteria = {
        {"gap experiment", gap_criterion},
        {"eluder certificate", certificate_criterion},
        {"uniform strategy rate", uniform_rate_criterion},
        {"eluder pipeline end to end", eluder_pipeline_criterion},
        {"ball containment", containment_criterion},
        {"least squares concentration", concentration_criterion},
        {"model selection", modsel_criterion},
        {"property suites", property_criterion},
    };
    const std::set<int> chosen(only.begin(), only.end());
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i + 1);
        if (!chosen.empty() && !chosen.count(n)) continue;
        const auto start = std::chrono::steady_clock::now();
        outcome o;
        try {
            o = criteria[i].second(cal);
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
                  << o.detail << " [" << fmt("%.1f", secs) << " s]" << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
