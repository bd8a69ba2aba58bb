#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "expplan/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Static experiment planning for contextual bandits"};
    app.set_version_flag("--version", expplan::kVersion);
    app.require_subcommand(1);

    std::string config;
    expplan::config_overrides ov;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::string out;

    const std::pair<const char*, const char*> commands[] = {
        {"plan", "build a static plan from offline contexts"},
        {"sample", "deploy a plan and record the sampled data"},
        {"evaluate", "extract a policy from a dataset and score it"},
        {"pipeline", "plan, sample, extract and score over many trials"},
        {"gap", "adaptive versus static sampling on the tree instance"},
        {"modsel", "model selection over a family of classes"},
        {"eluder", "independent sequences and eluder dimension estimates"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the master seed");
        sub->add_option("--trials", trials, "override the trial count");
        sub->add_option("--out", out, "override the output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(expplan::exit_status::config);
    }

    auto* sub = app.get_subcommands().front();
    ov.kind = sub->get_name();
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--trials")) ov.trials = trials;
    if (sub->count("--out")) ov.out = out;

    try {
        const auto cfg = expplan::load_config(config, ov);
        const auto res = expplan::run_experiment(cfg);
        std::cout << "wrote " << res.out_dir.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "expplan: " << e.what() << '\n';
        return static_cast<int>(expplan::status_for(e));
    }
}
