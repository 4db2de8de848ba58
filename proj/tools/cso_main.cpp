#include <CLI11.hpp>
#include <cstdio>

#include "ucso/harness/experiments.hpp"
#include "ucso/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Unbiased conditional-stochastic-optimization experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    ucso::harness::RunOptions opt;
    opt.workers = ucso::hardware_workers();
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Run an experiment from a config file");
    run->add_option("config", config_path, "Config file path")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Master seed override");
    run->add_option("--out-dir", opt.out_dir, "Output directory override");
    run->add_option("--workers", opt.workers, "Worker threads for replicate scheduling")
        ->check(CLI::PositiveNumber);
    run->add_option("--format", opt.format, "Output formats override")
        ->check(CLI::IsMember({"csv", "csv+plot"}));

    auto* validate = app.add_subcommand("validate", "Validate a config file and exit");
    validate->add_option("config", config_path, "Config file path")->required();

    auto* list = app.add_subcommand("list-experiments", "List available experiment kinds");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& name : ucso::harness::experiment_names()) std::printf("%s\n", name.c_str());
        return 0;
    }

    ucso::harness::ExperimentConfig cfg;
    try {
        cfg = ucso::harness::load_config(config_path);
    } catch (const ucso::harness::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
    if (validate->parsed()) {
        std::printf("ok: %s\n", ucso::harness::to_string(cfg.kind).c_str());
        return 0;
    }

    opt.has_seed = seed_opt->count() > 0;
    opt.seed = seed;
    ucso::harness::RunResult result = ucso::harness::run_experiment(cfg, opt);
    for (const auto& path : result.outputs) std::printf("wrote %s\n", path.c_str());
    if (!result.ok) {
        std::fprintf(stderr, "run failed (partial output flushed): %s\n", result.error.c_str());
        return 3;
    }
    if (result.truncated) std::fprintf(stderr, "note: per-estimate cost cap hit; run marked truncated\n");
    return 0;
}
