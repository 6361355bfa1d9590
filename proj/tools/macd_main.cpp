// Command-line entry point: simulate, train, predict, evaluate, benchmark.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "macd/commands.hpp"
#include "macd/config.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    bool no_mask = false;
    bool no_adversarial = false;
    bool full_reconstruction = false;
};

void add_common_options(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "Run configuration file (key=value lines)");
    cmd->add_option("--set", opts.overrides, "Override a config key, e.g. --set seed=7")
        ->take_all();
}

macd::RunConfig build_config(const CliOptions& opts) {
    macd::RunConfig cfg;
    if (!opts.config_path.empty()) macd::load_config_file(cfg, opts.config_path);
    macd::apply_overrides(cfg, opts.overrides);
    if (opts.no_mask) cfg.model.use_mask = false;
    if (opts.no_adversarial) cfg.model.use_adversarial = false;
    if (opts.full_reconstruction) cfg.model.full_reconstruction = true;
    macd::apply_env_seed(cfg);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MACD: masked adversarial cell-type deconvolution for spatial transcriptomics"};
    app.require_subcommand(1);

    CliOptions sim_opts, train_opts, predict_opts, eval_opts, bench_opts;

    CLI::App* sim = app.add_subcommand("simulate", "Generate labeled pseudo-spots from a single-cell reference");
    add_common_options(sim, sim_opts);

    CLI::App* train = app.add_subcommand("train", "Preprocess, simulate if needed, and train the model");
    add_common_options(train, train_opts);
    train->add_flag("--no-mask", train_opts.no_mask, "Disable input masking (reconstruct the full input)");
    train->add_flag("--no-adversarial", train_opts.no_adversarial, "Drop the classifier/discriminator losses");
    train->add_flag("--full-reconstruction", train_opts.full_reconstruction,
                    "Compute reconstruction loss over all entries, not just masked ones");

    CLI::App* predict = app.add_subcommand("predict", "Apply a trained checkpoint to ST expression data");
    add_common_options(predict, predict_opts);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Score predictions against ground-truth proportions");
    add_common_options(evaluate, eval_opts);

    CLI::App* benchmark = app.add_subcommand("benchmark", "Rank several methods' predictions by accuracy score");
    add_common_options(benchmark, bench_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return macd::cmd_simulate(build_config(sim_opts));
        if (train->parsed()) return macd::cmd_train(build_config(train_opts));
        if (predict->parsed()) return macd::cmd_predict(build_config(predict_opts));
        if (evaluate->parsed()) return macd::cmd_evaluate(build_config(eval_opts));
        if (benchmark->parsed()) return macd::cmd_benchmark(build_config(bench_opts));
    } catch (const macd::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
