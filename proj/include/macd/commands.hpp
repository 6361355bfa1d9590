#ifndef MACD_COMMANDS_HPP
#define MACD_COMMANDS_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "macd/checkpoint.hpp"
#include "macd/config.hpp"
#include "macd/error.hpp"
#include "macd/io.hpp"
#include "macd/metrics.hpp"
#include "macd/preprocess.hpp"
#include "macd/simulate.hpp"
#include "macd/train.hpp"

// Pipeline commands. Each returns a process exit code:
//   0 success, 2 validation/input error, 3 I/O error, 4 numerical failure.

namespace macd {

namespace detail {

template <typename Fn>
int run_guarded(Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
}

inline void require_input(const std::string& path, const std::string& key) {
    if (path.empty()) throw ValidationError("config: " + key + " is not set");
    if (!std::filesystem::exists(path))
        throw ValidationError(key + ": no such file: " + path);
}

inline void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

/// Shared preprocessing for training: marker panel from the normalized
/// reference, gene intersection with the ST data, then identical
/// normalization of both sides.
struct PreparedTraining {
    ExpressionMatrix real_norm;
    SimulatedST sim_norm;
};

inline PreparedTraining prepare_training_data(const ExpressionMatrix& sc, const CellTypeLabels& labels,
                                              const ExpressionMatrix& st, SimulatedST sim,
                                              size_t top_k, double target_sum) {
    ExpressionMatrix sc_norm = normalize_log1p(sc, target_sum);
    GenePanel panel = select_marker_genes(sc_norm, labels, top_k);
    if (panel.top_k_capped)
        std::cout << "note: top_k exceeds gene count; using all " << panel.genes.size()
                  << " genes\n";

    // Panel genes present in the simulated matrix (all of them when the
    // simulation came from the same reference).
    const auto sim_idx = sim.expression.gene_index();
    std::vector<std::string> panel_in_sim;
    for (const auto& g : panel.genes)
        if (sim_idx.count(g)) panel_in_sim.push_back(g);
    if (panel_in_sim.empty())
        throw ValidationError("no marker-panel genes present in the simulated data");

    ExpressionMatrix sim_panel = restrict_genes(sim.expression, panel_in_sim);
    auto [st_aligned, sim_aligned] = align_genes(st, sim_panel);

    PreparedTraining prepared;
    prepared.real_norm = normalize_log1p(st_aligned, target_sum);
    prepared.sim_norm = std::move(sim);
    prepared.sim_norm.expression = normalize_log1p(sim_aligned, target_sum);
    return prepared;
}

} // namespace detail

inline int cmd_simulate(const RunConfig& cfg) {
    return detail::run_guarded([&] {
        detail::require_input(cfg.sc_expression, "sc_expression");
        detail::require_input(cfg.sc_labels, "sc_labels");

        ExpressionMatrix sc = load_expression_matrix(cfg.sc_expression);
        CellTypeLabels labels = load_labels(cfg.sc_labels);
        SimulatedST sim = simulate_pseudospots(sc, labels, cfg.sim);

        detail::ensure_output_dir(cfg.output_dir);
        const std::string expr_path = cfg.output_dir + "/simulated_expression.tsv";
        const std::string prop_path = cfg.output_dir + "/simulated_proportions.tsv";
        save_expression_matrix(expr_path, sim.expression);
        save_proportion_matrix(prop_path, sim.proportions);

        std::cout << "simulated " << sim.expression.n_rows() << " spots x "
                  << sim.expression.n_genes() << " genes ("
                  << sim.proportions.n_types() << " cell types)\n"
                  << "dropout_rate\t" << detail::format_double(dropout_rate(sim.expression)) << '\n'
                  << "wrote " << expr_path << '\n'
                  << "wrote " << prop_path << '\n';
    });
}

inline int cmd_train(const RunConfig& cfg) {
    return detail::run_guarded([&] {
        detail::require_input(cfg.sc_expression, "sc_expression");
        detail::require_input(cfg.sc_labels, "sc_labels");
        detail::require_input(cfg.st_expression, "st_expression");

        ExpressionMatrix sc = load_expression_matrix(cfg.sc_expression);
        CellTypeLabels labels = load_labels(cfg.sc_labels);
        ExpressionMatrix st = load_expression_matrix(cfg.st_expression);

        SimulatedST sim;
        if (!cfg.simulated_expression.empty() || !cfg.simulated_proportions.empty()) {
            detail::require_input(cfg.simulated_expression, "simulated_expression");
            detail::require_input(cfg.simulated_proportions, "simulated_proportions");
            sim.expression = load_expression_matrix(cfg.simulated_expression);
            sim.proportions = load_proportion_matrix(cfg.simulated_proportions);
            if (sim.expression.row_ids != sim.proportions.spot_ids)
                throw ValidationError("simulated expression and proportions disagree on spot ids");
        } else {
            sim = simulate_pseudospots(sc, labels, cfg.sim);
        }

        detail::PreparedTraining prepared = detail::prepare_training_data(
            sc, labels, st, std::move(sim), cfg.top_k, cfg.target_sum);
        std::cout << "training on " << prepared.real_norm.n_rows() << " real spots, "
                  << prepared.sim_norm.expression.n_rows() << " simulated spots, "
                  << prepared.real_norm.n_genes() << " genes\n";

        TrainedModel model = train(prepared.real_norm, prepared.sim_norm, cfg.model);
        model.target_sum = cfg.target_sum;

        detail::ensure_output_dir(cfg.output_dir);
        save_checkpoint(cfg.checkpoint_path(), model);

        const std::string loss_path = cfg.output_dir + "/loss_history.tsv";
        std::ofstream loss_out(loss_path, std::ios::binary);
        if (!loss_out) throw IoError("cannot open for writing: " + loss_path);
        loss_out << "epoch\tstage1\tstage2\n";
        for (size_t e = 0; e < model.loss_history.size(); ++e)
            loss_out << (e + 1) << '\t' << detail::format_double(model.loss_history[e].stage1) << '\t'
                     << detail::format_double(model.loss_history[e].stage2) << '\n';
        if (!loss_out) throw IoError("write failed: " + loss_path);

        std::cout << "completed " << model.loss_history.size() << " epochs; final losses stage1="
                  << detail::format_double(model.loss_history.back().stage1)
                  << " stage2=" << detail::format_double(model.loss_history.back().stage2) << '\n'
                  << "wrote " << cfg.checkpoint_path() << '\n'
                  << "wrote " << loss_path << '\n';
    });
}

inline int cmd_predict(const RunConfig& cfg) {
    return detail::run_guarded([&] {
        detail::require_input(cfg.checkpoint_path(), "checkpoint");
        detail::require_input(cfg.st_expression, "st_expression");

        TrainedModel model = load_checkpoint(cfg.checkpoint_path());
        ExpressionMatrix st = load_expression_matrix(cfg.st_expression);

        // Same transform the training data saw: align to the model panel,
        // then row-normalize and log over exactly those genes.
        ExpressionMatrix aligned = restrict_genes(st, model.gene_order);
        ExpressionMatrix st_norm = normalize_log1p(aligned, model.target_sum);

        ProportionMatrix pred = predict(model, st_norm);
        pred.validate(1e-6);

        detail::ensure_output_dir(cfg.output_dir);
        save_proportion_matrix(cfg.predictions_path(), pred);
        std::cout << "predicted proportions for " << pred.n_spots() << " spots x "
                  << pred.n_types() << " cell types\n"
                  << "wrote " << cfg.predictions_path() << '\n';
    });
}

inline int cmd_evaluate(const RunConfig& cfg) {
    return detail::run_guarded([&] {
        detail::require_input(cfg.predictions_path(), "predictions");
        detail::require_input(cfg.truth, "truth");

        ProportionMatrix pred = load_proportion_matrix(cfg.predictions_path());
        ProportionMatrix truth = load_proportion_matrix(cfg.truth);
        metrics::EvaluationReport report = metrics::evaluate(pred, truth);

        detail::ensure_output_dir(cfg.output_dir);
        const std::string report_path = cfg.output_dir + "/evaluation_report.tsv";
        metrics::save_report(report_path, report);

        std::cout << "pcc\t" << detail::format_double(report.averages.pcc) << '\n'
                  << "ssim\t" << detail::format_double(report.averages.ssim) << '\n'
                  << "rmse\t" << detail::format_double(report.averages.rmse) << '\n'
                  << "js\t" << detail::format_double(report.averages.js) << '\n'
                  << "wrote " << report_path << '\n';
    });
}

inline int cmd_benchmark(const RunConfig& cfg) {
    return detail::run_guarded([&] {
        detail::require_input(cfg.truth, "truth");
        if (cfg.methods.empty())
            throw ValidationError("config: benchmark needs at least one methods entry");

        ProportionMatrix truth = load_proportion_matrix(cfg.truth);
        std::map<std::string, metrics::MethodAverages> table;
        for (const auto& [name, path] : cfg.methods) {
            detail::require_input(path, "methods entry '" + name + "'");
            ProportionMatrix pred = load_proportion_matrix(path);
            table[name] = metrics::evaluate(pred, truth).averages;
        }
        std::map<std::string, double> as = metrics::accuracy_score(table);

        std::vector<std::string> order;
        for (const auto& [name, avg] : table) order.push_back(name);
        std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
            if (as.at(a) != as.at(b)) return as.at(a) > as.at(b);
            return a < b;
        });

        detail::ensure_output_dir(cfg.output_dir);
        const std::string path = cfg.output_dir + "/benchmark.tsv";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + path);
        out << "method\tpcc\tssim\trmse\tjs\tas\n";
        for (const auto& name : order) {
            const auto& m = table.at(name);
            out << name << '\t' << detail::format_double(m.pcc) << '\t'
                << detail::format_double(m.ssim) << '\t' << detail::format_double(m.rmse) << '\t'
                << detail::format_double(m.js) << '\t' << detail::format_double(as.at(name)) << '\n';
        }
        if (!out) throw IoError("write failed: " + path);

        for (const auto& name : order)
            std::cout << name << "\tAS=" << detail::format_double(as.at(name)) << '\n';
        std::cout << "wrote " << path << '\n';
    });
}

} // namespace macd

#endif
