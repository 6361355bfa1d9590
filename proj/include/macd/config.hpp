#ifndef MACD_CONFIG_HPP
#define MACD_CONFIG_HPP

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "macd/error.hpp"
#include "macd/model.hpp"
#include "macd/simulate.hpp"

namespace macd {

/// Declarative run configuration: a flat key=value file plus command-line
/// overrides. One `seed` key feeds every random stream in the pipeline.
struct RunConfig {
    // inputs
    std::string sc_expression;
    std::string sc_labels;
    std::string st_expression;
    std::string simulated_expression;  // optional: reuse a simulate run
    std::string simulated_proportions;
    // outputs
    std::string output_dir = "macd_out";
    std::string checkpoint;  // default: <output_dir>/model.macd
    std::string predictions; // default: <output_dir>/predictions.tsv
    // evaluation
    std::string truth;
    std::vector<std::pair<std::string, std::string>> methods; // (name, predictions path)
    // preprocessing
    size_t top_k = 200;
    double target_sum = 1e4;
    // stages
    PseudoSpotConfig sim;
    MacdConfig model;
    bool seed_set = false; // DECONV_SEED applies only while the config omits `seed`

    std::string checkpoint_path() const {
        return checkpoint.empty() ? output_dir + "/model.macd" : checkpoint;
    }
    std::string predictions_path() const {
        return predictions.empty() ? output_dir + "/predictions.tsv" : predictions;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ValidationError("config: " + key + " must be true/false, got '" + v + "'");
}

template <typename T>
T parse_number(const std::string& v, const std::string& key) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ValidationError("config: " + key + " has invalid numeric value '" + v + "'");
    return out;
}

inline std::vector<std::pair<std::string, std::string>> parse_methods(const std::string& v) {
    std::vector<std::pair<std::string, std::string>> out;
    size_t start = 0;
    while (start <= v.size()) {
        size_t comma = v.find(',', start);
        std::string item = trim(v.substr(start, comma == std::string::npos ? comma : comma - start));
        if (!item.empty()) {
            size_t eq = item.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
                throw ValidationError("config: methods entries must be name=path, got '" + item + "'");
            out.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace detail

inline void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_number;
    if (key == "sc_expression") cfg.sc_expression = value;
    else if (key == "sc_labels") cfg.sc_labels = value;
    else if (key == "st_expression") cfg.st_expression = value;
    else if (key == "simulated_expression") cfg.simulated_expression = value;
    else if (key == "simulated_proportions") cfg.simulated_proportions = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "checkpoint") cfg.checkpoint = value;
    else if (key == "predictions") cfg.predictions = value;
    else if (key == "truth") cfg.truth = value;
    else if (key == "methods") cfg.methods = detail::parse_methods(value);
    else if (key == "top_k") cfg.top_k = parse_number<size_t>(value, key);
    else if (key == "target_sum") cfg.target_sum = parse_number<double>(value, key);
    else if (key == "n_spots") cfg.sim.n_spots = parse_number<size_t>(value, key);
    else if (key == "cells_per_spot_min") cfg.sim.cells_per_spot_min = parse_number<size_t>(value, key);
    else if (key == "cells_per_spot_max") cfg.sim.cells_per_spot_max = parse_number<size_t>(value, key);
    else if (key == "seed") {
        const auto s = parse_number<uint64_t>(value, key);
        cfg.sim.seed = s;
        cfg.model.seed = s;
        cfg.seed_set = true;
    }
    else if (key == "latent_dim") cfg.model.latent_dim = parse_number<int>(value, key);
    else if (key == "encoder_hidden") cfg.model.encoder_hidden = parse_number<int>(value, key);
    else if (key == "decoder_hidden1") cfg.model.decoder_hidden[0] = parse_number<int>(value, key);
    else if (key == "decoder_hidden2") cfg.model.decoder_hidden[1] = parse_number<int>(value, key);
    else if (key == "head_hidden") cfg.model.head_hidden = parse_number<int>(value, key);
    else if (key == "mask_rate") cfg.model.mask_rate = parse_number<double>(value, key);
    else if (key == "lambda") cfg.model.lambda = parse_number<double>(value, key);
    else if (key == "grl_alpha") cfg.model.grl_alpha = parse_number<double>(value, key);
    else if (key == "lr") cfg.model.lr = parse_number<double>(value, key);
    else if (key == "batch_size") cfg.model.batch_size = parse_number<int>(value, key);
    else if (key == "epochs") cfg.model.epochs = parse_number<int>(value, key);
    else if (key == "use_mask") cfg.model.use_mask = parse_bool(value, key);
    else if (key == "use_adversarial") cfg.model.use_adversarial = parse_bool(value, key);
    else if (key == "full_reconstruction") cfg.model.full_reconstruction = parse_bool(value, key);
    else throw ValidationError("config: unknown key '" + key + "'");
}

/// key = value lines; '#' starts a comment; blank lines ignored.
inline void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(path, line_no, "expected key=value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw ParseError(path, line_no, "empty key");
        try {
            set_config_key(cfg, key, value);
        } catch (const ValidationError& e) {
            throw ParseError(path, line_no, e.what());
        }
    }
}

/// "key=value" strings from --set flags, applied in order.
inline void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) {
        size_t eq = o.find('=');
        if (eq == std::string::npos)
            throw ValidationError("--set expects key=value, got '" + o + "'");
        set_config_key(cfg, detail::trim(o.substr(0, eq)), detail::trim(o.substr(eq + 1)));
    }
}

/// DECONV_SEED provides the seed when the config never set one.
inline void apply_env_seed(RunConfig& cfg) {
    if (cfg.seed_set) return;
    const char* env = std::getenv("DECONV_SEED");
    if (!env) return;
    const auto s = detail::parse_number<uint64_t>(env, "DECONV_SEED");
    cfg.sim.seed = s;
    cfg.model.seed = s;
    cfg.seed_set = true;
}

} // namespace macd

#endif
