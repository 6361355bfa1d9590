#ifndef MACD_METRICS_HPP
#define MACD_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "macd/error.hpp"
#include "macd/io.hpp"
#include "macd/types.hpp"

// Per-cell-type agreement metrics between predicted and true proportion maps,
// each computed over spots for one cell-type column, then averaged across
// types. AS aggregates the four averages across methods by normalized rank.

namespace macd::metrics {

namespace detail {

inline void check_pair(const std::vector<double>& x, const std::vector<double>& y, size_t min_len,
                       const char* name) {
    if (x.size() != y.size()) throw ValidationError(std::string(name) + ": length mismatch");
    if (x.size() < min_len)
        throw ValidationError(std::string(name) + ": need at least " + std::to_string(min_len) +
                              " entries");
}

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Min-max scale to [0,1]; a constant vector scales to all zeros.
inline std::vector<double> minmax_scale(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    std::vector<double> out(v.size(), 0.0);
    if (*hi > *lo) {
        const double span = *hi - *lo;
        for (size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / span;
    }
    return out;
}

} // namespace detail

/// Pearson correlation; 0 when either vector is constant.
inline double pcc(const std::vector<double>& x, const std::vector<double>& x_hat) {
    detail::check_pair(x, x_hat, 2, "pcc");
    const double mx = detail::mean(x), my = detail::mean(x_hat);
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = x_hat[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    const double denom = std::sqrt(vx) * std::sqrt(vy);
    return denom == 0.0 ? 0.0 : cov / denom;
}

/// Structural similarity on vectors min-max scaled to [0,1], with the constants
/// C1 = 0.01 and C2 = 0.03 matched to that unit range. Population statistics.
inline double ssim(const std::vector<double>& x, const std::vector<double>& x_hat) {
    detail::check_pair(x, x_hat, 2, "ssim");
    constexpr double c1 = 0.01, c2 = 0.03;
    const std::vector<double> a = detail::minmax_scale(x);
    const std::vector<double> b = detail::minmax_scale(x_hat);
    const double ma = detail::mean(a), mb = detail::mean(b);
    const double n = static_cast<double>(a.size());
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    cov /= n;
    va /= n;
    vb /= n;
    return ((2.0 * mb * ma + c1) * (2.0 * cov + c2)) /
           ((mb * mb + ma * ma + c1) * (vb + va + c2));
}

inline double rmse(const std::vector<double>& x, const std::vector<double>& x_hat) {
    detail::check_pair(x, x_hat, 1, "rmse");
    double total = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x_hat[i];
        total += d * d;
    }
    return std::sqrt(total / static_cast<double>(x.size()));
}

/// Jensen-Shannon divergence, base-2 logs, after normalizing each vector to a
/// distribution over spots. Bounded in [0,1]; 0*log(0/q) = 0.
inline double js(const std::vector<double>& x, const std::vector<double>& x_hat) {
    detail::check_pair(x, x_hat, 1, "js");
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] < 0.0 || x_hat[i] < 0.0) throw ValidationError("js: negative entry");
        sx += x[i];
        sy += x_hat[i];
    }
    if (sx <= 0.0 || sy <= 0.0) throw ValidationError("js: zero-sum vector");

    double total = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double p = x[i] / sx;
        const double q = x_hat[i] / sy;
        const double m = 0.5 * (p + q);
        if (p > 0.0) total += 0.5 * p * std::log2(p / m);
        if (q > 0.0) total += 0.5 * q * std::log2(q / m);
    }
    return total;
}

struct MethodAverages {
    double pcc = 0.0;
    double ssim = 0.0;
    double rmse = 0.0;
    double js = 0.0;
};

/// Composite accuracy score per Eq-style rank aggregation: per metric, methods
/// get ranks 1..N with the best at N (largest PCC/SSIM, smallest RMSE/JS),
/// ties averaged; AS is the mean of the four ranks normalized by N.
inline std::map<std::string, double> accuracy_score(
    const std::map<std::string, MethodAverages>& table) {
    if (table.empty()) throw ValidationError("accuracy_score: no methods");
    const size_t n = table.size();

    std::vector<std::string> names;
    names.reserve(n);
    for (const auto& [name, avg] : table) names.push_back(name);

    std::map<std::string, double> rank_sum;
    auto add_ranks = [&](auto key, bool higher_is_better) {
        // Sort so the best method comes last; position (1-based) is the rank.
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), size_t{0});
        auto value = [&](size_t i) { return key(table.at(names[i])); };
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return higher_is_better ? value(a) < value(b) : value(a) > value(b);
        });
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && value(order[j + 1]) == value(order[i])) ++j;
            const double tied_rank = static_cast<double>(i + 1 + j + 1) / 2.0;
            for (size_t k = i; k <= j; ++k) rank_sum[names[order[k]]] += tied_rank;
            i = j + 1;
        }
    };
    add_ranks([](const MethodAverages& m) { return m.pcc; }, true);
    add_ranks([](const MethodAverages& m) { return m.ssim; }, true);
    add_ranks([](const MethodAverages& m) { return m.rmse; }, false);
    add_ranks([](const MethodAverages& m) { return m.js; }, false);

    std::map<std::string, double> as;
    for (const auto& [name, total] : rank_sum)
        as[name] = total / 4.0 / static_cast<double>(n);
    return as;
}

struct EvaluationReport {
    std::vector<std::string> type_order;
    std::vector<MethodAverages> per_type; // parallel to type_order
    MethodAverages averages;
};

/// Evaluate a prediction against ground truth, per cell-type column over
/// spots. Spot IDs must agree as sets; prediction rows/columns are reordered
/// to the truth's order first.
inline EvaluationReport evaluate(const ProportionMatrix& pred, const ProportionMatrix& truth) {
    if (pred.n_spots() != truth.n_spots())
        throw ValidationError("evaluate: spot counts differ");
    if (pred.n_types() != truth.n_types())
        throw ValidationError("evaluate: type counts differ");

    std::unordered_map<std::string, size_t> pred_spot;
    for (size_t i = 0; i < pred.spot_ids.size(); ++i) pred_spot.emplace(pred.spot_ids[i], i);
    std::vector<size_t> row_of(truth.n_spots());
    for (size_t i = 0; i < truth.spot_ids.size(); ++i) {
        auto it = pred_spot.find(truth.spot_ids[i]);
        if (it == pred_spot.end())
            throw ValidationError("evaluate: prediction is missing spot '" + truth.spot_ids[i] + "'");
        row_of[i] = it->second;
    }

    std::unordered_map<std::string, size_t> pred_type;
    for (size_t j = 0; j < pred.type_order.size(); ++j) pred_type.emplace(pred.type_order[j], j);
    std::vector<size_t> col_of(truth.n_types());
    for (size_t j = 0; j < truth.type_order.size(); ++j) {
        auto it = pred_type.find(truth.type_order[j]);
        if (it == pred_type.end())
            throw ValidationError("evaluate: prediction is missing type '" + truth.type_order[j] + "'");
        col_of[j] = it->second;
    }

    EvaluationReport report;
    report.type_order = truth.type_order;
    const size_t n_spots = truth.n_spots();
    std::vector<double> t_col(n_spots), p_col(n_spots);
    for (size_t j = 0; j < truth.n_types(); ++j) {
        for (size_t i = 0; i < n_spots; ++i) {
            t_col[i] = truth.values(i, j);
            p_col[i] = pred.values(row_of[i], col_of[j]);
        }
        MethodAverages m;
        m.pcc = pcc(t_col, p_col);
        m.ssim = ssim(t_col, p_col);
        m.rmse = rmse(t_col, p_col);
        m.js = js(t_col, p_col);
        report.per_type.push_back(m);
        report.averages.pcc += m.pcc;
        report.averages.ssim += m.ssim;
        report.averages.rmse += m.rmse;
        report.averages.js += m.js;
    }
    const double k = static_cast<double>(report.per_type.size());
    report.averages.pcc /= k;
    report.averages.ssim /= k;
    report.averages.rmse /= k;
    report.averages.js /= k;
    return report;
}

/// Report TSV: one row per cell type plus an AVERAGE row.
inline void save_report(const std::string& path, const EvaluationReport& report) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "cell_type\tpcc\tssim\trmse\tjs\n";
    auto line = [&](const std::string& name, const MethodAverages& m) {
        out << name << '\t' << macd::detail::format_double(m.pcc) << '\t'
            << macd::detail::format_double(m.ssim) << '\t' << macd::detail::format_double(m.rmse)
            << '\t' << macd::detail::format_double(m.js) << '\n';
    };
    for (size_t j = 0; j < report.type_order.size(); ++j) line(report.type_order[j], report.per_type[j]);
    line("AVERAGE", report.averages);
    if (!out) throw IoError("write failed: " + path);
}

} // namespace macd::metrics

#endif
