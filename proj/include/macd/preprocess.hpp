#ifndef MACD_PREPROCESS_HPP
#define MACD_PREPROCESS_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "macd/error.hpp"
#include "macd/types.hpp"

namespace macd {

/// Scale each row to sum to target_sum, then apply ln(1+x) elementwise.
/// Zero rows pass through unchanged.
inline ExpressionMatrix normalize_log1p(const ExpressionMatrix& x, double target_sum = 1e4) {
    if (!(target_sum > 0.0)) throw ValidationError("normalize_log1p: target_sum must be positive");
    ExpressionMatrix out = x;
    for (size_t i = 0; i < out.values.rows(); ++i) {
        double* r = out.values.row(i);
        double total = 0.0;
        for (size_t j = 0; j < out.values.cols(); ++j) total += r[j];
        const double scale = total > 0.0 ? target_sum / total : 0.0;
        for (size_t j = 0; j < out.values.cols(); ++j) r[j] = std::log1p(r[j] * scale);
    }
    return out;
}

/// One-vs-rest mean-difference marker scoring on log-normalized data.
/// Per type, genes are ranked by mean(in type) - mean(out of type); ties break
/// lexicographically on the gene name. The panel is the deduplicated union in
/// type order, then rank order.
inline GenePanel select_marker_genes(const ExpressionMatrix& sc, const CellTypeLabels& labels,
                                     size_t top_k) {
    if (top_k == 0) throw ValidationError("select_marker_genes: top_k must be positive");
    if (labels.type_order.size() < 2)
        throw ValidationError("select_marker_genes: need at least two cell types");
    sc.validate();

    const size_t n_genes = sc.n_genes();
    const size_t n_cells = sc.n_rows();
    const auto type_idx = labels.type_index();

    // Per-type column sums and cell counts.
    const size_t n_types = labels.type_order.size();
    Matrix type_sums(n_types, n_genes);
    std::vector<size_t> type_counts(n_types, 0);
    for (size_t i = 0; i < n_cells; ++i) {
        const auto& type = labels.type_of(sc.row_ids[i]);
        const size_t t = type_idx.at(type);
        ++type_counts[t];
        const double* r = sc.values.row(i);
        double* s = type_sums.row(t);
        for (size_t j = 0; j < n_genes; ++j) s[j] += r[j];
    }
    for (size_t t = 0; t < n_types; ++t)
        if (type_counts[t] == 0)
            throw ValidationError("select_marker_genes: no cells of type '" + labels.type_order[t] + "'");

    Matrix totals = col_sums(sc.values);

    GenePanel panel;
    panel.top_k_capped = top_k > n_genes;
    const size_t k = std::min(top_k, n_genes);

    std::unordered_set<std::string> in_panel;
    for (size_t t = 0; t < n_types; ++t) {
        const double nt = static_cast<double>(type_counts[t]);
        const double nrest = static_cast<double>(n_cells - type_counts[t]);
        std::vector<std::pair<double, size_t>> scored(n_genes);
        for (size_t j = 0; j < n_genes; ++j) {
            const double mean_in = type_sums(t, j) / nt;
            const double mean_out = (totals(0, j) - type_sums(t, j)) / nrest;
            scored[j] = {mean_in - mean_out, j};
        }
        std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return sc.gene_names[a.second] < sc.gene_names[b.second];
        });
        auto& markers = panel.per_type_markers[labels.type_order[t]];
        markers.reserve(k);
        for (size_t r = 0; r < k; ++r) markers.push_back(sc.gene_names[scored[r].second]);
    }

    for (const auto& type : labels.type_order)
        for (const auto& g : panel.per_type_markers.at(type))
            if (in_panel.insert(g).second) panel.genes.push_back(g);
    return panel;
}

/// Subset and reorder columns to the given gene list.
/// Throws listing the genes the matrix is missing.
inline ExpressionMatrix restrict_genes(const ExpressionMatrix& x, const std::vector<std::string>& genes) {
    const auto idx = x.gene_index();
    std::vector<size_t> cols;
    cols.reserve(genes.size());
    std::string missing;
    for (const auto& g : genes) {
        auto it = idx.find(g);
        if (it == idx.end()) {
            if (!missing.empty()) missing += ", ";
            missing += g;
        } else {
            cols.push_back(it->second);
        }
    }
    if (!missing.empty()) throw ValidationError("missing genes: " + missing);

    ExpressionMatrix out;
    out.row_ids = x.row_ids;
    out.gene_names = genes;
    out.values = Matrix(x.n_rows(), genes.size());
    for (size_t i = 0; i < x.n_rows(); ++i) {
        const double* src = x.values.row(i);
        double* dst = out.values.row(i);
        for (size_t j = 0; j < cols.size(); ++j) dst[j] = src[cols[j]];
    }
    return out;
}

/// Restrict both matrices to the intersection of their gene sets, columns in
/// lexicographic order. Row sets are untouched.
inline std::pair<ExpressionMatrix, ExpressionMatrix> align_genes(const ExpressionMatrix& a,
                                                                 const ExpressionMatrix& b) {
    const auto b_idx = b.gene_index();
    std::vector<std::string> common;
    for (const auto& g : a.gene_names)
        if (b_idx.count(g)) common.push_back(g);
    if (common.empty()) throw ValidationError("align_genes: no genes in common");
    std::sort(common.begin(), common.end());
    return {restrict_genes(a, common), restrict_genes(b, common)};
}

/// Fraction of exactly-zero entries.
inline double dropout_rate(const ExpressionMatrix& x) {
    if (x.values.empty()) throw ValidationError("dropout_rate: empty matrix");
    size_t zeros = 0;
    for (double v : x.values.storage())
        if (v == 0.0) ++zeros;
    return static_cast<double>(zeros) / static_cast<double>(x.values.size());
}

} // namespace macd

#endif
