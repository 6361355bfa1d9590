#ifndef MACD_TYPES_HPP
#define MACD_TYPES_HPP

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "macd/error.hpp"
#include "macd/matrix.hpp"

namespace macd {

/// Nonnegative spots/cells x genes grid with row IDs and gene names.
struct ExpressionMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> gene_names;
    Matrix values; // row_ids.size() x gene_names.size()

    size_t n_rows() const { return row_ids.size(); }
    size_t n_genes() const { return gene_names.size(); }

    /// Index of each gene name; throws on duplicates.
    std::unordered_map<std::string, size_t> gene_index() const {
        std::unordered_map<std::string, size_t> idx;
        idx.reserve(gene_names.size());
        for (size_t j = 0; j < gene_names.size(); ++j) {
            if (!idx.emplace(gene_names[j], j).second)
                throw ValidationError("duplicate gene name: " + gene_names[j]);
        }
        return idx;
    }

    void validate() const {
        if (row_ids.size() != values.rows() || gene_names.size() != values.cols())
            throw ValidationError("expression matrix: label counts do not match value grid");
        std::unordered_set<std::string> seen;
        for (const auto& id : row_ids)
            if (!seen.insert(id).second) throw ValidationError("duplicate row id: " + id);
        seen.clear();
        for (const auto& g : gene_names)
            if (!seen.insert(g).second) throw ValidationError("duplicate gene name: " + g);
        for (double v : values.storage())
            if (v < 0.0) throw ValidationError("expression matrix: negative value");
    }
};

/// Cell -> cell-type assignment plus a deterministic type order
/// (first appearance in the label file).
struct CellTypeLabels {
    std::unordered_map<std::string, std::string> assignments;
    std::vector<std::string> type_order;

    size_t n_types() const { return type_order.size(); }

    const std::string& type_of(const std::string& cell_id) const {
        auto it = assignments.find(cell_id);
        if (it == assignments.end())
            throw ValidationError("cell id without a label: " + cell_id);
        return it->second;
    }

    std::unordered_map<std::string, size_t> type_index() const {
        std::unordered_map<std::string, size_t> idx;
        for (size_t t = 0; t < type_order.size(); ++t) idx.emplace(type_order[t], t);
        return idx;
    }
};

/// Marker panel: per-type ranked marker lists plus their deduplicated union.
struct GenePanel {
    std::vector<std::string> genes;
    std::map<std::string, std::vector<std::string>> per_type_markers;
    bool top_k_capped = false; // top_k exceeded the gene count; whole panel taken
};

/// Spots x cell-types row-stochastic matrix.
struct ProportionMatrix {
    std::vector<std::string> spot_ids;
    std::vector<std::string> type_order;
    Matrix values; // spot_ids.size() x type_order.size()

    size_t n_spots() const { return spot_ids.size(); }
    size_t n_types() const { return type_order.size(); }

    void validate(double row_sum_tol = 1e-6) const {
        if (spot_ids.size() != values.rows() || type_order.size() != values.cols())
            throw ValidationError("proportion matrix: label counts do not match value grid");
        for (size_t i = 0; i < values.rows(); ++i) {
            double s = 0.0;
            for (size_t j = 0; j < values.cols(); ++j) {
                if (values(i, j) < 0.0)
                    throw ValidationError("proportion matrix: negative entry in row " + spot_ids[i]);
                s += values(i, j);
            }
            if (std::abs(s - 1.0) > row_sum_tol)
                throw ValidationError("proportion matrix: row " + spot_ids[i] +
                                      " sums to " + std::to_string(s) + ", expected 1");
        }
    }
};

/// Binary grid marking masked entries (1 = masked).
struct MaskMatrix {
    size_t rows = 0, cols = 0;
    std::vector<uint8_t> entries; // rows * cols, row-major
    double mask_rate = 0.0;

    uint8_t operator()(size_t i, size_t j) const { return entries[i * cols + j]; }
    uint8_t& operator()(size_t i, size_t j) { return entries[i * cols + j]; }

    size_t count_masked() const {
        size_t n = 0;
        for (uint8_t b : entries) n += b;
        return n;
    }
};

} // namespace macd

#endif
