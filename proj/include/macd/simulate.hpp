#ifndef MACD_SIMULATE_HPP
#define MACD_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "macd/error.hpp"
#include "macd/random.hpp"
#include "macd/types.hpp"

namespace macd {

struct PseudoSpotConfig {
    size_t n_spots = 8000;
    size_t cells_per_spot_min = 2;
    size_t cells_per_spot_max = 10;
    uint64_t seed = 0;

    void validate() const {
        if (n_spots < 1) throw ValidationError("simulation: n_spots must be >= 1");
        if (cells_per_spot_min < 1 || cells_per_spot_min > cells_per_spot_max)
            throw ValidationError("simulation: need 1 <= cells_per_spot_min <= cells_per_spot_max");
    }
};

/// Labeled pseudo-spots: aggregate expression, ground-truth proportions, and
/// the contributing cell IDs per spot.
struct SimulatedST {
    ExpressionMatrix expression;
    ProportionMatrix proportions;
    std::vector<std::vector<std::string>> composition;
};

/// Build pseudo-spots from a raw-count single-cell reference. Per spot, draw
/// k ~ uniform{min..max} cells uniformly with replacement, sum their rows, and
/// record per-type counts / k as the ground truth. One sequential seeded
/// stream: output is bit-identical for a fixed (seed, input row order).
inline SimulatedST simulate_pseudospots(const ExpressionMatrix& sc, const CellTypeLabels& labels,
                                        const PseudoSpotConfig& cfg) {
    cfg.validate();
    if (sc.n_rows() == 0) throw ValidationError("simulation: empty reference");
    sc.validate();

    const size_t n_cells = sc.n_rows();
    const size_t n_genes = sc.n_genes();
    const size_t n_types = labels.n_types();
    const auto type_idx = labels.type_index();

    // Per-cell type lookup up front so a missing label fails before any draws.
    std::vector<size_t> cell_type(n_cells);
    for (size_t i = 0; i < n_cells; ++i) cell_type[i] = type_idx.at(labels.type_of(sc.row_ids[i]));

    SimulatedST sim;
    sim.expression.gene_names = sc.gene_names;
    sim.expression.values = Matrix(cfg.n_spots, n_genes);
    sim.proportions.type_order = labels.type_order;
    sim.proportions.values = Matrix(cfg.n_spots, n_types);
    sim.composition.resize(cfg.n_spots);

    Rng rng(cfg.seed);
    std::vector<size_t> type_counts(n_types);
    for (size_t s = 0; s < cfg.n_spots; ++s) {
        const size_t k = static_cast<size_t>(rng.uniform_int(
            static_cast<int64_t>(cfg.cells_per_spot_min), static_cast<int64_t>(cfg.cells_per_spot_max)));
        std::fill(type_counts.begin(), type_counts.end(), size_t{0});
        double* expr = sim.expression.values.row(s);
        sim.composition[s].reserve(k);
        for (size_t c = 0; c < k; ++c) {
            const size_t cell = rng.index(n_cells);
            sim.composition[s].push_back(sc.row_ids[cell]);
            ++type_counts[cell_type[cell]];
            const double* src = sc.values.row(cell);
            for (size_t j = 0; j < n_genes; ++j) expr[j] += src[j];
        }
        double* prop = sim.proportions.values.row(s);
        for (size_t t = 0; t < n_types; ++t)
            prop[t] = static_cast<double>(type_counts[t]) / static_cast<double>(k);

        std::string id = "spot_" + std::to_string(s + 1);
        sim.expression.row_ids.push_back(id);
        sim.proportions.spot_ids.push_back(std::move(id));
    }
    return sim;
}

} // namespace macd

#endif
