#ifndef MACD_TRAIN_HPP
#define MACD_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "macd/error.hpp"
#include "macd/model.hpp"
#include "macd/nn/adam.hpp"
#include "macd/preprocess.hpp"
#include "macd/random.hpp"
#include "macd/simulate.hpp"
#include "macd/types.hpp"

namespace macd {

struct EpochLoss {
    double stage1 = 0.0;
    double stage2 = 0.0;
};

struct TrainedModel {
    MacdParams params; // BN running stats frozen at the state after the last epoch
    MacdConfig config;
    std::vector<std::string> gene_order;
    std::vector<std::string> type_order;
    std::vector<EpochLoss> loss_history;
    double target_sum = 1e4; // normalization applied to inputs before training
};

namespace detail {

// Seed-stream tags; changing these changes every trained model bit-for-bit.
constexpr uint64_t kTagMask = 1;
constexpr uint64_t kTagShuffleReal = 2;
constexpr uint64_t kTagShuffleSim = 3;
constexpr uint64_t kTagShuffleStage2 = 4;

inline Matrix gather_rows(const Matrix& src, const std::vector<size_t>& order, size_t begin,
                          size_t end) {
    Matrix out(end - begin, src.cols());
    for (size_t i = begin; i < end; ++i) {
        const double* r = src.row(order[i]);
        std::copy(r, r + src.cols(), out.row(i - begin));
    }
    return out;
}

inline MaskMatrix gather_mask_rows(const MaskMatrix& src, const std::vector<size_t>& order,
                                   size_t begin, size_t end) {
    MaskMatrix out;
    out.rows = end - begin;
    out.cols = src.cols;
    out.mask_rate = src.mask_rate;
    out.entries.resize(out.rows * out.cols);
    for (size_t i = begin; i < end; ++i) {
        const uint8_t* r = src.entries.data() + order[i] * src.cols;
        std::copy(r, r + src.cols, out.entries.data() + (i - begin) * out.cols);
    }
    return out;
}

/// Shuffled index sequence cycled out to `length` entries.
inline std::vector<size_t> cycled_order(size_t n, size_t length, uint64_t seed) {
    std::vector<size_t> base(n);
    std::iota(base.begin(), base.end(), size_t{0});
    Rng rng(seed);
    rng.shuffle(base);
    std::vector<size_t> out(length);
    for (size_t i = 0; i < length; ++i) out[i] = base[i % n];
    return out;
}

class AdamBank {
public:
    AdamBank(MacdParams& params, double lr) {
        hyper_.lr = lr;
        for (auto& [name, tensor] : learnable_tensors(params)) states_[name].reset_like(*tensor);
    }

    void step(const NamedTensors& params, const NamedTensors& grads) {
        for (size_t i = 0; i < params.size(); ++i)
            nn::adam_step(*params[i].second, *grads[i].second, states_.at(params[i].first), hyper_,
                          params[i].first);
    }

private:
    nn::AdamHyper hyper_;
    std::unordered_map<std::string, nn::AdamState> states_;
};

inline bool starts_with_any(const std::string& name, std::initializer_list<const char*> prefixes) {
    for (const char* p : prefixes)
        if (name.rfind(p, 0) == 0) return true;
    return false;
}

/// Batch end index; absorbs a trailing single row into the current batch so
/// batch normalization never sees a training batch of size 1.
inline size_t batch_end(size_t begin, size_t batch, size_t total) {
    size_t end = std::min(begin + batch, total);
    if (total - end == 1) end = total;
    return end;
}

inline NamedTensors filter_tensors(const NamedTensors& all,
                                   std::initializer_list<const char*> prefixes) {
    NamedTensors out;
    for (const auto& nt : all)
        if (starts_with_any(nt.first, prefixes)) out.push_back(nt);
    return out;
}

} // namespace detail

/// Two-phase alternating training. Per epoch: a fresh random mask over the
/// real matrix, then (phase 1) adversarial reconstruction steps over paired
/// real/simulated batches with the smaller set cycled, then (phase 2)
/// supervised steps over the simulated batches. Stops at cfg.epochs, or early
/// once both epoch losses have moved < 1e-5 for 10 consecutive epochs.
/// Bit-identical results for a fixed config.
inline TrainedModel train(const ExpressionMatrix& real_st, const SimulatedST& sim,
                          const MacdConfig& cfg) {
    cfg.validate();
    if (real_st.n_rows() == 0 || sim.expression.n_rows() == 0)
        throw ValidationError("train: empty input matrices");
    if (real_st.n_rows() < 2 || sim.expression.n_rows() < 2)
        throw ValidationError("train: batch normalization needs at least 2 rows per input");
    if (real_st.gene_names != sim.expression.gene_names)
        throw ValidationError("train: real and simulated matrices are not gene-aligned");
    if (sim.proportions.n_spots() != sim.expression.n_rows())
        throw ValidationError("train: simulated proportions and expression disagree on spot count");

    const size_t n_real = real_st.n_rows();
    const size_t n_sim = sim.expression.n_rows();
    const auto batch = static_cast<size_t>(cfg.batch_size);

    TrainedModel model;
    model.config = cfg;
    model.gene_order = real_st.gene_names;
    model.type_order = sim.proportions.type_order;
    model.params.init(real_st.n_genes(), sim.proportions.n_types(), cfg);

    detail::AdamBank adam(model.params, cfg.lr);
    const NamedTensors all_params = learnable_tensors(model.params);

    MacdGrads grads;
    grads.reset_like(model.params);
    NamedTensors all_grads = gradient_tensors(grads);

    const auto stage1_prefixes = {"encoder.", "decoder.", "classifier.", "discriminator."};
    const auto stage2_prefixes = {"encoder.", "predictor."};
    const NamedTensors s1_params = detail::filter_tensors(all_params, stage1_prefixes);
    const NamedTensors s1_grads = detail::filter_tensors(all_grads, stage1_prefixes);
    const NamedTensors s2_params = detail::filter_tensors(all_params, stage2_prefixes);
    const NamedTensors s2_grads = detail::filter_tensors(all_grads, stage2_prefixes);

    auto zero_grads = [&] {
        for (auto& [name, g] : all_grads) g->fill(0.0);
    };

    int stable_epochs = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto e = static_cast<uint64_t>(epoch);

        const MaskMatrix mask = make_mask(n_real, real_st.n_genes(),
                                          cfg.use_mask ? cfg.mask_rate : 0.0,
                                          derive_seed(cfg.seed, detail::kTagMask, e));

        // Phase 1: the larger set defines the epoch; the smaller is cycled so
        // every step sees both label classes at matched size.
        const size_t span = std::max(n_real, n_sim);
        const auto real_order =
            detail::cycled_order(n_real, span, derive_seed(cfg.seed, detail::kTagShuffleReal, e));
        const auto sim_order =
            detail::cycled_order(n_sim, span, derive_seed(cfg.seed, detail::kTagShuffleSim, e));

        double stage1_total = 0.0;
        size_t stage1_steps = 0;
        for (size_t begin = 0; begin < span;) {
            const size_t end = detail::batch_end(begin, batch, span);
            Matrix real_batch = detail::gather_rows(real_st.values, real_order, begin, end);
            MaskMatrix mask_batch = detail::gather_mask_rows(mask, real_order, begin, end);
            Matrix sim_batch = detail::gather_rows(sim.expression.values, sim_order, begin, end);

            zero_grads();
            Stage1Result r =
                stage1_loss(model.params, real_batch, mask_batch, sim_batch, cfg, &grads);
            if (!std::isfinite(r.total))
                throw NumericError("train: non-finite stage-1 loss at epoch " +
                                   std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(stage1_steps + 1));
            adam.step(s1_params, s1_grads);
            stage1_total += r.total;
            ++stage1_steps;
            begin = end;
        }

        // Phase 2: supervised proportion regression over the simulated spots.
        const auto s2_order =
            detail::cycled_order(n_sim, n_sim, derive_seed(cfg.seed, detail::kTagShuffleStage2, e));
        double stage2_total = 0.0;
        size_t stage2_steps = 0;
        for (size_t begin = 0; begin < n_sim;) {
            const size_t end = detail::batch_end(begin, batch, n_sim);
            Matrix sim_batch = detail::gather_rows(sim.expression.values, s2_order, begin, end);
            Matrix y_batch = detail::gather_rows(sim.proportions.values, s2_order, begin, end);

            zero_grads();
            double loss = stage2_loss(model.params, sim_batch, y_batch, &grads);
            if (!std::isfinite(loss))
                throw NumericError("train: non-finite stage-2 loss at epoch " +
                                   std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(stage2_steps + 1));
            adam.step(s2_params, s2_grads);
            stage2_total += loss;
            ++stage2_steps;
            begin = end;
        }

        EpochLoss ep;
        ep.stage1 = stage1_total / static_cast<double>(stage1_steps);
        ep.stage2 = stage2_total / static_cast<double>(stage2_steps);
        model.loss_history.push_back(ep);

        if (model.loss_history.size() >= 2) {
            const EpochLoss& prev = model.loss_history[model.loss_history.size() - 2];
            const bool stable = std::abs(ep.stage1 - prev.stage1) < 1e-5 &&
                                std::abs(ep.stage2 - prev.stage2) < 1e-5;
            stable_epochs = stable ? stable_epochs + 1 : 0;
            if (stable_epochs >= 10) break;
        }
    }
    return model;
}

/// Apply a trained model to an expression matrix whose genes can be reordered
/// to the model's gene_order. Rows of the result are softmax outputs.
inline ProportionMatrix predict(const TrainedModel& model, const ExpressionMatrix& x) {
    ProportionMatrix result;
    result.type_order = model.type_order;
    if (x.gene_names == model.gene_order) {
        result.spot_ids = x.row_ids;
        result.values = predict_proportions(model.params, x.values);
    } else {
        ExpressionMatrix aligned = restrict_genes(x, model.gene_order);
        result.spot_ids = std::move(aligned.row_ids);
        result.values = predict_proportions(model.params, aligned.values);
    }
    return result;
}

} // namespace macd

#endif
