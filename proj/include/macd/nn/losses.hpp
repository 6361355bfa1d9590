#ifndef MACD_NN_LOSSES_HPP
#define MACD_NN_LOSSES_HPP

#include <cmath>
#include <string>

#include "macd/error.hpp"
#include "macd/matrix.hpp"
#include "macd/nn/layers.hpp"
#include "macd/types.hpp"

namespace macd::nn {

// ---------------------------------------------------------------------------
// Binary cross entropy, mean over entries. Predictions are clamped to
// [1e-7, 1-1e-7] before the log; the gradient is zero where the clamp engaged.
// ---------------------------------------------------------------------------

inline double bce(const Matrix& target, const Matrix& pred) {
    if (!target.same_shape(pred)) throw ValidationError("bce: shape mismatch");
    const size_t n = pred.size();
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double y = target.storage()[i];
        double p = pred.storage()[i];
        p = std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
        total += y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
    return -total / static_cast<double>(n);
}

/// dL/dpred for bce().
inline Matrix bce_grad(const Matrix& target, const Matrix& pred) {
    if (!target.same_shape(pred)) throw ValidationError("bce: shape mismatch");
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    Matrix g(pred.rows(), pred.cols());
    for (size_t i = 0; i < pred.size(); ++i) {
        const double y = target.storage()[i];
        const double p = pred.storage()[i];
        if (p < kProbClamp || p > 1.0 - kProbClamp) continue; // flat region of the clamp
        g.storage()[i] = -inv_n * (y / p - (1.0 - y) / (1.0 - p));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Squared-error losses with a mean convention, so the lambda weighting against
// BCE is independent of batch and mask size.
// ---------------------------------------------------------------------------

/// Mean of (x_hat - x)^2 over masked entries. An all-zero mask yields 0 and
/// raises the degenerate flag instead of dividing by zero.
inline double masked_mse(const Matrix& x_hat, const Matrix& x, const MaskMatrix& m,
                         bool* degenerate = nullptr) {
    if (!x_hat.same_shape(x) || m.rows != x.rows() || m.cols != x.cols())
        throw ValidationError("masked_mse: shape mismatch");
    double total = 0.0;
    size_t count = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        if (!m.entries[i]) continue;
        const double d = x_hat.storage()[i] - x.storage()[i];
        total += d * d;
        ++count;
    }
    if (degenerate) *degenerate = count == 0;
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

inline Matrix masked_mse_grad(const Matrix& x_hat, const Matrix& x, const MaskMatrix& m) {
    if (!x_hat.same_shape(x) || m.rows != x.rows() || m.cols != x.cols())
        throw ValidationError("masked_mse: shape mismatch");
    size_t count = 0;
    for (uint8_t b : m.entries) count += b;
    Matrix g(x.rows(), x.cols());
    if (count == 0) return g;
    const double scale = 2.0 / static_cast<double>(count);
    for (size_t i = 0; i < x.size(); ++i)
        if (m.entries[i]) g.storage()[i] = scale * (x_hat.storage()[i] - x.storage()[i]);
    return g;
}

/// Mean of (x_hat - x)^2 over all entries.
inline double mean_sq_err(const Matrix& x_hat, const Matrix& x) {
    if (!x_hat.same_shape(x)) throw ValidationError("mean_sq_err: shape mismatch");
    double total = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double d = x_hat.storage()[i] - x.storage()[i];
        total += d * d;
    }
    return total / static_cast<double>(x.size());
}

inline Matrix mean_sq_err_grad(const Matrix& x_hat, const Matrix& x) {
    if (!x_hat.same_shape(x)) throw ValidationError("mean_sq_err: shape mismatch");
    const double scale = 2.0 / static_cast<double>(x.size());
    Matrix g(x.rows(), x.cols());
    for (size_t i = 0; i < x.size(); ++i)
        g.storage()[i] = scale * (x_hat.storage()[i] - x.storage()[i]);
    return g;
}

} // namespace macd::nn

#endif
