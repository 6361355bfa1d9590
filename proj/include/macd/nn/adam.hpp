#ifndef MACD_NN_ADAM_HPP
#define MACD_NN_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include "macd/error.hpp"
#include "macd/matrix.hpp"

namespace macd::nn {

struct AdamHyper {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Per-tensor moment accumulators. t counts the updates applied to this
/// tensor, which is what the bias correction needs when different parameter
/// groups are stepped at different rates.
struct AdamState {
    Matrix m, v;
    int64_t t = 0;

    void reset_like(const Matrix& param) {
        m = Matrix(param.rows(), param.cols());
        v = Matrix(param.rows(), param.cols());
        t = 0;
    }
};

inline void adam_step(Matrix& param, const Matrix& grad, AdamState& state, const AdamHyper& h,
                      const std::string& param_name) {
    if (!param.same_shape(grad) || !param.same_shape(state.m) || !param.same_shape(state.v))
        throw ValidationError("adam_step: shape mismatch for parameter '" + param_name + "'");
    if (!all_finite(grad))
        throw NumericError("adam_step: non-finite gradient for parameter '" + param_name + "'");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < param.size(); ++i) {
        const double g = grad.storage()[i];
        double& m = state.m.storage()[i];
        double& v = state.v.storage()[i];
        m = h.beta1 * m + (1.0 - h.beta1) * g;
        v = h.beta2 * v + (1.0 - h.beta2) * g * g;
        const double mhat = m / bc1;
        const double vhat = v / bc2;
        param.storage()[i] -= h.lr * mhat / (std::sqrt(vhat) + h.eps);
    }
}

} // namespace macd::nn

#endif
