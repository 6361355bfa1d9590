#ifndef MACD_NN_LAYERS_HPP
#define MACD_NN_LAYERS_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include "macd/error.hpp"
#include "macd/matrix.hpp"
#include "macd/random.hpp"

// Fixed-topology layer kernel. Every layer exposes an explicit forward that
// fills a cache and a backward that consumes it, so gradients stay checkable
// against finite differences in isolation.

namespace macd::nn {

// ---------------------------------------------------------------------------
// Dense: Y = X W + b
// ---------------------------------------------------------------------------

struct Dense {
    Matrix W; // in x out
    Matrix b; // 1 x out

    void init(size_t in_dim, size_t out_dim, Rng& rng) {
        W = Matrix(in_dim, out_dim);
        b = Matrix(1, out_dim);
        const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
        for (double& w : W.storage()) w = rng.uniform(-limit, limit);
    }

    size_t in_dim() const { return W.rows(); }
    size_t out_dim() const { return W.cols(); }
};

struct DenseGrads {
    Matrix W, b;

    void reset_like(const Dense& d) {
        W = Matrix(d.W.rows(), d.W.cols());
        b = Matrix(1, d.b.cols());
    }
};

struct DenseCache {
    Matrix x;
};

inline Matrix dense_forward(const Dense& layer, const Matrix& x, DenseCache* cache = nullptr) {
    if (x.cols() != layer.in_dim())
        throw ValidationError("dense_forward: input width " + std::to_string(x.cols()) +
                              " != layer in_dim " + std::to_string(layer.in_dim()));
    Matrix y = matmul(x, layer.W);
    add_row_vector(y, layer.b);
    if (cache) cache->x = x;
    return y;
}

/// Accumulates parameter gradients into `grads`; returns dL/dX.
inline Matrix dense_backward(const Dense& layer, const Matrix& dy, const DenseCache& cache,
                             DenseGrads& grads) {
    if (dy.rows() != cache.x.rows() || dy.cols() != layer.out_dim())
        throw ValidationError("dense_backward: upstream gradient shape mismatch");
    Matrix dW = matmul_tn(cache.x, dy);
    for (size_t i = 0; i < dW.size(); ++i) grads.W.storage()[i] += dW.storage()[i];
    Matrix db = col_sums(dy);
    for (size_t j = 0; j < db.cols(); ++j) grads.b(0, j) += db(0, j);
    return matmul_nt(dy, layer.W);
}

// ---------------------------------------------------------------------------
// BatchNorm. Training normalizes by the biased batch statistics and updates
// running stats by EMA; inference normalizes by the running stats.
// ---------------------------------------------------------------------------

struct BatchNorm {
    Matrix gamma, beta;             // 1 x features
    Matrix running_mean, running_var;
    double eps = 1e-5;
    double momentum = 0.1; // weight of the batch statistic in the EMA

    void init(size_t features) {
        gamma = Matrix(1, features, 1.0);
        beta = Matrix(1, features);
        running_mean = Matrix(1, features);
        running_var = Matrix(1, features, 1.0);
    }

    size_t features() const { return gamma.cols(); }
};

struct BatchNormGrads {
    Matrix gamma, beta;

    void reset_like(const BatchNorm& bn) {
        gamma = Matrix(1, bn.features());
        beta = Matrix(1, bn.features());
    }
};

struct BatchNormCache {
    Matrix xhat;    // normalized input
    Matrix inv_std; // 1 x features, 1/sqrt(var + eps)
    bool training = false;
};

inline Matrix batchnorm_forward(BatchNorm& bn, const Matrix& x, bool training,
                                BatchNormCache* cache = nullptr) {
    if (x.cols() != bn.features()) throw ValidationError("batchnorm_forward: feature width mismatch");
    const size_t n = x.rows(), f = x.cols();
    Matrix mean(1, f), var(1, f);
    if (training) {
        if (n < 2) throw ValidationError("batchnorm_forward: training batch must have >= 2 rows");
        mean = col_means(x);
        for (size_t i = 0; i < n; ++i) {
            const double* r = x.row(i);
            for (size_t j = 0; j < f; ++j) {
                const double d = r[j] - mean(0, j);
                var(0, j) += d * d;
            }
        }
        for (size_t j = 0; j < f; ++j) var(0, j) /= static_cast<double>(n);
        for (size_t j = 0; j < f; ++j) {
            bn.running_mean(0, j) = (1.0 - bn.momentum) * bn.running_mean(0, j) + bn.momentum * mean(0, j);
            bn.running_var(0, j) = (1.0 - bn.momentum) * bn.running_var(0, j) + bn.momentum * var(0, j);
        }
    } else {
        mean = bn.running_mean;
        var = bn.running_var;
    }

    Matrix inv_std(1, f);
    for (size_t j = 0; j < f; ++j) inv_std(0, j) = 1.0 / std::sqrt(var(0, j) + bn.eps);

    Matrix y(n, f);
    Matrix xhat(n, f);
    for (size_t i = 0; i < n; ++i) {
        const double* r = x.row(i);
        double* h = xhat.row(i);
        double* o = y.row(i);
        for (size_t j = 0; j < f; ++j) {
            h[j] = (r[j] - mean(0, j)) * inv_std(0, j);
            o[j] = bn.gamma(0, j) * h[j] + bn.beta(0, j);
        }
    }
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
        cache->training = training;
    }
    return y;
}

inline Matrix batchnorm_backward(const BatchNorm& bn, const Matrix& dy, const BatchNormCache& cache,
                                 BatchNormGrads& grads) {
    if (!cache.training)
        throw ValidationError("batchnorm_backward: cache was built in inference mode");
    const size_t n = dy.rows(), f = dy.cols();
    const double inv_n = 1.0 / static_cast<double>(n);

    // Column reductions of dxhat and dxhat*xhat, where dxhat = dy * gamma.
    Matrix sum_dxhat(1, f), sum_dxhat_xhat(1, f);
    for (size_t i = 0; i < n; ++i) {
        const double* dyr = dy.row(i);
        const double* xh = cache.xhat.row(i);
        for (size_t j = 0; j < f; ++j) {
            const double dxh = dyr[j] * bn.gamma(0, j);
            sum_dxhat(0, j) += dxh;
            sum_dxhat_xhat(0, j) += dxh * xh[j];
            grads.gamma(0, j) += dyr[j] * xh[j];
            grads.beta(0, j) += dyr[j];
        }
    }

    Matrix dx(n, f);
    for (size_t i = 0; i < n; ++i) {
        const double* dyr = dy.row(i);
        const double* xh = cache.xhat.row(i);
        double* out = dx.row(i);
        for (size_t j = 0; j < f; ++j) {
            const double dxh = dyr[j] * bn.gamma(0, j);
            out[j] = cache.inv_std(0, j) * inv_n *
                     (static_cast<double>(n) * dxh - sum_dxhat(0, j) - xh[j] * sum_dxhat_xhat(0, j));
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

struct LeakyReluCache {
    Matrix factor; // 1 where x >= 0, slope elsewhere
};

inline Matrix leaky_relu(const Matrix& x, double slope = 0.01, LeakyReluCache* cache = nullptr) {
    Matrix y(x.rows(), x.cols());
    Matrix factor(x.rows(), x.cols());
    for (size_t i = 0; i < x.size(); ++i) {
        const double v = x.storage()[i];
        const double fct = v >= 0.0 ? 1.0 : slope;
        factor.storage()[i] = fct;
        y.storage()[i] = fct * v;
    }
    if (cache) cache->factor = std::move(factor);
    return y;
}

inline Matrix leaky_relu_backward(const Matrix& dy, const LeakyReluCache& cache) {
    Matrix dx(dy.rows(), dy.cols());
    for (size_t i = 0; i < dy.size(); ++i)
        dx.storage()[i] = dy.storage()[i] * cache.factor.storage()[i];
    return dx;
}

struct SigmoidCache {
    Matrix deriv; // s*(1-s), zero where the output clamp engaged
};

constexpr double kProbClamp = 1e-7;

/// Logistic sigmoid with output clamped to [1e-7, 1-1e-7] so downstream
/// cross-entropy sees probabilities strictly inside (0,1).
inline Matrix sigmoid(const Matrix& x, SigmoidCache* cache = nullptr) {
    Matrix y(x.rows(), x.cols());
    Matrix deriv(x.rows(), x.cols());
    for (size_t i = 0; i < x.size(); ++i) {
        const double v = x.storage()[i];
        double s;
        if (v >= 0.0) {
            s = 1.0 / (1.0 + std::exp(-v));
        } else {
            const double e = std::exp(v);
            s = e / (1.0 + e);
        }
        if (s < kProbClamp) {
            y.storage()[i] = kProbClamp;
            deriv.storage()[i] = 0.0;
        } else if (s > 1.0 - kProbClamp) {
            y.storage()[i] = 1.0 - kProbClamp;
            deriv.storage()[i] = 0.0;
        } else {
            y.storage()[i] = s;
            deriv.storage()[i] = s * (1.0 - s);
        }
    }
    if (cache) cache->deriv = std::move(deriv);
    return y;
}

inline Matrix sigmoid_backward(const Matrix& dy, const SigmoidCache& cache) {
    Matrix dx(dy.rows(), dy.cols());
    for (size_t i = 0; i < dy.size(); ++i)
        dx.storage()[i] = dy.storage()[i] * cache.deriv.storage()[i];
    return dx;
}

struct SoftmaxCache {
    Matrix y;
};

/// Row-wise softmax, shifted by the row max for stability.
inline Matrix softmax_rows(const Matrix& x, SoftmaxCache* cache = nullptr) {
    Matrix y(x.rows(), x.cols());
    for (size_t i = 0; i < x.rows(); ++i) {
        const double* r = x.row(i);
        double* o = y.row(i);
        double mx = r[0];
        for (size_t j = 1; j < x.cols(); ++j) mx = std::max(mx, r[j]);
        double total = 0.0;
        for (size_t j = 0; j < x.cols(); ++j) {
            o[j] = std::exp(r[j] - mx);
            total += o[j];
        }
        for (size_t j = 0; j < x.cols(); ++j) o[j] /= total;
    }
    if (cache) cache->y = y;
    return y;
}

inline Matrix softmax_backward(const Matrix& dy, const SoftmaxCache& cache) {
    const Matrix& y = cache.y;
    Matrix dx(dy.rows(), dy.cols());
    for (size_t i = 0; i < dy.rows(); ++i) {
        const double* dyr = dy.row(i);
        const double* yr = y.row(i);
        double dot = 0.0;
        for (size_t j = 0; j < dy.cols(); ++j) dot += dyr[j] * yr[j];
        double* o = dx.row(i);
        for (size_t j = 0; j < dy.cols(); ++j) o[j] = yr[j] * (dyr[j] - dot);
    }
    return dx;
}

// ---------------------------------------------------------------------------
// Gradient reversal: identity forward, -alpha * grad backward.
// ---------------------------------------------------------------------------

inline Matrix grl_backward(const Matrix& upstream, double alpha) {
    Matrix dx(upstream.rows(), upstream.cols());
    for (size_t i = 0; i < upstream.size(); ++i) dx.storage()[i] = -alpha * upstream.storage()[i];
    return dx;
}

} // namespace macd::nn

#endif
