#ifndef MACD_MODEL_HPP
#define MACD_MODEL_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "macd/error.hpp"
#include "macd/matrix.hpp"
#include "macd/nn/adam.hpp"
#include "macd/nn/layers.hpp"
#include "macd/nn/losses.hpp"
#include "macd/random.hpp"
#include "macd/types.hpp"

namespace macd {

constexpr double kLeakySlope = 0.01;

struct MacdConfig {
    int latent_dim = 256;      // split in half for the two adversarial heads
    int encoder_hidden = 512;
    std::array<int, 2> decoder_hidden{512, 512};
    int head_hidden = 64;
    double mask_rate = 0.3;
    double lambda = 0.5;       // weight of reconstruction vs BCE in stage 1
    double grl_alpha = 1.0;
    double lr = 0.01;
    int batch_size = 2048;
    int epochs = 200;
    uint64_t seed = 0;
    bool use_mask = true;
    bool use_adversarial = true;
    bool full_reconstruction = false;

    void validate() const {
        if (latent_dim <= 0 || latent_dim % 2 != 0)
            throw ValidationError("config: latent_dim must be a positive even integer");
        if (encoder_hidden <= 0 || decoder_hidden[0] <= 0 || decoder_hidden[1] <= 0 || head_hidden <= 0)
            throw ValidationError("config: hidden widths must be positive");
        if (mask_rate < 0.0 || mask_rate > 1.0) throw ValidationError("config: mask_rate must be in [0,1]");
        if (lambda < 0.0 || lambda > 1.0) throw ValidationError("config: lambda must be in [0,1]");
        if (grl_alpha < 0.0) throw ValidationError("config: grl_alpha must be nonnegative");
        if (!(lr > 0.0)) throw ValidationError("config: lr must be positive");
        if (batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
        if (epochs < 1) throw ValidationError("config: epochs must be >= 1");
    }
};

// ---------------------------------------------------------------------------
// Network blocks. The topology is fixed: each block is a hand-wired
// forward/backward pair over the kernel layers.
// ---------------------------------------------------------------------------

/// H = fc1(LeakyReLU(BN(fc0(X))))
struct Encoder {
    nn::Dense fc0;
    nn::BatchNorm bn;
    nn::Dense fc1;

    void init(size_t genes, const MacdConfig& cfg, Rng& rng) {
        fc0.init(genes, cfg.encoder_hidden, rng);
        bn.init(cfg.encoder_hidden);
        fc1.init(cfg.encoder_hidden, cfg.latent_dim, rng);
    }
};

struct EncoderGrads {
    nn::DenseGrads fc0;
    nn::BatchNormGrads bn;
    nn::DenseGrads fc1;

    void reset_like(const Encoder& e) {
        fc0.reset_like(e.fc0);
        bn.reset_like(e.bn);
        fc1.reset_like(e.fc1);
    }
};

struct EncoderCache {
    nn::DenseCache c0;
    nn::BatchNormCache cbn;
    nn::LeakyReluCache crelu;
    nn::DenseCache c1;
};

inline Matrix encoder_forward(Encoder& enc, const Matrix& x, bool training, EncoderCache* cache) {
    nn::DenseCache* c0 = cache ? &cache->c0 : nullptr;
    nn::BatchNormCache* cbn = cache ? &cache->cbn : nullptr;
    nn::LeakyReluCache* crelu = cache ? &cache->crelu : nullptr;
    nn::DenseCache* c1 = cache ? &cache->c1 : nullptr;
    Matrix a = nn::dense_forward(enc.fc0, x, c0);
    a = nn::batchnorm_forward(enc.bn, a, training, cbn);
    a = nn::leaky_relu(a, kLeakySlope, crelu);
    return nn::dense_forward(enc.fc1, a, c1);
}

inline Matrix encoder_backward(const Encoder& enc, const Matrix& dh, const EncoderCache& cache,
                               EncoderGrads& grads) {
    Matrix d = nn::dense_backward(enc.fc1, dh, cache.c1, grads.fc1);
    d = nn::leaky_relu_backward(d, cache.crelu);
    d = nn::batchnorm_backward(enc.bn, d, cache.cbn, grads.bn);
    return nn::dense_backward(enc.fc0, d, cache.c0, grads.fc0);
}

/// Three dense layers back to gene space, BN + LeakyReLU between, linear output.
struct Decoder {
    nn::Dense fc0;
    nn::BatchNorm bn0;
    nn::Dense fc1;
    nn::BatchNorm bn1;
    nn::Dense fc2;

    void init(size_t genes, const MacdConfig& cfg, Rng& rng) {
        fc0.init(cfg.latent_dim, cfg.decoder_hidden[0], rng);
        bn0.init(cfg.decoder_hidden[0]);
        fc1.init(cfg.decoder_hidden[0], cfg.decoder_hidden[1], rng);
        bn1.init(cfg.decoder_hidden[1]);
        fc2.init(cfg.decoder_hidden[1], genes, rng);
    }
};

struct DecoderGrads {
    nn::DenseGrads fc0;
    nn::BatchNormGrads bn0;
    nn::DenseGrads fc1;
    nn::BatchNormGrads bn1;
    nn::DenseGrads fc2;

    void reset_like(const Decoder& d) {
        fc0.reset_like(d.fc0);
        bn0.reset_like(d.bn0);
        fc1.reset_like(d.fc1);
        bn1.reset_like(d.bn1);
        fc2.reset_like(d.fc2);
    }
};

struct DecoderCache {
    nn::DenseCache c0;
    nn::BatchNormCache cbn0;
    nn::LeakyReluCache crelu0;
    nn::DenseCache c1;
    nn::BatchNormCache cbn1;
    nn::LeakyReluCache crelu1;
    nn::DenseCache c2;
};

inline Matrix decoder_forward(Decoder& dec, const Matrix& h, bool training, DecoderCache* cache) {
    Matrix a = nn::dense_forward(dec.fc0, h, cache ? &cache->c0 : nullptr);
    a = nn::batchnorm_forward(dec.bn0, a, training, cache ? &cache->cbn0 : nullptr);
    a = nn::leaky_relu(a, kLeakySlope, cache ? &cache->crelu0 : nullptr);
    a = nn::dense_forward(dec.fc1, a, cache ? &cache->c1 : nullptr);
    a = nn::batchnorm_forward(dec.bn1, a, training, cache ? &cache->cbn1 : nullptr);
    a = nn::leaky_relu(a, kLeakySlope, cache ? &cache->crelu1 : nullptr);
    return nn::dense_forward(dec.fc2, a, cache ? &cache->c2 : nullptr);
}

inline Matrix decoder_backward(const Decoder& dec, const Matrix& dxhat, const DecoderCache& cache,
                               DecoderGrads& grads) {
    Matrix d = nn::dense_backward(dec.fc2, dxhat, cache.c2, grads.fc2);
    d = nn::leaky_relu_backward(d, cache.crelu1);
    d = nn::batchnorm_backward(dec.bn1, d, cache.cbn1, grads.bn1);
    d = nn::dense_backward(dec.fc1, d, cache.c1, grads.fc1);
    d = nn::leaky_relu_backward(d, cache.crelu0);
    d = nn::batchnorm_backward(dec.bn0, d, cache.cbn0, grads.bn0);
    return nn::dense_backward(dec.fc0, d, cache.c0, grads.fc0);
}

/// Binary real-vs-simulated head: fc -> LeakyReLU -> fc -> sigmoid.
struct Head {
    nn::Dense fc0;
    nn::Dense fc1;

    void init(size_t in_dim, const MacdConfig& cfg, Rng& rng) {
        fc0.init(in_dim, cfg.head_hidden, rng);
        fc1.init(cfg.head_hidden, 1, rng);
    }
};

struct HeadGrads {
    nn::DenseGrads fc0;
    nn::DenseGrads fc1;

    void reset_like(const Head& h) {
        fc0.reset_like(h.fc0);
        fc1.reset_like(h.fc1);
    }
};

struct HeadCache {
    nn::DenseCache c0;
    nn::LeakyReluCache crelu;
    nn::DenseCache c1;
    nn::SigmoidCache csig;
};

inline Matrix head_forward(const Head& head, const Matrix& x, HeadCache* cache) {
    Matrix a = nn::dense_forward(head.fc0, x, cache ? &cache->c0 : nullptr);
    a = nn::leaky_relu(a, kLeakySlope, cache ? &cache->crelu : nullptr);
    a = nn::dense_forward(head.fc1, a, cache ? &cache->c1 : nullptr);
    return nn::sigmoid(a, cache ? &cache->csig : nullptr);
}

inline Matrix head_backward(const Head& head, const Matrix& dy, const HeadCache& cache,
                            HeadGrads& grads) {
    Matrix d = nn::sigmoid_backward(dy, cache.csig);
    d = nn::dense_backward(head.fc1, d, cache.c1, grads.fc1);
    d = nn::leaky_relu_backward(d, cache.crelu);
    return nn::dense_backward(head.fc0, d, cache.c0, grads.fc0);
}

/// Y = softmax(fc1(LeakyReLU(BN(fc0(H)))))
struct Predictor {
    nn::Dense fc0;
    nn::BatchNorm bn;
    nn::Dense fc1;

    void init(size_t n_types, const MacdConfig& cfg, Rng& rng) {
        fc0.init(cfg.latent_dim, cfg.head_hidden, rng);
        bn.init(cfg.head_hidden);
        fc1.init(cfg.head_hidden, n_types, rng);
    }
};

struct PredictorGrads {
    nn::DenseGrads fc0;
    nn::BatchNormGrads bn;
    nn::DenseGrads fc1;

    void reset_like(const Predictor& p) {
        fc0.reset_like(p.fc0);
        bn.reset_like(p.bn);
        fc1.reset_like(p.fc1);
    }
};

struct PredictorCache {
    nn::DenseCache c0;
    nn::BatchNormCache cbn;
    nn::LeakyReluCache crelu;
    nn::DenseCache c1;
    nn::SoftmaxCache csoft;
};

inline Matrix predictor_forward(Predictor& pred, const Matrix& h, bool training, PredictorCache* cache) {
    Matrix a = nn::dense_forward(pred.fc0, h, cache ? &cache->c0 : nullptr);
    a = nn::batchnorm_forward(pred.bn, a, training, cache ? &cache->cbn : nullptr);
    a = nn::leaky_relu(a, kLeakySlope, cache ? &cache->crelu : nullptr);
    a = nn::dense_forward(pred.fc1, a, cache ? &cache->c1 : nullptr);
    return nn::softmax_rows(a, cache ? &cache->csoft : nullptr);
}

inline Matrix predictor_backward(const Predictor& pred, const Matrix& dy, const PredictorCache& cache,
                                 PredictorGrads& grads) {
    Matrix d = nn::softmax_backward(dy, cache.csoft);
    d = nn::dense_backward(pred.fc1, d, cache.c1, grads.fc1);
    d = nn::leaky_relu_backward(d, cache.crelu);
    d = nn::batchnorm_backward(pred.bn, d, cache.cbn, grads.bn);
    return nn::dense_backward(pred.fc0, d, cache.c0, grads.fc0);
}

// ---------------------------------------------------------------------------
// Inference-mode forwards (running BN statistics, const everything).
// ---------------------------------------------------------------------------

namespace detail {
inline Matrix batchnorm_infer(const nn::BatchNorm& bn, const Matrix& x) {
    Matrix y(x.rows(), x.cols());
    for (size_t j = 0; j < bn.features(); ++j) {
        const double inv = 1.0 / std::sqrt(bn.running_var(0, j) + bn.eps);
        const double mu = bn.running_mean(0, j);
        const double g = bn.gamma(0, j), b = bn.beta(0, j);
        for (size_t i = 0; i < x.rows(); ++i) y(i, j) = g * (x(i, j) - mu) * inv + b;
    }
    return y;
}
} // namespace detail

inline Matrix encoder_inference(const Encoder& enc, const Matrix& x) {
    Matrix a = nn::dense_forward(enc.fc0, x);
    a = detail::batchnorm_infer(enc.bn, a);
    a = nn::leaky_relu(a, kLeakySlope);
    return nn::dense_forward(enc.fc1, a);
}

inline Matrix predictor_inference(const Predictor& pred, const Matrix& h) {
    Matrix a = nn::dense_forward(pred.fc0, h);
    a = detail::batchnorm_infer(pred.bn, a);
    a = nn::leaky_relu(a, kLeakySlope);
    a = nn::dense_forward(pred.fc1, a);
    return nn::softmax_rows(a);
}

// ---------------------------------------------------------------------------
// Full parameter set
// ---------------------------------------------------------------------------

struct MacdParams {
    Encoder encoder;
    Decoder decoder;
    Head classifier;
    Head discriminator;
    Predictor predictor;

    void init(size_t genes, size_t n_types, const MacdConfig& cfg) {
        cfg.validate();
        if (genes == 0 || n_types == 0) throw ValidationError("model: genes and types must be nonzero");
        Rng rng(derive_seed(cfg.seed, /*init stream*/ 0xA11CE));
        encoder.init(genes, cfg, rng);
        decoder.init(genes, cfg, rng);
        classifier.init(cfg.latent_dim / 2, cfg, rng);
        discriminator.init(cfg.latent_dim / 2, cfg, rng);
        predictor.init(n_types, cfg, rng);
    }

    size_t gene_count() const { return encoder.fc0.in_dim(); }
    size_t latent_dim() const { return encoder.fc1.out_dim(); }
    size_t n_types() const { return predictor.fc1.out_dim(); }
};

struct MacdGrads {
    EncoderGrads encoder;
    DecoderGrads decoder;
    HeadGrads classifier;
    HeadGrads discriminator;
    PredictorGrads predictor;

    void reset_like(const MacdParams& p) {
        encoder.reset_like(p.encoder);
        decoder.reset_like(p.decoder);
        classifier.reset_like(p.classifier);
        discriminator.reset_like(p.discriminator);
        predictor.reset_like(p.predictor);
    }
};

using NamedTensors = std::vector<std::pair<std::string, Matrix*>>;

namespace detail {
inline void collect(nn::Dense& d, const std::string& p, NamedTensors& out) {
    out.emplace_back(p + ".W", &d.W);
    out.emplace_back(p + ".b", &d.b);
}
inline void collect(nn::DenseGrads& d, const std::string& p, NamedTensors& out) {
    out.emplace_back(p + ".W", &d.W);
    out.emplace_back(p + ".b", &d.b);
}
inline void collect_learnable(nn::BatchNorm& bn, const std::string& p, NamedTensors& out) {
    out.emplace_back(p + ".gamma", &bn.gamma);
    out.emplace_back(p + ".beta", &bn.beta);
}
inline void collect(nn::BatchNormGrads& bn, const std::string& p, NamedTensors& out) {
    out.emplace_back(p + ".gamma", &bn.gamma);
    out.emplace_back(p + ".beta", &bn.beta);
}
} // namespace detail

/// Learnable tensors in a fixed order (the Adam and checkpoint order).
inline NamedTensors learnable_tensors(MacdParams& p) {
    NamedTensors out;
    detail::collect(p.encoder.fc0, "encoder.fc0", out);
    detail::collect_learnable(p.encoder.bn, "encoder.bn", out);
    detail::collect(p.encoder.fc1, "encoder.fc1", out);
    detail::collect(p.decoder.fc0, "decoder.fc0", out);
    detail::collect_learnable(p.decoder.bn0, "decoder.bn0", out);
    detail::collect(p.decoder.fc1, "decoder.fc1", out);
    detail::collect_learnable(p.decoder.bn1, "decoder.bn1", out);
    detail::collect(p.decoder.fc2, "decoder.fc2", out);
    detail::collect(p.classifier.fc0, "classifier.fc0", out);
    detail::collect(p.classifier.fc1, "classifier.fc1", out);
    detail::collect(p.discriminator.fc0, "discriminator.fc0", out);
    detail::collect(p.discriminator.fc1, "discriminator.fc1", out);
    detail::collect(p.predictor.fc0, "predictor.fc0", out);
    detail::collect_learnable(p.predictor.bn, "predictor.bn", out);
    detail::collect(p.predictor.fc1, "predictor.fc1", out);
    return out;
}

/// Gradient tensors; parallel to learnable_tensors().
inline NamedTensors gradient_tensors(MacdGrads& g) {
    NamedTensors out;
    detail::collect(g.encoder.fc0, "encoder.fc0", out);
    detail::collect(g.encoder.bn, "encoder.bn", out);
    detail::collect(g.encoder.fc1, "encoder.fc1", out);
    detail::collect(g.decoder.fc0, "decoder.fc0", out);
    detail::collect(g.decoder.bn0, "decoder.bn0", out);
    detail::collect(g.decoder.fc1, "decoder.fc1", out);
    detail::collect(g.decoder.bn1, "decoder.bn1", out);
    detail::collect(g.decoder.fc2, "decoder.fc2", out);
    detail::collect(g.classifier.fc0, "classifier.fc0", out);
    detail::collect(g.classifier.fc1, "classifier.fc1", out);
    detail::collect(g.discriminator.fc0, "discriminator.fc0", out);
    detail::collect(g.discriminator.fc1, "discriminator.fc1", out);
    detail::collect(g.predictor.fc0, "predictor.fc0", out);
    detail::collect(g.predictor.bn, "predictor.bn", out);
    detail::collect(g.predictor.fc1, "predictor.fc1", out);
    return out;
}

/// Everything the checkpoint must carry: learnables plus BN running stats.
inline NamedTensors state_tensors(MacdParams& p) {
    NamedTensors out = learnable_tensors(p);
    out.emplace_back("encoder.bn.running_mean", &p.encoder.bn.running_mean);
    out.emplace_back("encoder.bn.running_var", &p.encoder.bn.running_var);
    out.emplace_back("decoder.bn0.running_mean", &p.decoder.bn0.running_mean);
    out.emplace_back("decoder.bn0.running_var", &p.decoder.bn0.running_var);
    out.emplace_back("decoder.bn1.running_mean", &p.decoder.bn1.running_mean);
    out.emplace_back("decoder.bn1.running_var", &p.decoder.bn1.running_var);
    out.emplace_back("predictor.bn.running_mean", &p.predictor.bn.running_mean);
    out.emplace_back("predictor.bn.running_var", &p.predictor.bn.running_var);
    return out;
}

// ---------------------------------------------------------------------------
// Masking
// ---------------------------------------------------------------------------

/// Mark round(rho * G) distinct entries per row, chosen uniformly from a
/// seeded stream.
inline MaskMatrix make_mask(size_t rows, size_t genes, double rho, uint64_t seed) {
    if (rho < 0.0 || rho > 1.0) throw ValidationError("apply_mask: rho must be in [0,1]");
    const auto k = static_cast<size_t>(std::lround(rho * static_cast<double>(genes)));

    MaskMatrix mask;
    mask.rows = rows;
    mask.cols = genes;
    mask.entries.assign(rows * genes, 0);
    mask.mask_rate = rho;

    Rng rng(seed);
    std::vector<size_t> cols(genes);
    for (size_t i = 0; i < rows; ++i) {
        std::iota(cols.begin(), cols.end(), size_t{0});
        for (size_t pick = 0; pick < k; ++pick) { // partial Fisher-Yates
            const size_t j = pick + rng.index(genes - pick);
            std::swap(cols[pick], cols[j]);
            mask(i, cols[pick]) = 1;
        }
    }
    return mask;
}

/// Zero out round(rho * G) distinct entries per row. Returns the masked matrix
/// and the 1-at-masked mask; unmasked entries are bit-identical to the input.
inline std::pair<Matrix, MaskMatrix> apply_mask(const Matrix& x, double rho, uint64_t seed) {
    MaskMatrix mask = make_mask(x.rows(), x.cols(), rho, seed);
    Matrix masked = x;
    for (size_t i = 0; i < masked.size(); ++i)
        if (mask.entries[i]) masked.storage()[i] = 0.0;
    return {std::move(masked), std::move(mask)};
}

// ---------------------------------------------------------------------------
// Latent split for the two adversarial heads
// ---------------------------------------------------------------------------

inline std::pair<Matrix, Matrix> split_latent(const Matrix& h) {
    if (h.cols() % 2 != 0) throw ValidationError("split_latent: latent width must be even");
    const size_t half = h.cols() / 2;
    Matrix a(h.rows(), half), b(h.rows(), half);
    for (size_t i = 0; i < h.rows(); ++i) {
        const double* r = h.row(i);
        std::copy(r, r + half, a.row(i));
        std::copy(r + half, r + 2 * half, b.row(i));
    }
    return {std::move(a), std::move(b)};
}

inline Matrix concat_cols(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ValidationError("concat_cols: row counts differ");
    Matrix out(a.rows(), a.cols() + b.cols());
    for (size_t i = 0; i < a.rows(); ++i) {
        std::copy(a.row(i), a.row(i) + a.cols(), out.row(i));
        std::copy(b.row(i), b.row(i) + b.cols(), out.row(i) + a.cols());
    }
    return out;
}

namespace detail {
inline void add_into(Matrix& dst, const Matrix& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst.storage()[i] += src.storage()[i];
}
inline void scale(Matrix& m, double s) {
    for (double& v : m.storage()) v *= s;
}
} // namespace detail

// ---------------------------------------------------------------------------
// Stage losses
// ---------------------------------------------------------------------------

struct Stage1Result {
    double total = 0.0;
    double mse = 0.0;
    double loss_classifier = 0.0;
    double loss_discriminator = 0.0;
    bool degenerate_mask = false;
};

/// Stage 1: masked reconstruction of the real batch plus the two adversarial
/// BCE terms on the split latent halves. Ablations:
///   use_mask=false         reconstruction of the unmasked input over all entries
///   full_reconstruction    MSE over all entries regardless of the mask
///   use_adversarial=false  BCE terms dropped entirely; total == MSE
/// Gradients accumulate into `grads` for encoder, decoder, classifier, and
/// discriminator. The discriminator trains to separate real from simulated;
/// the gradient reversal flips (and scales by grl_alpha) only the piece that
/// flows back into the encoder.
inline Stage1Result stage1_loss(MacdParams& params, const Matrix& real_x, const MaskMatrix& mask,
                                const Matrix& sim_x, const MacdConfig& cfg,
                                MacdGrads* grads = nullptr) {
    if (real_x.cols() != sim_x.cols())
        throw ValidationError("stage1_loss: real and simulated gene counts differ");
    if (cfg.use_mask && (mask.rows != real_x.rows() || mask.cols != real_x.cols()))
        throw ValidationError("stage1_loss: mask shape mismatch");

    Stage1Result result;

    Matrix input = real_x;
    if (cfg.use_mask) {
        for (size_t i = 0; i < input.size(); ++i)
            if (mask.entries[i]) input.storage()[i] = 0.0;
    }

    EncoderCache enc_real_cache;
    Matrix h_real = encoder_forward(params.encoder, input, true, grads ? &enc_real_cache : nullptr);

    DecoderCache dec_cache;
    Matrix x_hat = decoder_forward(params.decoder, h_real, true, grads ? &dec_cache : nullptr);

    const bool mse_over_all = !cfg.use_mask || cfg.full_reconstruction;
    if (mse_over_all) {
        result.mse = nn::mean_sq_err(x_hat, real_x);
    } else {
        result.mse = nn::masked_mse(x_hat, real_x, mask, &result.degenerate_mask);
    }

    const double w_mse = cfg.use_adversarial ? cfg.lambda : 1.0;
    const double w_bce = 1.0 - cfg.lambda;

    Matrix h_sim;
    EncoderCache enc_sim_cache;
    Matrix out_c_real, out_c_sim, out_d_real, out_d_sim;
    HeadCache cls_real_cache, cls_sim_cache, dis_real_cache, dis_sim_cache;
    if (cfg.use_adversarial) {
        h_sim = encoder_forward(params.encoder, sim_x, true, grads ? &enc_sim_cache : nullptr);

        auto [r1, r2] = split_latent(h_real);
        auto [s1, s2] = split_latent(h_sim);

        out_c_real = head_forward(params.classifier, r1, grads ? &cls_real_cache : nullptr);
        out_c_sim = head_forward(params.classifier, s1, grads ? &cls_sim_cache : nullptr);
        // GRL is the identity in the forward pass.
        out_d_real = head_forward(params.discriminator, r2, grads ? &dis_real_cache : nullptr);
        out_d_sim = head_forward(params.discriminator, s2, grads ? &dis_sim_cache : nullptr);

        const Matrix ones(out_c_real.rows(), 1, 1.0);
        const Matrix zeros(out_c_sim.rows(), 1, 0.0);
        result.loss_classifier = nn::bce(ones, out_c_real) + nn::bce(zeros, out_c_sim);
        const Matrix ones_d(out_d_real.rows(), 1, 1.0);
        const Matrix zeros_d(out_d_sim.rows(), 1, 0.0);
        result.loss_discriminator = nn::bce(ones_d, out_d_real) + nn::bce(zeros_d, out_d_sim);

        result.total = cfg.lambda * result.mse +
                       w_bce * (result.loss_classifier + result.loss_discriminator);
    } else {
        result.total = result.mse;
    }

    if (!grads) return result;

    // Reconstruction path.
    Matrix d_xhat = mse_over_all ? nn::mean_sq_err_grad(x_hat, real_x)
                                 : nn::masked_mse_grad(x_hat, real_x, mask);
    detail::scale(d_xhat, w_mse);
    Matrix dh_real = decoder_backward(params.decoder, d_xhat, dec_cache, grads->decoder);

    if (cfg.use_adversarial) {
        const Matrix ones(out_c_real.rows(), 1, 1.0);
        const Matrix zeros(out_c_sim.rows(), 1, 0.0);

        Matrix d_c_real = nn::bce_grad(ones, out_c_real);
        detail::scale(d_c_real, w_bce);
        Matrix d_c_sim = nn::bce_grad(zeros, out_c_sim);
        detail::scale(d_c_sim, w_bce);
        Matrix dr1 = head_backward(params.classifier, d_c_real, cls_real_cache, grads->classifier);
        Matrix ds1 = head_backward(params.classifier, d_c_sim, cls_sim_cache, grads->classifier);

        const Matrix ones_d(out_d_real.rows(), 1, 1.0);
        const Matrix zeros_d(out_d_sim.rows(), 1, 0.0);
        Matrix d_d_real = nn::bce_grad(ones_d, out_d_real);
        detail::scale(d_d_real, w_bce);
        Matrix d_d_sim = nn::bce_grad(zeros_d, out_d_sim);
        detail::scale(d_d_sim, w_bce);
        Matrix dr2 = head_backward(params.discriminator, d_d_real, dis_real_cache, grads->discriminator);
        Matrix ds2 = head_backward(params.discriminator, d_d_sim, dis_sim_cache, grads->discriminator);
        dr2 = nn::grl_backward(dr2, cfg.grl_alpha);
        ds2 = nn::grl_backward(ds2, cfg.grl_alpha);

        Matrix dh_real_heads = concat_cols(dr1, dr2);
        detail::add_into(dh_real, dh_real_heads);
        Matrix dh_sim = concat_cols(ds1, ds2);

        encoder_backward(params.encoder, dh_real, enc_real_cache, grads->encoder);
        encoder_backward(params.encoder, dh_sim, enc_sim_cache, grads->encoder);
    } else {
        encoder_backward(params.encoder, dh_real, enc_real_cache, grads->encoder);
    }
    return result;
}

/// Stage 2: supervised proportion regression on labeled simulated spots.
/// loss = mean over entries of (predictor(encoder(X)) - Y)^2; gradients go to
/// the encoder and predictor only.
inline double stage2_loss(MacdParams& params, const Matrix& sim_x, const Matrix& y_true,
                          MacdGrads* grads = nullptr) {
    if (y_true.cols() != params.n_types())
        throw ValidationError("stage2_loss: type count mismatch (" + std::to_string(y_true.cols()) +
                              " vs model " + std::to_string(params.n_types()) + ")");
    if (y_true.rows() != sim_x.rows()) throw ValidationError("stage2_loss: batch row counts differ");

    EncoderCache enc_cache;
    Matrix h = encoder_forward(params.encoder, sim_x, true, grads ? &enc_cache : nullptr);
    PredictorCache pred_cache;
    Matrix y = predictor_forward(params.predictor, h, true, grads ? &pred_cache : nullptr);

    const double loss = nn::mean_sq_err(y, y_true);
    if (!grads) return loss;

    Matrix dy = nn::mean_sq_err_grad(y, y_true);
    Matrix dh = predictor_backward(params.predictor, dy, pred_cache, grads->predictor);
    encoder_backward(params.encoder, dh, enc_cache, grads->encoder);
    return loss;
}

/// Inference: unmasked input, BN running statistics. Rows land on the simplex
/// by the softmax. Safe to call concurrently on a shared model.
inline Matrix predict_proportions(const MacdParams& params, const Matrix& x) {
    if (x.cols() != params.gene_count())
        throw ValidationError("predict: input width " + std::to_string(x.cols()) +
                              " != model gene count " + std::to_string(params.gene_count()));
    Matrix h = encoder_inference(params.encoder, x);
    return predictor_inference(params.predictor, h);
}

} // namespace macd

#endif
