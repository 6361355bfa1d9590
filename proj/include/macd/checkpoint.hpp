#ifndef MACD_CHECKPOINT_HPP
#define MACD_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "macd/error.hpp"
#include "macd/model.hpp"
#include "macd/train.hpp"

// Model checkpoint, magic "MACD1". Little-endian binary:
//   magic[6] = "MACD1\n", u32 format version
//   config: i32 latent_dim, encoder_hidden, decoder_hidden0, decoder_hidden1,
//           head_hidden; f64 mask_rate, lambda, grl_alpha, lr; i32 batch_size,
//           epochs; u64 seed; u8 use_mask, use_adversarial, full_reconstruction;
//           f64 target_sum
//   gene_order, type_order: u64 count, then (u32 length, bytes) per string
//   loss_history: u64 count, then (f64 stage1, f64 stage2) per epoch
//   tensors: u64 count, then (u32 name length, bytes, u64 rows, u64 cols,
//            rows*cols f64) per tensor, in state_tensors() order
// The full description lives in the README.

namespace macd {

namespace detail {

constexpr char kMagic[6] = {'M', 'A', 'C', 'D', '1', '\n'};
constexpr uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

inline void put_string(std::ostream& out, const std::string& s) {
    put<uint32_t>(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ValidationError("checkpoint truncated: " + path);
    return v;
}

inline std::string get_string(std::istream& in, const std::string& path) {
    const auto len = get<uint32_t>(in, path);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw ValidationError("checkpoint truncated: " + path);
    return s;
}

} // namespace detail

inline void save_checkpoint(const std::string& path, const TrainedModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);

    out.write(detail::kMagic, sizeof(detail::kMagic));
    detail::put<uint32_t>(out, detail::kFormatVersion);

    const MacdConfig& c = model.config;
    detail::put<int32_t>(out, c.latent_dim);
    detail::put<int32_t>(out, c.encoder_hidden);
    detail::put<int32_t>(out, c.decoder_hidden[0]);
    detail::put<int32_t>(out, c.decoder_hidden[1]);
    detail::put<int32_t>(out, c.head_hidden);
    detail::put<double>(out, c.mask_rate);
    detail::put<double>(out, c.lambda);
    detail::put<double>(out, c.grl_alpha);
    detail::put<double>(out, c.lr);
    detail::put<int32_t>(out, c.batch_size);
    detail::put<int32_t>(out, c.epochs);
    detail::put<uint64_t>(out, c.seed);
    detail::put<uint8_t>(out, c.use_mask ? 1 : 0);
    detail::put<uint8_t>(out, c.use_adversarial ? 1 : 0);
    detail::put<uint8_t>(out, c.full_reconstruction ? 1 : 0);
    detail::put<double>(out, model.target_sum);

    detail::put<uint64_t>(out, model.gene_order.size());
    for (const auto& g : model.gene_order) detail::put_string(out, g);
    detail::put<uint64_t>(out, model.type_order.size());
    for (const auto& t : model.type_order) detail::put_string(out, t);

    detail::put<uint64_t>(out, model.loss_history.size());
    for (const auto& e : model.loss_history) {
        detail::put<double>(out, e.stage1);
        detail::put<double>(out, e.stage2);
    }

    // state_tensors needs mutable access; the writer does not modify.
    auto tensors = state_tensors(const_cast<MacdParams&>(model.params));
    detail::put<uint64_t>(out, tensors.size());
    for (const auto& [name, tensor] : tensors) {
        detail::put_string(out, name);
        detail::put<uint64_t>(out, tensor->rows());
        detail::put<uint64_t>(out, tensor->cols());
        out.write(reinterpret_cast<const char*>(tensor->data()),
                  static_cast<std::streamsize>(tensor->size() * sizeof(double)));
    }
    if (!out) throw IoError("write failed: " + path);
}

inline TrainedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open checkpoint: " + path);

    char magic[sizeof(detail::kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, detail::kMagic, sizeof(magic)) != 0)
        throw ValidationError("not a MACD1 checkpoint: " + path);
    const auto version = detail::get<uint32_t>(in, path);
    if (version != detail::kFormatVersion)
        throw ValidationError("unsupported checkpoint version " + std::to_string(version) + ": " + path);

    TrainedModel model;
    MacdConfig& c = model.config;
    c.latent_dim = detail::get<int32_t>(in, path);
    c.encoder_hidden = detail::get<int32_t>(in, path);
    c.decoder_hidden[0] = detail::get<int32_t>(in, path);
    c.decoder_hidden[1] = detail::get<int32_t>(in, path);
    c.head_hidden = detail::get<int32_t>(in, path);
    c.mask_rate = detail::get<double>(in, path);
    c.lambda = detail::get<double>(in, path);
    c.grl_alpha = detail::get<double>(in, path);
    c.lr = detail::get<double>(in, path);
    c.batch_size = detail::get<int32_t>(in, path);
    c.epochs = detail::get<int32_t>(in, path);
    c.seed = detail::get<uint64_t>(in, path);
    c.use_mask = detail::get<uint8_t>(in, path) != 0;
    c.use_adversarial = detail::get<uint8_t>(in, path) != 0;
    c.full_reconstruction = detail::get<uint8_t>(in, path) != 0;
    model.target_sum = detail::get<double>(in, path);

    const auto n_genes = detail::get<uint64_t>(in, path);
    model.gene_order.reserve(n_genes);
    for (uint64_t i = 0; i < n_genes; ++i) model.gene_order.push_back(detail::get_string(in, path));
    const auto n_types = detail::get<uint64_t>(in, path);
    model.type_order.reserve(n_types);
    for (uint64_t i = 0; i < n_types; ++i) model.type_order.push_back(detail::get_string(in, path));
    if (model.gene_order.empty() || model.type_order.empty())
        throw ValidationError("checkpoint has empty gene or type order: " + path);

    const auto n_epochs = detail::get<uint64_t>(in, path);
    for (uint64_t i = 0; i < n_epochs; ++i) {
        EpochLoss e;
        e.stage1 = detail::get<double>(in, path);
        e.stage2 = detail::get<double>(in, path);
        model.loss_history.push_back(e);
    }

    model.params.init(model.gene_order.size(), model.type_order.size(), c);
    auto tensors = state_tensors(model.params);
    std::unordered_map<std::string, Matrix*> by_name;
    for (auto& [name, tensor] : tensors) by_name.emplace(name, tensor);

    const auto n_tensors = detail::get<uint64_t>(in, path);
    if (n_tensors != tensors.size())
        throw ValidationError("checkpoint tensor count mismatch: " + path);
    for (uint64_t i = 0; i < n_tensors; ++i) {
        const std::string name = detail::get_string(in, path);
        auto it = by_name.find(name);
        if (it == by_name.end()) throw ValidationError("unknown tensor '" + name + "' in " + path);
        const auto rows = detail::get<uint64_t>(in, path);
        const auto cols = detail::get<uint64_t>(in, path);
        Matrix& t = *it->second;
        if (rows != t.rows() || cols != t.cols())
            throw ValidationError("tensor '" + name + "' has shape " + std::to_string(rows) + "x" +
                                  std::to_string(cols) + ", expected " + std::to_string(t.rows()) +
                                  "x" + std::to_string(t.cols()) + ": " + path);
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
        if (!in) throw ValidationError("checkpoint truncated: " + path);
    }
    return model;
}

} // namespace macd

#endif
