#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bpk/nn/ops.hpp"
#include "bpk/nn/tensor.hpp"

namespace bpk::nn {

/// Architecture of the demodulator network:
/// input batchnorm -> conv1d (1 -> conv_filters, same padding, ReLU)
/// -> batchnorm -> flatten -> dense (-> dense_units, ReLU) -> batchnorm
/// -> dense (-> classes) -> softmax.
struct ModelConfig {
    std::size_t input_len = 4096;
    std::size_t conv_filters = 128;
    std::size_t conv_kernel = 16;
    std::size_t dense_units = 64;
    std::size_t classes = 2;
    double bn_epsilon = 1e-3;
    double bn_momentum = 0.99;

    std::size_t flat_len() const { return input_len * conv_filters; }
    void validate() const;

    /// 64-bit FNV-1a over the fields, in declaration order. Stored in weight
    /// files so a checkpoint can never be loaded into the wrong architecture.
    std::uint64_t fingerprint() const;

    bool operator==(const ModelConfig&) const = default;
};

struct LayerCount {
    std::string name;
    std::vector<std::size_t> output_shape;
    std::size_t params = 0;
};

struct ParameterCounts {
    std::vector<LayerCount> layers;
    std::size_t total = 0;
    std::size_t trainable = 0;
    std::size_t non_trainable = 0;
};

ParameterCounts parameter_counts(const ModelConfig& cfg);

/// Keras-style summary table of the layer stack.
std::string format_summary(const ParameterCounts& counts);

template <class S>
struct ConvLayer {
    Tensor<S> w; // [k, 1, F]
    Tensor<S> b; // [F]
};

template <class S>
struct DenseLayer {
    Tensor<S> w; // [n, m]
    Tensor<S> b; // [m]
};

template <class S>
struct Model {
    ModelConfig cfg;
    BatchNorm<S> bn_input;   // channels = 1
    ConvLayer<S> conv;       // 1 -> F, kernel k
    BatchNorm<S> bn_conv;    // channels = F
    DenseLayer<S> dense_hidden; // L*F -> U
    BatchNorm<S> bn_hidden;  // channels = U
    DenseLayer<S> dense_out; // U -> classes

    /// Trainable tensors in the canonical order used by gradients, the
    /// optimizer and the weight file.
    std::array<Tensor<S>*, 12> trainable_tensors();
    std::array<const Tensor<S>*, 12> trainable_tensors() const;

    /// All parameter tensors including moving statistics (weight-file order).
    std::array<Tensor<S>*, 18> all_tensors();
    std::array<const Tensor<S>*, 18> all_tensors() const;
};

/// Gradient of the mean batch loss w.r.t. every trainable tensor, in the
/// same canonical order.
template <class S>
struct Gradients {
    std::vector<Tensor<S>> tensors;

    static Gradients like(const Model<S>& m);
};

/// Weights initialized Glorot-uniform from `init_seed` (biases and beta
/// zero, gamma one, moving mean/var 0/1). Verifies the structural
/// parameter-count identities of the layer stack.
template <class S>
Model<S> build_model(const ModelConfig& cfg, std::uint64_t init_seed);

/// Scratch buffers reused across training steps. Sized lazily for the
/// largest batch seen.
template <class S>
struct TrainWorkspace {
    std::size_t batch_capacity = 0;
    Tensor<S> bn0_out;                 // [B, L]
    Tensor<S> conv_act, scratch_blf;   // [B, L, F]
    Tensor<S> hiddenT, d_hiddenT;      // [L*F, B]
    Tensor<S> a2, bn2_out;             // [B, U]
    Tensor<S> d_bn2, d_a2;             // [B, U]
    Tensor<S> probs, d_out;            // [B, C]
    Tensor<S> d_bn0out;                // [B, L]
    std::vector<double> mean0, mean1, mean2;
    std::vector<double> invstd0, invstd1, invstd2;

    void ensure(const ModelConfig& cfg, std::size_t batch);
};

/// Forward + reverse pass over one batch (train-mode batch normalization,
/// moving statistics updated). x is row-major [batch, input_len], y_onehot
/// [batch, classes]. Returns the mean cross-entropy and fills `grads`.
template <class S>
S forward_backward(Model<S>& m, const S* x, std::size_t batch,
                   const S* y_onehot, Gradients<S>& grads,
                   TrainWorkspace<S>& ws);

/// Mean batch loss without touching the model; batch statistics are used in
/// train mode. This is the quantity forward_backward differentiates, which
/// makes it the finite-difference oracle's target.
template <class S>
S batch_loss(const Model<S>& m, const S* x, std::size_t batch,
             const S* y_onehot, Mode mode);

/// Inference-mode class probabilities for a batch; probs is [batch, classes].
template <class S>
void predict_batch(const Model<S>& m, const S* x, std::size_t batch, S* probs,
                   TrainWorkspace<S>& ws);

/// Softmax probabilities for one window (inference mode).
template <class S>
std::vector<S> predict(const Model<S>& m, const std::vector<S>& window);

/// Argmax decision; ties resolve to the lowest class index (0).
template <class S>
std::uint8_t classify(const Model<S>& m, const std::vector<S>& window);

/// Weight file: magic "CHNN", version u16 = 1, config fingerprint u64, the
/// config fields, then every parameter tensor (moving statistics included)
/// as float32 little-endian in canonical order.
void save_weights(const Model<float>& m, const std::filesystem::path& path);

/// Throws if the stored fingerprint disagrees with `expected` (the message
/// names both) or the file is truncated/corrupt.
Model<float> load_weights(const std::filesystem::path& path,
                          std::optional<ModelConfig> expected = std::nullopt);

} // namespace bpk::nn
