#include "bpk/nn/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "bpk/rng.hpp"
#include "../binio.hpp"
#include "kernels.hpp"

namespace bpk::nn {

using kernels::i64;

void ModelConfig::validate() const {
    if (input_len == 0 || conv_filters == 0 || conv_kernel == 0 ||
        dense_units == 0 || classes < 2) {
        throw std::invalid_argument("ModelConfig: dimensions must be positive "
                                    "(and classes >= 2)");
    }
    if (conv_kernel > input_len) {
        throw std::invalid_argument("ModelConfig: kernel longer than input");
    }
    if (conv_kernel > 64) {
        throw std::invalid_argument(
            "ModelConfig: conv_kernel above the supported cap of 64");
    }
    if (!(bn_epsilon > 0.0) || !(bn_momentum >= 0.0 && bn_momentum < 1.0)) {
        throw std::invalid_argument("ModelConfig: bad batchnorm constants");
    }
}

std::uint64_t ModelConfig::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a offset basis
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(input_len);
    mix(conv_filters);
    mix(conv_kernel);
    mix(dense_units);
    mix(classes);
    mix(std::bit_cast<std::uint64_t>(bn_epsilon));
    mix(std::bit_cast<std::uint64_t>(bn_momentum));
    return h;
}

ParameterCounts parameter_counts(const ModelConfig& cfg) {
    cfg.validate();
    const std::size_t l = cfg.input_len;
    const std::size_t f = cfg.conv_filters;
    const std::size_t k = cfg.conv_kernel;
    const std::size_t u = cfg.dense_units;
    const std::size_t c = cfg.classes;

    ParameterCounts pc;
    pc.layers = {
        {"reshape", {l, 1}, 0},
        {"batchnorm_input", {l, 1}, 4},
        {"conv1d", {l, f}, k * f + f},
        {"batchnorm_conv", {l, f}, 4 * f},
        {"flatten", {l * f}, 0},
        {"dense_hidden", {u}, l * f * u + u},
        {"batchnorm_hidden", {u}, 4 * u},
        {"dense_output", {c}, u * c + c},
    };
    for (const auto& layer : pc.layers) pc.total += layer.params;
    // moving mean/variance are the only non-trainable entries
    pc.non_trainable = 2 * (1 + f + u);
    pc.trainable = pc.total - pc.non_trainable;
    return pc;
}

std::string format_summary(const ParameterCounts& counts) {
    std::ostringstream out;
    out << std::left << std::setw(20) << "Layer" << std::setw(22)
        << "Output Shape" << std::right << std::setw(12) << "Param #" << '\n';
    out << std::string(54, '-') << '\n';
    for (const auto& layer : counts.layers) {
        std::ostringstream shape;
        shape << '(';
        for (std::size_t i = 0; i < layer.output_shape.size(); ++i) {
            if (i) shape << ", ";
            shape << layer.output_shape[i];
        }
        shape << ')';
        out << std::left << std::setw(20) << layer.name << std::setw(22)
            << shape.str() << std::right << std::setw(12) << layer.params
            << '\n';
    }
    out << std::string(54, '-') << '\n';
    out << "Total params: " << counts.total << '\n';
    out << "Trainable params: " << counts.trainable << '\n';
    out << "Non-trainable params: " << counts.non_trainable << '\n';
    return out.str();
}

template <class S>
std::array<Tensor<S>*, 12> Model<S>::trainable_tensors() {
    return {&bn_input.gamma,  &bn_input.beta,  &conv.w,
            &conv.b,          &bn_conv.gamma,  &bn_conv.beta,
            &dense_hidden.w,  &dense_hidden.b, &bn_hidden.gamma,
            &bn_hidden.beta,  &dense_out.w,    &dense_out.b};
}

template <class S>
std::array<const Tensor<S>*, 12> Model<S>::trainable_tensors() const {
    auto mut = const_cast<Model<S>*>(this)->trainable_tensors();
    std::array<const Tensor<S>*, 12> out;
    for (std::size_t i = 0; i < mut.size(); ++i) out[i] = mut[i];
    return out;
}

template <class S>
std::array<Tensor<S>*, 18> Model<S>::all_tensors() {
    return {&bn_input.gamma,
            &bn_input.beta,
            &bn_input.moving_mean,
            &bn_input.moving_var,
            &conv.w,
            &conv.b,
            &bn_conv.gamma,
            &bn_conv.beta,
            &bn_conv.moving_mean,
            &bn_conv.moving_var,
            &dense_hidden.w,
            &dense_hidden.b,
            &bn_hidden.gamma,
            &bn_hidden.beta,
            &bn_hidden.moving_mean,
            &bn_hidden.moving_var,
            &dense_out.w,
            &dense_out.b};
}

template <class S>
std::array<const Tensor<S>*, 18> Model<S>::all_tensors() const {
    auto mut = const_cast<Model<S>*>(this)->all_tensors();
    std::array<const Tensor<S>*, 18> out;
    for (std::size_t i = 0; i < mut.size(); ++i) out[i] = mut[i];
    return out;
}

template <class S>
Gradients<S> Gradients<S>::like(const Model<S>& m) {
    Gradients<S> g;
    for (const Tensor<S>* t : m.trainable_tensors()) {
        g.tensors.emplace_back(t->shape);
    }
    return g;
}

namespace {

template <class S>
void glorot_uniform(Tensor<S>& w, std::size_t fan_in, std::size_t fan_out,
                    SeededGenerator& g) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (S& v : w.data) {
        v = static_cast<S>((2.0 * g.next_uniform() - 1.0) * limit);
    }
}

} // namespace

template <class S>
Model<S> build_model(const ModelConfig& cfg, std::uint64_t init_seed) {
    cfg.validate();
    const std::size_t f = cfg.conv_filters;
    const std::size_t k = cfg.conv_kernel;
    const std::size_t n = cfg.flat_len();
    const std::size_t u = cfg.dense_units;
    const std::size_t c = cfg.classes;

    Model<S> m;
    m.cfg = cfg;
    m.bn_input = BatchNorm<S>::identity(1, cfg.bn_epsilon, cfg.bn_momentum);
    m.bn_conv = BatchNorm<S>::identity(f, cfg.bn_epsilon, cfg.bn_momentum);
    m.bn_hidden = BatchNorm<S>::identity(u, cfg.bn_epsilon, cfg.bn_momentum);
    m.conv.w = Tensor<S>({k, 1, f});
    m.conv.b = Tensor<S>({f});
    m.dense_hidden.w = Tensor<S>({n, u});
    m.dense_hidden.b = Tensor<S>({u});
    m.dense_out.w = Tensor<S>({u, c});
    m.dense_out.b = Tensor<S>({c});

    SeededGenerator g(init_seed);
    glorot_uniform(m.conv.w, k, k * f, g);
    glorot_uniform(m.dense_hidden.w, n, u, g);
    glorot_uniform(m.dense_out.w, u, c, g);

    // Structural identities of the layer stack, checked against the actual
    // tensor sizes.
    const ParameterCounts pc = parameter_counts(cfg);
    if (m.conv.w.size() + m.conv.b.size() != k * f + f ||
        pc.layers[2].params != k * f + f) {
        throw std::logic_error("build_model: conv parameter-count identity broken");
    }
    if (m.dense_hidden.w.size() + m.dense_hidden.b.size() != n * u + u ||
        pc.layers[5].params != n * u + u) {
        throw std::logic_error("build_model: dense parameter-count identity broken");
    }
    return m;
}

template <class S>
void TrainWorkspace<S>::ensure(const ModelConfig& cfg, std::size_t batch) {
    if (batch <= batch_capacity) return;
    const std::size_t b = batch;
    const std::size_t l = cfg.input_len;
    const std::size_t f = cfg.conv_filters;
    const std::size_t n = cfg.flat_len();
    const std::size_t u = cfg.dense_units;
    const std::size_t c = cfg.classes;
    bn0_out = Tensor<S>({b, l});
    conv_act = Tensor<S>({b, l, f});
    scratch_blf = Tensor<S>({b, l, f});
    hiddenT = Tensor<S>({n, b});
    d_hiddenT = Tensor<S>({n, b});
    a2 = Tensor<S>({b, u});
    bn2_out = Tensor<S>({b, u});
    d_bn2 = Tensor<S>({b, u});
    d_a2 = Tensor<S>({b, u});
    probs = Tensor<S>({b, c});
    d_out = Tensor<S>({b, c});
    d_bn0out = Tensor<S>({b, l});
    mean0.assign(1, 0.0);
    mean1.assign(f, 0.0);
    mean2.assign(u, 0.0);
    invstd0.assign(1, 0.0);
    invstd1.assign(f, 0.0);
    invstd2.assign(u, 0.0);
    batch_capacity = batch;
}

namespace {

// Shared train-mode forward: fills the workspace caches and returns the
// mean loss. `update_moving` distinguishes a real training step from a
// pure loss evaluation.
template <class S>
double train_forward(Model<S>& m, const S* x, i64 batch, const S* y_onehot,
                     TrainWorkspace<S>& ws, bool update_moving) {
    const auto& cfg = m.cfg;
    const i64 l = static_cast<i64>(cfg.input_len);
    const i64 f = static_cast<i64>(cfg.conv_filters);
    const i64 k = static_cast<i64>(cfg.conv_kernel);
    const i64 n = static_cast<i64>(cfg.flat_len());
    const i64 u = static_cast<i64>(cfg.dense_units);
    const i64 c = static_cast<i64>(cfg.classes);

    kernels::bn_train_forward(x, batch * l, 1, m.bn_input.gamma.ptr(),
                              m.bn_input.beta.ptr(), m.bn_input.epsilon,
                              m.bn_input.momentum, ws.bn0_out.ptr(),
                              ws.mean0.data(), ws.invstd0.data(),
                              m.bn_input.moving_mean.ptr(),
                              m.bn_input.moving_var.ptr(), update_moving);
    kernels::conv_forward<S, true>(ws.bn0_out.ptr(), batch, l, m.conv.w.ptr(),
                                   m.conv.b.ptr(), k, f, ws.conv_act.ptr());
    kernels::bn_train_forward(ws.conv_act.ptr(), batch * l, f,
                              m.bn_conv.gamma.ptr(), m.bn_conv.beta.ptr(),
                              m.bn_conv.epsilon, m.bn_conv.momentum,
                              ws.scratch_blf.ptr(), ws.mean1.data(),
                              ws.invstd1.data(),
                              m.bn_conv.moving_mean.ptr(),
                              m.bn_conv.moving_var.ptr(), update_moving);
    kernels::transpose(ws.scratch_blf.ptr(), batch, n, ws.hiddenT.ptr());
    kernels::dense_batch_forward(ws.hiddenT.ptr(), m.dense_hidden.w.ptr(),
                                 m.dense_hidden.b.ptr(), n, batch, u,
                                 ws.a2.ptr());
    for (i64 i = 0; i < batch * u; ++i) {
        ws.a2[i] = std::max(ws.a2[i], S(0));
    }
    kernels::bn_train_forward(ws.a2.ptr(), batch, u, m.bn_hidden.gamma.ptr(),
                              m.bn_hidden.beta.ptr(), m.bn_hidden.epsilon,
                              m.bn_hidden.momentum, ws.bn2_out.ptr(),
                              ws.mean2.data(), ws.invstd2.data(),
                              m.bn_hidden.moving_mean.ptr(),
                              m.bn_hidden.moving_var.ptr(), update_moving);
    // output layer is small; direct loops
    Tensor<S>& logits = ws.d_out; // reused as logits staging
    for (i64 b = 0; b < batch; ++b) {
        const S* xr = ws.bn2_out.ptr() + b * u;
        S* zr = logits.ptr() + b * c;
        for (i64 j = 0; j < c; ++j) zr[j] = m.dense_out.b[j];
        for (i64 i = 0; i < u; ++i) {
            const S v = xr[i];
            const S* wr = m.dense_out.w.ptr() + i * c;
            for (i64 j = 0; j < c; ++j) zr[j] += v * wr[j];
        }
    }
    return kernels::softmax_xent_forward(logits.ptr(), y_onehot, batch, c,
                                         ws.probs.ptr());
}

} // namespace

template <class S>
S forward_backward(Model<S>& m, const S* x, std::size_t batch_sz,
                   const S* y_onehot, Gradients<S>& grads,
                   TrainWorkspace<S>& ws) {
    if (batch_sz == 0) {
        throw std::invalid_argument("forward_backward: empty batch");
    }
    m.cfg.validate();
    ws.ensure(m.cfg, batch_sz);
    const i64 batch = static_cast<i64>(batch_sz);
    const auto& cfg = m.cfg;
    const i64 l = static_cast<i64>(cfg.input_len);
    const i64 f = static_cast<i64>(cfg.conv_filters);
    const i64 k = static_cast<i64>(cfg.conv_kernel);
    const i64 n = static_cast<i64>(cfg.flat_len());
    const i64 u = static_cast<i64>(cfg.dense_units);
    const i64 c = static_cast<i64>(cfg.classes);

    const double loss =
        train_forward(m, x, batch, y_onehot, ws, /*update_moving=*/true);

    if (grads.tensors.size() != 12) grads = Gradients<S>::like(m);
    Tensor<S>& d_bn0_gamma = grads.tensors[0];
    Tensor<S>& d_bn0_beta = grads.tensors[1];
    Tensor<S>& d_conv_w = grads.tensors[2];
    Tensor<S>& d_conv_b = grads.tensors[3];
    Tensor<S>& d_bn1_gamma = grads.tensors[4];
    Tensor<S>& d_bn1_beta = grads.tensors[5];
    Tensor<S>& d_dense1_w = grads.tensors[6];
    Tensor<S>& d_dense1_b = grads.tensors[7];
    Tensor<S>& d_bn2_gamma = grads.tensors[8];
    Tensor<S>& d_bn2_beta = grads.tensors[9];
    Tensor<S>& d_dense2_w = grads.tensors[10];
    Tensor<S>& d_dense2_b = grads.tensors[11];

    // softmax + cross-entropy
    kernels::softmax_xent_backward(ws.probs.ptr(), y_onehot, batch, c,
                                   ws.d_out.ptr());

    // output dense layer
    d_dense2_w.fill(S(0));
    for (i64 b = 0; b < batch; ++b) {
        const S* xr = ws.bn2_out.ptr() + b * u;
        const S* dr = ws.d_out.ptr() + b * c;
        for (i64 i = 0; i < u; ++i) {
            S* dwr = d_dense2_w.ptr() + i * c;
            const S v = xr[i];
            for (i64 j = 0; j < c; ++j) dwr[j] += v * dr[j];
        }
    }
    for (i64 j = 0; j < c; ++j) {
        double acc = 0.0;
        for (i64 b = 0; b < batch; ++b) acc += ws.d_out[b * c + j];
        d_dense2_b[j] = static_cast<S>(acc);
    }
    for (i64 b = 0; b < batch; ++b) {
        const S* dr = ws.d_out.ptr() + b * c;
        S* outr = ws.d_bn2.ptr() + b * u;
        for (i64 i = 0; i < u; ++i) {
            const S* wr = m.dense_out.w.ptr() + i * c;
            S acc = 0;
            for (i64 j = 0; j < c; ++j) acc += dr[j] * wr[j];
            outr[i] = acc;
        }
    }

    // hidden batchnorm with fused ReLU mask
    kernels::bn_backward<S, true>(ws.d_bn2.ptr(), ws.a2.ptr(),
                                  ws.mean2.data(), ws.invstd2.data(), batch, u,
                                  m.bn_hidden.gamma.ptr(), ws.d_a2.ptr(),
                                  d_bn2_gamma.ptr(), d_bn2_beta.ptr());

    // hidden dense layer
    kernels::dense_backward_params(ws.hiddenT.ptr(), ws.d_a2.ptr(), n, batch,
                                   u, d_dense1_w.ptr(), d_dense1_b.ptr());
    kernels::dense_backward_input(ws.d_a2.ptr(), m.dense_hidden.w.ptr(), n,
                                  batch, u, ws.d_hiddenT.ptr());
    kernels::transpose(ws.d_hiddenT.ptr(), n, batch, ws.scratch_blf.ptr());

    // conv batchnorm with fused ReLU mask
    kernels::bn_backward<S, true>(ws.scratch_blf.ptr(), ws.conv_act.ptr(),
                                  ws.mean1.data(), ws.invstd1.data(),
                                  batch * l, f, m.bn_conv.gamma.ptr(),
                                  ws.scratch_blf.ptr(), d_bn1_gamma.ptr(),
                                  d_bn1_beta.ptr());

    // convolution
    kernels::conv_backward_params(ws.bn0_out.ptr(), ws.scratch_blf.ptr(),
                                  batch, l, k, f, d_conv_w.ptr(),
                                  d_conv_b.ptr());
    kernels::conv_backward_input(ws.scratch_blf.ptr(), m.conv.w.ptr(), batch,
                                 l, k, f, ws.d_bn0out.ptr());

    // input batchnorm (input gradient not needed)
    kernels::bn_backward<S, false>(ws.d_bn0out.ptr(), x, ws.mean0.data(),
                                   ws.invstd0.data(), batch * l, 1,
                                   m.bn_input.gamma.ptr(), ws.d_bn0out.ptr(),
                                   d_bn0_gamma.ptr(), d_bn0_beta.ptr());

    return static_cast<S>(loss);
}

template <class S>
S batch_loss(const Model<S>& m, const S* x, std::size_t batch_sz,
             const S* y_onehot, Mode mode) {
    if (batch_sz == 0) {
        throw std::invalid_argument("batch_loss: empty batch");
    }
    const i64 batch = static_cast<i64>(batch_sz);
    if (mode == Mode::train) {
        // Batch statistics, no moving-stat update: the model stays intact.
        Model<S>& mut = const_cast<Model<S>&>(m);
        TrainWorkspace<S> ws;
        ws.ensure(m.cfg, batch_sz);
        return static_cast<S>(
            train_forward(mut, x, batch, y_onehot, ws, /*update_moving=*/false));
    }
    TrainWorkspace<S> ws;
    ws.ensure(m.cfg, batch_sz);
    std::vector<S> probs(batch_sz * m.cfg.classes);
    predict_batch(m, x, batch_sz, probs.data(), ws);
    double loss = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (y_onehot[i] != S(0)) {
            const double p = std::clamp(static_cast<double>(probs[i]), 1e-12, 1.0);
            loss -= static_cast<double>(y_onehot[i]) * std::log(p);
        }
    }
    return static_cast<S>(loss / static_cast<double>(batch_sz));
}

template <class S>
void predict_batch(const Model<S>& m, const S* x, std::size_t batch_sz,
                   S* probs, TrainWorkspace<S>& ws) {
    if (batch_sz == 0) {
        throw std::invalid_argument("predict_batch: empty batch");
    }
    m.cfg.validate();
    ws.ensure(m.cfg, batch_sz);
    const i64 batch = static_cast<i64>(batch_sz);
    const auto& cfg = m.cfg;
    const i64 l = static_cast<i64>(cfg.input_len);
    const i64 f = static_cast<i64>(cfg.conv_filters);
    const i64 k = static_cast<i64>(cfg.conv_kernel);
    const i64 n = static_cast<i64>(cfg.flat_len());
    const i64 u = static_cast<i64>(cfg.dense_units);
    const i64 c = static_cast<i64>(cfg.classes);

    kernels::bn_infer_forward(x, batch * l, 1, m.bn_input.gamma.ptr(),
                              m.bn_input.beta.ptr(),
                              m.bn_input.moving_mean.ptr(),
                              m.bn_input.moving_var.ptr(), m.bn_input.epsilon,
                              ws.bn0_out.ptr());
    kernels::conv_forward<S, true>(ws.bn0_out.ptr(), batch, l, m.conv.w.ptr(),
                                   m.conv.b.ptr(), k, f, ws.conv_act.ptr());
    kernels::bn_infer_forward(ws.conv_act.ptr(), batch * l, f,
                              m.bn_conv.gamma.ptr(), m.bn_conv.beta.ptr(),
                              m.bn_conv.moving_mean.ptr(),
                              m.bn_conv.moving_var.ptr(), m.bn_conv.epsilon,
                              ws.scratch_blf.ptr());
    kernels::transpose(ws.scratch_blf.ptr(), batch, n, ws.hiddenT.ptr());
    kernels::dense_batch_forward(ws.hiddenT.ptr(), m.dense_hidden.w.ptr(),
                                 m.dense_hidden.b.ptr(), n, batch, u,
                                 ws.a2.ptr());
    for (i64 i = 0; i < batch * u; ++i) {
        ws.a2[i] = std::max(ws.a2[i], S(0));
    }
    kernels::bn_infer_forward(ws.a2.ptr(), batch, u, m.bn_hidden.gamma.ptr(),
                              m.bn_hidden.beta.ptr(),
                              m.bn_hidden.moving_mean.ptr(),
                              m.bn_hidden.moving_var.ptr(),
                              m.bn_hidden.epsilon, ws.bn2_out.ptr());
    Tensor<S>& logits = ws.d_out;
    for (i64 b = 0; b < batch; ++b) {
        const S* xr = ws.bn2_out.ptr() + b * u;
        S* zr = logits.ptr() + b * c;
        for (i64 j = 0; j < c; ++j) zr[j] = m.dense_out.b[j];
        for (i64 i = 0; i < u; ++i) {
            const S v = xr[i];
            const S* wr = m.dense_out.w.ptr() + i * c;
            for (i64 j = 0; j < c; ++j) zr[j] += v * wr[j];
        }
    }
    std::vector<S> dummy(batch_sz * cfg.classes, S(0));
    kernels::softmax_xent_forward(logits.ptr(), dummy.data(), batch, c, probs);
}

template <class S>
std::vector<S> predict(const Model<S>& m, const std::vector<S>& window) {
    if (window.size() != m.cfg.input_len) {
        throw std::invalid_argument(
            "predict: window length " + std::to_string(window.size()) +
            " does not match model input " + std::to_string(m.cfg.input_len));
    }
    TrainWorkspace<S> ws;
    std::vector<S> probs(m.cfg.classes);
    predict_batch(m, window.data(), 1, probs.data(), ws);
    return probs;
}

template <class S>
std::uint8_t classify(const Model<S>& m, const std::vector<S>& window) {
    const std::vector<S> probs = predict(m, window);
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = i; // ties keep the lower index
    }
    return static_cast<std::uint8_t>(best);
}

namespace {

constexpr char kWeightsMagic[4] = {'C', 'H', 'N', 'N'};
constexpr std::uint16_t kWeightsVersion = 1;

} // namespace

void save_weights(const Model<float>& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    binio::put_bytes(out, kWeightsMagic, 4);
    binio::put_le(out, kWeightsVersion);
    binio::put_le(out, m.cfg.fingerprint());
    binio::put_le(out, static_cast<std::uint64_t>(m.cfg.input_len));
    binio::put_le(out, static_cast<std::uint64_t>(m.cfg.conv_filters));
    binio::put_le(out, static_cast<std::uint64_t>(m.cfg.conv_kernel));
    binio::put_le(out, static_cast<std::uint64_t>(m.cfg.dense_units));
    binio::put_le(out, static_cast<std::uint64_t>(m.cfg.classes));
    binio::put_f64_le(out, m.cfg.bn_epsilon);
    binio::put_f64_le(out, m.cfg.bn_momentum);
    for (const Tensor<float>* t : m.all_tensors()) {
        binio::put_f32_block(out, t->ptr(), t->size());
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

Model<float> load_weights(const std::filesystem::path& path,
                          std::optional<ModelConfig> expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    char magic[4];
    binio::get_bytes(in, magic, 4, path.string() + " magic");
    if (std::memcmp(magic, kWeightsMagic, 4) != 0) {
        throw std::runtime_error(path.string() + ": bad magic, expected \"CHNN\"");
    }
    const auto version = binio::get_le<std::uint16_t>(in, "version");
    if (version != kWeightsVersion) {
        throw std::runtime_error(path.string() + ": unsupported version " +
                                 std::to_string(version));
    }
    const auto stored_fp = binio::get_le<std::uint64_t>(in, "fingerprint");
    ModelConfig cfg;
    cfg.input_len = binio::get_le<std::uint64_t>(in, "input_len");
    cfg.conv_filters = binio::get_le<std::uint64_t>(in, "conv_filters");
    cfg.conv_kernel = binio::get_le<std::uint64_t>(in, "conv_kernel");
    cfg.dense_units = binio::get_le<std::uint64_t>(in, "dense_units");
    cfg.classes = binio::get_le<std::uint64_t>(in, "classes");
    cfg.bn_epsilon = binio::get_f64_le(in, "bn_epsilon");
    cfg.bn_momentum = binio::get_f64_le(in, "bn_momentum");
    if (cfg.fingerprint() != stored_fp) {
        throw std::runtime_error(path.string() + ": fingerprint mismatch, stored " +
                                 std::to_string(stored_fp) + " vs recomputed " +
                                 std::to_string(cfg.fingerprint()));
    }
    if (expected && expected->fingerprint() != stored_fp) {
        throw std::runtime_error(
            path.string() + ": architecture fingerprint mismatch, file has " +
            std::to_string(stored_fp) + ", expected " +
            std::to_string(expected->fingerprint()));
    }
    Model<float> m = build_model<float>(cfg, /*init_seed=*/0);
    for (Tensor<float>* t : m.all_tensors()) {
        binio::get_f32_block(in, t->ptr(), t->size(), "parameter block");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error(path.string() + ": trailing bytes after parameters");
    }
    return m;
}

#define BPK_NN_INSTANTIATE(S)                                                  \
    template struct Model<S>;                                                  \
    template struct Gradients<S>;                                              \
    template struct TrainWorkspace<S>;                                         \
    template Model<S> build_model<S>(const ModelConfig&, std::uint64_t);       \
    template S forward_backward<S>(Model<S>&, const S*, std::size_t,           \
                                   const S*, Gradients<S>&,                    \
                                   TrainWorkspace<S>&);                        \
    template S batch_loss<S>(const Model<S>&, const S*, std::size_t,           \
                             const S*, Mode);                                  \
    template void predict_batch<S>(const Model<S>&, const S*, std::size_t,     \
                                   S*, TrainWorkspace<S>&);                    \
    template std::vector<S> predict<S>(const Model<S>&,                        \
                                       const std::vector<S>&);                 \
    template std::uint8_t classify<S>(const Model<S>&, const std::vector<S>&);

BPK_NN_INSTANTIATE(float)
BPK_NN_INSTANTIATE(double)

#undef BPK_NN_INSTANTIATE

} // namespace bpk::nn
