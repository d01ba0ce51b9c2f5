#include "bpk/nn/ops.hpp"

#include <cmath>
#include <stdexcept>

#include "kernels.hpp"

namespace bpk::nn {

template <class S>
BatchNorm<S> BatchNorm<S>::identity(std::size_t channels, double epsilon,
                                    double momentum) {
    BatchNorm<S> bn;
    bn.gamma = Tensor<S>({channels});
    bn.gamma.fill(S(1));
    bn.beta = Tensor<S>({channels});
    bn.moving_mean = Tensor<S>({channels});
    bn.moving_var = Tensor<S>({channels});
    bn.moving_var.fill(S(1));
    bn.epsilon = epsilon;
    bn.momentum = momentum;
    return bn;
}

template <class S>
Tensor<S> conv1d_forward(const Tensor<S>& x, const Tensor<S>& w,
                         const Tensor<S>& b) {
    if (w.shape.size() != 3 || w.shape[1] != 1) {
        throw std::invalid_argument("conv1d_forward: w must be [k, 1, F]");
    }
    const std::size_t k = w.shape[0];
    const std::size_t f = w.shape[2];
    if (b.shape != std::vector<std::size_t>{f}) {
        throw std::invalid_argument("conv1d_forward: bias must be [F]");
    }
    const bool flat = x.shape.size() == 1;
    if (!flat && (x.shape.size() != 2 || x.shape[1] != 1)) {
        throw std::invalid_argument("conv1d_forward: x must be [L] or [L, 1]");
    }
    const std::size_t l = x.shape[0];
    Tensor<S> y({l, f});
    kernels::conv_forward<S, false>(x.ptr(), 1, static_cast<kernels::i64>(l),
                                    w.ptr(), b.ptr(),
                                    static_cast<kernels::i64>(k),
                                    static_cast<kernels::i64>(f), y.ptr());
    return y;
}

template <class S>
Tensor<S> batchnorm_forward(const Tensor<S>& x, Mode mode,
                            BatchNorm<S>& state) {
    if (x.shape.empty() || x.shape.back() != state.gamma.size()) {
        throw std::invalid_argument(
            "batchnorm_forward: trailing axis must match channel count");
    }
    const std::size_t c = x.shape.back();
    const std::size_t rows = x.size() / c;
    if (rows == 0) {
        throw std::invalid_argument("batchnorm_forward: empty batch");
    }
    Tensor<S> out(x.shape);
    if (mode == Mode::infer) {
        kernels::bn_infer_forward(x.ptr(), static_cast<kernels::i64>(rows),
                                  static_cast<kernels::i64>(c),
                                  state.gamma.ptr(), state.beta.ptr(),
                                  state.moving_mean.ptr(),
                                  state.moving_var.ptr(), state.epsilon,
                                  out.ptr());
    } else {
        std::vector<double> mean(c);
        std::vector<double> invstd(c);
        kernels::bn_train_forward(x.ptr(), static_cast<kernels::i64>(rows),
                                  static_cast<kernels::i64>(c),
                                  state.gamma.ptr(), state.beta.ptr(),
                                  state.epsilon, state.momentum, out.ptr(),
                                  mean.data(), invstd.data(),
                                  state.moving_mean.ptr(),
                                  state.moving_var.ptr(),
                                  /*update_moving=*/true);
    }
    return out;
}

template <class S>
Tensor<S> dense_forward(const Tensor<S>& x, const Tensor<S>& w,
                        const Tensor<S>& b) {
    if (w.shape.size() != 2 || x.size() != w.shape[0] ||
        b.size() != w.shape[1]) {
        throw std::invalid_argument("dense_forward: shape mismatch");
    }
    const std::size_t n = w.shape[0];
    const std::size_t m = w.shape[1];
    Tensor<S> y({m});
    for (std::size_t j = 0; j < m; ++j) y[j] = b[j];
    for (std::size_t i = 0; i < n; ++i) {
        const S v = x[i];
        const S* wr = w.ptr() + i * m;
        for (std::size_t j = 0; j < m; ++j) y[j] += v * wr[j];
    }
    return y;
}

template <class S>
Tensor<S> relu(const Tensor<S>& x) {
    Tensor<S> y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::max(x[i], S(0));
    return y;
}

template <class S>
Tensor<S> softmax(const Tensor<S>& x) {
    if (x.shape.size() != 1 || x.size() == 0) {
        throw std::invalid_argument("softmax: expects a non-empty vector");
    }
    for (S v : x.data) {
        if (!std::isfinite(static_cast<double>(v))) {
            throw std::invalid_argument("softmax: non-finite input");
        }
    }
    Tensor<S> p(x.shape);
    Tensor<S> onehot(x.shape); // unused labels; forward only
    kernels::softmax_xent_forward(x.ptr(), onehot.ptr(), 1,
                                  static_cast<kernels::i64>(x.size()),
                                  p.ptr());
    return p;
}

template <class S>
double cross_entropy(const Tensor<S>& p, const Tensor<S>& onehot) {
    if (p.shape != onehot.shape) {
        throw std::invalid_argument("cross_entropy: shape mismatch");
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (onehot[i] != S(0)) {
            const double clamped =
                std::clamp(static_cast<double>(p[i]), 1e-12, 1.0);
            loss -= static_cast<double>(onehot[i]) * std::log(clamped);
        }
    }
    return loss;
}

template struct BatchNorm<float>;
template struct BatchNorm<double>;
template Tensor<float> conv1d_forward(const Tensor<float>&,
                                      const Tensor<float>&,
                                      const Tensor<float>&);
template Tensor<double> conv1d_forward(const Tensor<double>&,
                                       const Tensor<double>&,
                                       const Tensor<double>&);
template Tensor<float> batchnorm_forward(const Tensor<float>&, Mode,
                                         BatchNorm<float>&);
template Tensor<double> batchnorm_forward(const Tensor<double>&, Mode,
                                          BatchNorm<double>&);
template Tensor<float> dense_forward(const Tensor<float>&,
                                     const Tensor<float>&,
                                     const Tensor<float>&);
template Tensor<double> dense_forward(const Tensor<double>&,
                                      const Tensor<double>&,
                                      const Tensor<double>&);
template Tensor<float> relu(const Tensor<float>&);
template Tensor<double> relu(const Tensor<double>&);
template Tensor<float> softmax(const Tensor<float>&);
template Tensor<double> softmax(const Tensor<double>&);
template double cross_entropy(const Tensor<float>&, const Tensor<float>&);
template double cross_entropy(const Tensor<double>&, const Tensor<double>&);

} // namespace bpk::nn
