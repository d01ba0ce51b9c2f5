#pragma once

#include "bpk/nn/tensor.hpp"

namespace bpk::nn {

enum class Mode { train, infer };

/// Per-channel scale/shift with running statistics for inference. The
/// channel dimension is the last axis of whatever tensor it normalizes.
template <class S>
struct BatchNorm {
    Tensor<S> gamma, beta;
    Tensor<S> moving_mean, moving_var;
    double epsilon = 1e-3;
    double momentum = 0.99;

    static BatchNorm identity(std::size_t channels, double epsilon = 1e-3,
                              double momentum = 0.99);
};

/// Same-padded stride-1 1-D convolution of a single-channel sequence:
/// y[t,f] = b[f] + sum_j w[j,0,f] * x[t + j - floor((k-1)/2)], zero outside.
/// x: [L] or [L,1]; w: [k,1,F]; b: [F]; result [L,F].
template <class S>
Tensor<S> conv1d_forward(const Tensor<S>& x, const Tensor<S>& w,
                         const Tensor<S>& b);

/// Batch statistics are taken over every axis but the last. Train mode
/// normalizes with them and updates the moving statistics; infer mode uses
/// the moving statistics only.
template <class S>
Tensor<S> batchnorm_forward(const Tensor<S>& x, Mode mode,
                            BatchNorm<S>& state);

/// y = x w + b with x: [n], w: [n,m], b: [m].
template <class S>
Tensor<S> dense_forward(const Tensor<S>& x, const Tensor<S>& w,
                        const Tensor<S>& b);

template <class S>
Tensor<S> relu(const Tensor<S>& x);

/// Max-subtracted softmax over a vector.
template <class S>
Tensor<S> softmax(const Tensor<S>& x);

/// -sum y_true * ln(p), probabilities clamped to [1e-12, 1].
template <class S>
double cross_entropy(const Tensor<S>& p, const Tensor<S>& onehot);

} // namespace bpk::nn
