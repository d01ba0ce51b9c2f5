#pragma once

#include <cstdint>
#include <vector>

#include "bpk/nn/model.hpp"
#include "bpk/nn/tensor.hpp"

namespace bpk::nn {

/// First/second moment estimates per trainable tensor plus the shared step
/// counter and hyperparameters.
template <class S>
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    std::uint64_t t = 0;
    std::vector<Tensor<S>> m, v;

    static AdamState like(const Model<S>& model, double lr = 1e-3,
                          double beta1 = 0.9, double beta2 = 0.999,
                          double epsilon = 1e-7);
};

/// One Adam update of a single tensor:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
///   p <- p - lr * mhat / (sqrt(vhat) + eps)   with bias-corrected moments.
template <class S>
void adam_update_tensor(Tensor<S>& p, const Tensor<S>& g, Tensor<S>& m,
                        Tensor<S>& v, std::uint64_t t, double lr, double beta1,
                        double beta2, double epsilon);

/// Applies one step to every trainable tensor of the model.
template <class S>
void adam_step(Model<S>& model, const Gradients<S>& grads,
               AdamState<S>& state);

} // namespace bpk::nn
