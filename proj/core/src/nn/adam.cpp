#include "bpk/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace bpk::nn {

template <class S>
AdamState<S> AdamState<S>::like(const Model<S>& model, double lr, double beta1,
                                double beta2, double epsilon) {
    AdamState<S> st;
    st.lr = lr;
    st.beta1 = beta1;
    st.beta2 = beta2;
    st.epsilon = epsilon;
    for (const Tensor<S>* t : model.trainable_tensors()) {
        st.m.emplace_back(t->shape);
        st.v.emplace_back(t->shape);
    }
    return st;
}

template <class S>
void adam_update_tensor(Tensor<S>& p, const Tensor<S>& g, Tensor<S>& m,
                        Tensor<S>& v, std::uint64_t t, double lr, double beta1,
                        double beta2, double epsilon) {
    if (p.shape != g.shape || p.shape != m.shape || p.shape != v.shape) {
        throw std::invalid_argument("adam_update_tensor: shape mismatch");
    }
    const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    const S b1 = static_cast<S>(beta1);
    const S b2 = static_cast<S>(beta2);
    const S one_minus_b1 = static_cast<S>(1.0 - beta1);
    const S one_minus_b2 = static_cast<S>(1.0 - beta2);
    const S inv_corr1 = static_cast<S>(1.0 / corr1);
    const S inv_corr2 = static_cast<S>(1.0 / corr2);
    const S step = static_cast<S>(lr);
    const S eps = static_cast<S>(epsilon);
    const std::int64_t n = static_cast<std::int64_t>(p.size());
    S* pp = p.ptr();
    S* mp = m.ptr();
    S* vp = v.ptr();
    const S* gp = g.ptr();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const S gi = gp[i];
        mp[i] = b1 * mp[i] + one_minus_b1 * gi;
        vp[i] = b2 * vp[i] + one_minus_b2 * gi * gi;
        const S mhat = mp[i] * inv_corr1;
        const S vhat = vp[i] * inv_corr2;
        pp[i] -= step * mhat / (std::sqrt(vhat) + eps);
    }
}

template <class S>
void adam_step(Model<S>& model, const Gradients<S>& grads,
               AdamState<S>& state) {
    auto params = model.trainable_tensors();
    if (grads.tensors.size() != params.size() ||
        state.m.size() != params.size()) {
        throw std::invalid_argument("adam_step: gradient/state arity mismatch");
    }
    ++state.t;
    for (std::size_t i = 0; i < params.size(); ++i) {
        adam_update_tensor(*params[i], grads.tensors[i], state.m[i],
                           state.v[i], state.t, state.lr, state.beta1,
                           state.beta2, state.epsilon);
    }
}

#define BPK_ADAM_INSTANTIATE(S)                                               \
    template struct AdamState<S>;                                             \
    template void adam_update_tensor<S>(Tensor<S>&, const Tensor<S>&,         \
                                        Tensor<S>&, Tensor<S>&,               \
                                        std::uint64_t, double, double,        \
                                        double, double);                      \
    template void adam_step<S>(Model<S>&, const Gradients<S>&, AdamState<S>&);

BPK_ADAM_INSTANTIATE(float)
BPK_ADAM_INSTANTIATE(double)

#undef BPK_ADAM_INSTANTIATE

} // namespace bpk::nn
