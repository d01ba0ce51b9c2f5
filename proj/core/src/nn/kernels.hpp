#pragma once

// Batch kernels behind the layer operations. Every parallel loop assigns
// each output element to exactly one owner that accumulates in a fixed
// sequential order, and cross-chunk combines use a chunk count derived from
// the problem size, so results are bitwise identical for any thread count.
//
// Loop orders are chosen so the large tensors (conv activations, dense
// weights) stream through memory exactly once per pass.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace bpk::nn::kernels {

using i64 = std::int64_t;

inline constexpr i64 kRowChunk = 4096; // rows per partial-sum chunk
inline constexpr i64 kUBlock = 32;     // dense output-unit block
inline constexpr i64 kIBlock = 8192;   // dense input-feature block
inline constexpr i64 kFChunk = 16;     // conv filter chunk
inline constexpr i64 kMaxKernel = 64;  // conv kernel cap (stack buffers)

// Per-channel sums of x and x^2 over `rows` rows of layout [rows, C],
// accumulated in double.
template <class S>
void channel_sums(const S* __restrict__ x, i64 rows, i64 C,
                  double* __restrict__ sum, double* __restrict__ sum_sq) {
    const i64 nchunks = (rows + kRowChunk - 1) / kRowChunk;
    std::vector<double> part_sum(static_cast<std::size_t>(nchunks * C), 0.0);
    std::vector<double> part_sq(static_cast<std::size_t>(nchunks * C), 0.0);
#pragma omp parallel for schedule(static)
    for (i64 chunk = 0; chunk < nchunks; ++chunk) {
        double* __restrict__ ps = part_sum.data() + chunk * C;
        double* __restrict__ pq = part_sq.data() + chunk * C;
        const i64 lo = chunk * kRowChunk;
        const i64 hi = std::min(rows, lo + kRowChunk);
        for (i64 row = lo; row < hi; ++row) {
            const S* __restrict__ xr = x + row * C;
            for (i64 c = 0; c < C; ++c) {
                const double v = static_cast<double>(xr[c]);
                ps[c] += v;
                pq[c] += v * v;
            }
        }
    }
    std::fill(sum, sum + C, 0.0);
    std::fill(sum_sq, sum_sq + C, 0.0);
    for (i64 chunk = 0; chunk < nchunks; ++chunk) {
        for (i64 c = 0; c < C; ++c) {
            sum[c] += part_sum[static_cast<std::size_t>(chunk * C + c)];
            sum_sq[c] += part_sq[static_cast<std::size_t>(chunk * C + c)];
        }
    }
}

// Per-channel sums of d and d * x (batchnorm backward reductions).
template <class S>
void channel_grad_sums(const S* __restrict__ d, const S* __restrict__ x,
                       i64 rows, i64 C, double* __restrict__ sum_d,
                       double* __restrict__ sum_dx) {
    const i64 nchunks = (rows + kRowChunk - 1) / kRowChunk;
    std::vector<double> part_d(static_cast<std::size_t>(nchunks * C), 0.0);
    std::vector<double> part_dx(static_cast<std::size_t>(nchunks * C), 0.0);
#pragma omp parallel for schedule(static)
    for (i64 chunk = 0; chunk < nchunks; ++chunk) {
        double* __restrict__ pd = part_d.data() + chunk * C;
        double* __restrict__ px = part_dx.data() + chunk * C;
        const i64 lo = chunk * kRowChunk;
        const i64 hi = std::min(rows, lo + kRowChunk);
        for (i64 row = lo; row < hi; ++row) {
            const S* __restrict__ dr = d + row * C;
            const S* __restrict__ xr = x + row * C;
            for (i64 c = 0; c < C; ++c) {
                pd[c] += static_cast<double>(dr[c]);
                px[c] += static_cast<double>(dr[c]) * static_cast<double>(xr[c]);
            }
        }
    }
    std::fill(sum_d, sum_d + C, 0.0);
    std::fill(sum_dx, sum_dx + C, 0.0);
    for (i64 chunk = 0; chunk < nchunks; ++chunk) {
        for (i64 c = 0; c < C; ++c) {
            sum_d[c] += part_d[static_cast<std::size_t>(chunk * C + c)];
            sum_dx[c] += part_dx[static_cast<std::size_t>(chunk * C + c)];
        }
    }
}

template <class S>
void affine_rows_block(const S* __restrict__ x, const S* __restrict__ scale,
                       const S* __restrict__ shift, i64 lo, i64 hi, i64 C,
                       S* __restrict__ out) {
    for (i64 row = lo; row < hi; ++row) {
        const S* __restrict__ xr = x + row * C;
        S* __restrict__ yr = out + row * C;
        for (i64 c = 0; c < C; ++c) {
            yr[c] = scale[c] * xr[c] + shift[c];
        }
    }
}

// out[row, c] = scale[c] * x[row, c] + shift[c]
template <class S>
void affine_rows(const S* x, const S* scale, const S* shift, i64 rows, i64 C,
                 S* out) {
    const i64 nchunks = (rows + kRowChunk - 1) / kRowChunk;
#pragma omp parallel for schedule(static)
    for (i64 chunk = 0; chunk < nchunks; ++chunk) {
        affine_rows_block(x, scale, shift, chunk * kRowChunk,
                          std::min(rows, (chunk + 1) * kRowChunk), C, out);
    }
}

// Train-mode batchnorm: batch statistics over the rows, scaled output
// written, per-channel mean/invstd exported for the backward pass, moving
// statistics optionally blended with `momentum`. xhat is not materialized;
// backward recomputes it from the cached layer input.
template <class S>
void bn_train_forward(const S* __restrict__ x, i64 rows, i64 C,
                      const S* __restrict__ gamma, const S* __restrict__ beta,
                      double eps, double momentum, S* __restrict__ out,
                      double* __restrict__ mean, double* __restrict__ invstd,
                      S* __restrict__ moving_mean, S* __restrict__ moving_var,
                      bool update_moving) {
    std::vector<double> var(static_cast<std::size_t>(C));
    channel_sums(x, rows, C, mean, var.data());
    const double n = static_cast<double>(rows);
    for (i64 c = 0; c < C; ++c) {
        mean[c] /= n;
        var[c] = std::max(0.0, var[c] / n - mean[c] * mean[c]);
        invstd[c] = 1.0 / std::sqrt(var[c] + eps);
    }
    if (update_moving) {
        for (i64 c = 0; c < C; ++c) {
            moving_mean[c] = static_cast<S>(momentum * moving_mean[c] +
                                            (1.0 - momentum) * mean[c]);
            moving_var[c] = static_cast<S>(momentum * moving_var[c] +
                                           (1.0 - momentum) * var[c]);
        }
    }
    std::vector<S> scale(static_cast<std::size_t>(C));
    std::vector<S> shift(static_cast<std::size_t>(C));
    for (i64 c = 0; c < C; ++c) {
        scale[c] = static_cast<S>(gamma[c] * invstd[c]);
        shift[c] = static_cast<S>(beta[c] - mean[c] * invstd[c] * gamma[c]);
    }
    affine_rows(x, scale.data(), shift.data(), rows, C, out);
}

template <class S>
void bn_infer_forward(const S* __restrict__ x, i64 rows, i64 C,
                      const S* __restrict__ gamma, const S* __restrict__ beta,
                      const S* __restrict__ moving_mean,
                      const S* __restrict__ moving_var, double eps,
                      S* __restrict__ out) {
    std::vector<S> scale(static_cast<std::size_t>(C));
    std::vector<S> shift(static_cast<std::size_t>(C));
    for (i64 c = 0; c < C; ++c) {
        const double s =
            gamma[c] / std::sqrt(static_cast<double>(moving_var[c]) + eps);
        scale[c] = static_cast<S>(s);
        shift[c] = static_cast<S>(beta[c] - moving_mean[c] * s);
    }
    affine_rows(x, scale.data(), shift.data(), rows, C, out);
}

template <class S, bool kReluMask>
void bn_backward_block(const S* __restrict__ d, const S* __restrict__ x,
                       const S* __restrict__ a, const S* __restrict__ b,
                       const S* __restrict__ cshift, i64 lo, i64 hi, i64 C,
                       S* __restrict__ dx) {
    for (i64 row = lo; row < hi; ++row) {
        const S* __restrict__ dr = d + row * C;
        const S* __restrict__ xr = x + row * C;
        S* __restrict__ outr = dx + row * C;
        for (i64 c = 0; c < C; ++c) {
            const S v = a[c] * dr[c] + b[c] * xr[c] + cshift[c];
            if constexpr (kReluMask) {
                outr[c] = xr[c] > S(0) ? v : S(0);
            } else {
                outr[c] = v;
            }
        }
    }
}

// d/dx of train-mode batchnorm with biased batch variance, from the cached
// layer input x (xhat recomputed on the fly):
//   dx = gamma * invstd * (d - mean(d) - xhat * mean(d * xhat))
// With kReluMask set, dx is additionally zeroed where x <= 0 (x being the
// output of the preceding ReLU, this is exactly the ReLU mask).
// dx may alias d.
template <class S, bool kReluMask>
void bn_backward(const S* __restrict__ d, const S* __restrict__ x,
                 const double* __restrict__ mean,
                 const double* __restrict__ invstd, i64 rows, i64 C,
                 const S* __restrict__ gamma, S* __restrict__ dx,
                 S* __restrict__ dgamma, S* __restrict__ dbeta) {
    std::vector<double> sum_d(static_cast<std::size_t>(C));
    std::vector<double> sum_dx(static_cast<std::size_t>(C));
    channel_grad_sums(d, x, rows, C, sum_d.data(), sum_dx.data());
    const double n = static_cast<double>(rows);
    // scale/shift form of dx = g*is*(d - mean_d - xhat*mean_dxhat):
    //   dx = a*d + b*x + c  with xhat = (x - mean)*invstd
    std::vector<double> sum_dxhat(static_cast<std::size_t>(C));
    std::vector<S> ca(static_cast<std::size_t>(C));
    std::vector<S> cb(static_cast<std::size_t>(C));
    std::vector<S> cc(static_cast<std::size_t>(C));
    for (i64 c = 0; c < C; ++c) {
        sum_dxhat[c] = (sum_dx[c] - mean[c] * sum_d[c]) * invstd[c];
        dgamma[c] = static_cast<S>(sum_dxhat[c]);
        dbeta[c] = static_cast<S>(sum_d[c]);
        const double g_is = gamma[c] * invstd[c];
        const double mean_dxhat = sum_dxhat[c] / n;
        ca[c] = static_cast<S>(g_is);
        cb[c] = static_cast<S>(-g_is * invstd[c] * mean_dxhat);
        cc[c] = static_cast<S>(
            g_is * (-sum_d[c] / n + mean[c] * invstd[c] * mean_dxhat));
    }
    const i64 nchunks = (rows + kRowChunk - 1) / kRowChunk;
#pragma omp parallel for schedule(static)
    for (i64 chunk = 0; chunk < nchunks; ++chunk) {
        bn_backward_block<S, kReluMask>(d, x, ca.data(), cb.data(), cc.data(),
                                        chunk * kRowChunk,
                                        std::min(rows, (chunk + 1) * kRowChunk),
                                        C, dx);
    }
}

// Same-padded single-input-channel conv1d over a batch; optionally fuses
// the ReLU. x: [B, L]; w: [k, F]; y: [B, L, F]. Accumulators live in a
// 64-wide register chunk, so w streams from L1 and y is written once.
template <class S, bool kFuseRelu>
void conv_forward(const S* __restrict__ x, i64 B, i64 L,
                  const S* __restrict__ w, const S* __restrict__ bias, i64 k,
                  i64 F, S* __restrict__ y) {
    const i64 pad = (k - 1) / 2;
    constexpr i64 kAcc = 64;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 l = 0; l < L; ++l) {
            S* __restrict__ yr = y + (b * L + l) * F;
            const i64 jlo = std::max<i64>(0, pad - l);
            const i64 jhi = std::min<i64>(k, L + pad - l);
            const S* __restrict__ xb = x + b * L + l - pad;
            for (i64 f0 = 0; f0 < F; f0 += kAcc) {
                const i64 nf = std::min<i64>(kAcc, F - f0);
                S acc[kAcc];
                for (i64 f = 0; f < nf; ++f) acc[f] = bias[f0 + f];
                for (i64 j = jlo; j < jhi; ++j) {
                    const S v = xb[j];
                    const S* __restrict__ wr = w + j * F + f0;
                    for (i64 f = 0; f < nf; ++f) acc[f] += v * wr[f];
                }
                if constexpr (kFuseRelu) {
                    for (i64 f = 0; f < nf; ++f) acc[f] = std::max(acc[f], S(0));
                }
                for (i64 f = 0; f < nf; ++f) yr[f0 + f] = acc[f];
            }
        }
    }
}

// dx[b,t] = sum_{j,f} w[j,f] * dy[b, t - j + pad, f]. Each dy row is read
// once: its k per-tap dot products are scattered into the (L1-resident)
// dx row of its batch element. Parallel over b.
template <class S>
void conv_backward_input(const S* __restrict__ dy, const S* __restrict__ w,
                         i64 B, i64 L, i64 k, i64 F, S* __restrict__ dx) {
    const i64 pad = (k - 1) / 2;
    // wT[f][j] so the per-tap dots vectorize over j
    std::vector<S> wt(static_cast<std::size_t>(F * k));
    for (i64 j = 0; j < k; ++j) {
        for (i64 f = 0; f < F; ++f) wt[f * k + j] = w[j * F + f];
    }
    const S* __restrict__ wT = wt.data();
#pragma omp parallel for schedule(static)
    for (i64 b = 0; b < B; ++b) {
        S* __restrict__ dxr = dx + b * L;
        std::fill(dxr, dxr + L, S(0));
        for (i64 l = 0; l < L; ++l) {
            const S* __restrict__ dyr = dy + (b * L + l) * F;
            S taps[kMaxKernel];
            std::fill(taps, taps + k, S(0));
            for (i64 f = 0; f < F; ++f) {
                const S v = dyr[f];
                const S* __restrict__ wtr = wT + f * k;
                for (i64 j = 0; j < k; ++j) taps[j] += v * wtr[j];
            }
            // dy row l feeds dx[l + j - pad]: the same offsets the forward
            // pass read from, not their mirror
            const i64 jlo = std::max<i64>(0, pad - l);
            const i64 jhi = std::min<i64>(k, L + pad - l);
            for (i64 j = jlo; j < jhi; ++j) dxr[l + j - pad] += taps[j];
        }
    }
}

// dw[j,f] = sum_{b,l} x[b, l + j - pad] * dy[b,l,f]; db[f] = sum dy.
// Parallel over fixed filter chunks; dy streams once per chunk slice.
template <class S>
void conv_backward_params(const S* __restrict__ x, const S* __restrict__ dy,
                          i64 B, i64 L, i64 k, i64 F, S* __restrict__ dw,
                          S* __restrict__ db) {
    const i64 pad = (k - 1) / 2;
    const i64 nchunks = (F + kFChunk - 1) / kFChunk;
#pragma omp parallel for schedule(static)
    for (i64 chunk = 0; chunk < nchunks; ++chunk) {
        const i64 f0 = chunk * kFChunk;
        const i64 nf = std::min<i64>(kFChunk, F - f0);
        // acc[j][0..nf) stays in cache across the whole (b,l) sweep
        S acc[kMaxKernel][kFChunk] = {};
        for (i64 b = 0; b < B; ++b) {
            const S* __restrict__ xb = x + b * L;
            for (i64 l = 0; l < L; ++l) {
                const S* __restrict__ dyr = dy + (b * L + l) * F + f0;
                const i64 jlo = std::max<i64>(0, pad - l);
                const i64 jhi = std::min<i64>(k, L + pad - l);
                for (i64 j = jlo; j < jhi; ++j) {
                    const S v = xb[l + j - pad];
                    for (i64 f = 0; f < nf; ++f) acc[j][f] += v * dyr[f];
                }
            }
        }
        for (i64 j = 0; j < k; ++j) {
            for (i64 f = 0; f < nf; ++f) dw[j * F + f0 + f] = acc[j][f];
        }
    }
    std::vector<double> sum(static_cast<std::size_t>(F));
    std::vector<double> unused(static_cast<std::size_t>(F));
    channel_sums(dy, B * L, F, sum.data(), unused.data());
    for (i64 f = 0; f < F; ++f) db[f] = static_cast<S>(sum[f]);
}

// The per-block bodies live in standalone functions: restrict qualifiers on
// captured pointers do not survive OpenMP outlining, and without them the
// accumulation loops refuse to vectorize.

template <class S>
void dense_fwd_block(const S* __restrict__ xT, const S* __restrict__ w,
                     const S* __restrict__ bias, i64 N, i64 B, i64 U, i64 u0,
                     i64 u1, S* __restrict__ y) {
    const i64 nu = u1 - u0;
    // Thread-private accumulator tile; neighbouring u-blocks interleave
    // inside each y row, so accumulating into y directly would bounce
    // cache lines between threads on every update.
    std::vector<S> tile(static_cast<std::size_t>(B * nu));
    S* __restrict__ acc = tile.data();
    for (i64 b = 0; b < B; ++b) {
        for (i64 u = 0; u < nu; ++u) acc[b * nu + u] = bias[u0 + u];
    }
    for (i64 i = 0; i < N; ++i) {
        const S* __restrict__ xr = xT + i * B;
        const S* __restrict__ wr = w + i * U + u0;
        for (i64 b = 0; b < B; ++b) {
            const S v = xr[b];
            S* __restrict__ ar = acc + b * nu;
            for (i64 u = 0; u < nu; ++u) ar[u] += v * wr[u];
        }
    }
    for (i64 b = 0; b < B; ++b) {
        S* __restrict__ yr = y + b * U + u0;
        for (i64 u = 0; u < nu; ++u) yr[u] = acc[b * nu + u];
    }
}

// y[b,u] = bias[u] + sum_i xT[i,b] * w[i,u], with xT the [N, B] transpose
// of the flattened activations. Parallel over fixed-size u-blocks; the
// [B, u-block] accumulator tile stays in L1 while w and xT stream once.
template <class S>
void dense_batch_forward(const S* xT, const S* w, const S* bias, i64 N, i64 B,
                         i64 U, S* y) {
    const i64 nblocks = (U + kUBlock - 1) / kUBlock;
#pragma omp parallel for schedule(static)
    for (i64 blk = 0; blk < nblocks; ++blk) {
        dense_fwd_block(xT, w, bias, N, B, U, blk * kUBlock,
                        std::min(U, (blk + 1) * kUBlock), y);
    }
}

template <class S>
void dense_bwd_input_block(const S* __restrict__ dT, const S* __restrict__ w,
                           i64 B, i64 U, i64 i0, i64 i1, S* __restrict__ acc,
                           S* __restrict__ dxT) {
    // dT is the [U, B] transpose of the upstream gradient, so each dxT row
    // accumulates with broadcast-FMA only (no horizontal reductions).
    for (i64 i = i0; i < i1; ++i) {
        const S* __restrict__ wr = w + i * U;
        for (i64 b = 0; b < B; ++b) acc[b] = 0;
        for (i64 u = 0; u < U; ++u) {
            const S v = wr[u];
            const S* __restrict__ dr = dT + u * B;
            for (i64 b = 0; b < B; ++b) acc[b] += v * dr[b];
        }
        S* __restrict__ outr = dxT + i * B;
        for (i64 b = 0; b < B; ++b) outr[b] = acc[b];
    }
}

// dxT[i,b] = sum_u d[b,u] * w[i,u]
template <class S>
void dense_backward_input(const S* d, const S* w, i64 N, i64 B, i64 U,
                          S* dxT) {
    std::vector<S> dt(static_cast<std::size_t>(U * B));
    for (i64 b = 0; b < B; ++b) {
        for (i64 u = 0; u < U; ++u) dt[u * B + b] = d[b * U + u];
    }
    const i64 nblocks = (N + kIBlock - 1) / kIBlock;
#pragma omp parallel for schedule(static)
    for (i64 blk = 0; blk < nblocks; ++blk) {
        std::vector<S> acc(static_cast<std::size_t>(B));
        dense_bwd_input_block(dt.data(), w, B, U, blk * kIBlock,
                              std::min(N, (blk + 1) * kIBlock), acc.data(),
                              dxT);
    }
}

template <class S>
void dense_bwd_params_block(const S* __restrict__ xT, const S* __restrict__ d,
                            i64 B, i64 U, i64 i0, i64 i1,
                            S* __restrict__ dw) {
    for (i64 i = i0; i < i1; ++i) {
        const S* __restrict__ xr = xT + i * B;
        S* __restrict__ dwr = dw + i * U;
        std::fill(dwr, dwr + U, S(0));
        for (i64 b = 0; b < B; ++b) {
            const S v = xr[b];
            const S* __restrict__ dr = d + b * U;
            for (i64 u = 0; u < U; ++u) dwr[u] += v * dr[u];
        }
    }
}

// dw[i,u] = sum_b xT[i,b] * d[b,u]; db[u] = sum_b d[b,u]
template <class S>
void dense_backward_params(const S* xT, const S* d, i64 N, i64 B, i64 U,
                           S* dw, S* db) {
    const i64 nblocks = (N + kIBlock - 1) / kIBlock;
#pragma omp parallel for schedule(static)
    for (i64 blk = 0; blk < nblocks; ++blk) {
        dense_bwd_params_block(xT, d, B, U, blk * kIBlock,
                               std::min(N, (blk + 1) * kIBlock), dw);
    }
    for (i64 u = 0; u < U; ++u) {
        double acc = 0.0;
        for (i64 b = 0; b < B; ++b) acc += static_cast<double>(d[b * U + u]);
        db[u] = static_cast<S>(acc);
    }
}

// dst[c, r] = src[r, c], blocked for locality.
template <class S>
void transpose(const S* __restrict__ src, i64 rows, i64 cols,
               S* __restrict__ dst) {
    constexpr i64 TB = 64;
    const i64 nrb = (rows + TB - 1) / TB;
    const i64 ncb = (cols + TB - 1) / TB;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 rb = 0; rb < nrb; ++rb) {
        for (i64 cb = 0; cb < ncb; ++cb) {
            const i64 r1 = std::min(rows, (rb + 1) * TB);
            const i64 c1 = std::min(cols, (cb + 1) * TB);
            for (i64 r = rb * TB; r < r1; ++r) {
                for (i64 c = cb * TB; c < c1; ++c) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

// Row-wise softmax plus mean cross-entropy against one-hot labels.
// Probabilities are exact softmax outputs; only the log is clamped.
template <class S>
double softmax_xent_forward(const S* __restrict__ logits,
                            const S* __restrict__ onehot, i64 B, i64 C,
                            S* __restrict__ probs) {
    double loss = 0.0;
    for (i64 b = 0; b < B; ++b) {
        const S* __restrict__ zr = logits + b * C;
        S* __restrict__ pr = probs + b * C;
        S zmax = zr[0];
        for (i64 c = 1; c < C; ++c) zmax = std::max(zmax, zr[c]);
        double denom = 0.0;
        for (i64 c = 0; c < C; ++c) {
            const double e = std::exp(static_cast<double>(zr[c] - zmax));
            pr[c] = static_cast<S>(e);
            denom += e;
        }
        for (i64 c = 0; c < C; ++c) {
            pr[c] = static_cast<S>(pr[c] / denom);
        }
        const S* __restrict__ yr = onehot + b * C;
        for (i64 c = 0; c < C; ++c) {
            if (yr[c] != S(0)) {
                const double p =
                    std::clamp(static_cast<double>(pr[c]), 1e-12, 1.0);
                loss -= static_cast<double>(yr[c]) * std::log(p);
            }
        }
    }
    return loss / static_cast<double>(B);
}

// d(mean CE)/dlogits = (p - y) / B
template <class S>
void softmax_xent_backward(const S* __restrict__ probs,
                           const S* __restrict__ onehot, i64 B, i64 C,
                           S* __restrict__ dlogits) {
    const S inv_b = S(1) / static_cast<S>(B);
    for (i64 i = 0; i < B * C; ++i) {
        dlogits[i] = (probs[i] - onehot[i]) * inv_b;
    }
}

} // namespace bpk::nn::kernels
