#pragma once

#include <cstdint>
#include <span>

namespace bpk {

/// Decision alphabet for the classical demodulator.
struct BaselineConfig {
    double r_space = 3.7;
    double r_mark = 3.75;
};

/// Least-squares estimate of the bifurcation parameter from consecutive
/// sample pairs:
///     r_hat = sum x_{n+1} * x_n * (1 - x_n) / sum (x_n * (1 - x_n))^2.
/// Exact on noiseless logistic-map data. Samples are clamped to
/// [-0.5, 1.5] first so deep-noise outliers cannot blow up the regression.
/// Throws std::domain_error on fewer than 2 samples or a degenerate
/// denominator (e.g. an all-zero window).
double estimate_r(std::span<const double> window);
double estimate_r(std::span<const float> window);

/// Nearest-parameter decision on estimate_r's output; ties go to 0.
std::uint8_t demod_baseline(std::span<const double> window,
                            const BaselineConfig& cfg);
std::uint8_t demod_baseline(std::span<const float> window,
                            const BaselineConfig& cfg);

} // namespace bpk
