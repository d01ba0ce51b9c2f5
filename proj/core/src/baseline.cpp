#include "bpk/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bpk {

namespace {

double estimate_r_clamped(std::span<const double> window) {
    if (window.size() < 2) {
        throw std::domain_error("estimate_r: need at least 2 samples");
    }
    auto clamp = [](double v) { return std::clamp(v, -0.5, 1.5); };
    double num = 0.0;
    double den = 0.0;
    double prev = clamp(window[0]);
    for (std::size_t n = 1; n < window.size(); ++n) {
        const double cur = clamp(window[n]);
        const double basis = prev * (1.0 - prev);
        num += cur * basis;
        den += basis * basis;
        prev = cur;
    }
    if (!(den > 0.0)) {
        throw std::domain_error(
            "estimate_r: degenerate window, all samples at a fixed point");
    }
    return num / den;
}

} // namespace

double estimate_r(std::span<const double> window) {
    return estimate_r_clamped(window);
}

double estimate_r(std::span<const float> window) {
    std::vector<double> promoted(window.begin(), window.end());
    return estimate_r_clamped(promoted);
}

namespace {

std::uint8_t decide(double r_hat, const BaselineConfig& cfg) {
    const double d_space = std::fabs(r_hat - cfg.r_space);
    const double d_mark = std::fabs(r_hat - cfg.r_mark);
    return d_mark < d_space ? 1 : 0;
}

} // namespace

std::uint8_t demod_baseline(std::span<const double> window,
                            const BaselineConfig& cfg) {
    return decide(estimate_r(window), cfg);
}

std::uint8_t demod_baseline(std::span<const float> window,
                            const BaselineConfig& cfg) {
    return decide(estimate_r(window), cfg);
}

} // namespace bpk
