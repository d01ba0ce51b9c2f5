#include "bpk/chaos.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bpk {

namespace {

void check_params(double x, double r) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("logistic_step: x = " + std::to_string(x) +
                                " outside [0, 1]");
    }
    if (!(r > 0.0 && r <= 4.0)) {
        throw std::domain_error("logistic_step: r = " + std::to_string(r) +
                                " outside (0, 4]");
    }
}

// Starting state for diagram columns and the Lyapunov orbit. Any generic
// point works; 0.5 is avoided because it maps straight onto the unstable
// fixed point 0 at r = 4.
constexpr double kGenericX0 = 0.3;

} // namespace

double logistic_step(double x, double r) {
    check_params(x, r);
    return r * x * (1.0 - x);
}

ChaoticSequence generate(const LogisticParams& params, std::size_t n,
                         std::size_t transient) {
    if (n == 0) {
        throw std::domain_error("generate: n must be positive");
    }
    double x = params.x0;
    if (!(x > 0.0 && x < 1.0)) {
        throw std::domain_error("generate: x0 = " + std::to_string(x) +
                                " outside (0, 1)");
    }
    check_params(x, params.r);
    const double r = params.r;
    for (std::size_t i = 0; i < transient; ++i) {
        x = r * x * (1.0 - x);
    }
    ChaoticSequence out(n);
    for (std::size_t i = 0; i < n; ++i) {
        x = r * x * (1.0 - x);
        out[i] = x;
    }
    return out;
}

std::vector<BifurcationPoint> bifurcation_diagram(double r_min, double r_max,
                                                  std::size_t r_steps,
                                                  std::size_t transient,
                                                  std::size_t keep) {
    if (!(r_min > 0.0 && r_min <= r_max && r_max <= 4.0)) {
        throw std::domain_error("bifurcation_diagram: need 0 < r_min <= r_max <= 4");
    }
    if (r_steps < 1 || keep < 1) {
        throw std::domain_error("bifurcation_diagram: r_steps and keep must be >= 1");
    }
    std::vector<BifurcationPoint> points;
    points.reserve(r_steps * keep);
    for (std::size_t i = 0; i < r_steps; ++i) {
        const double r = r_steps == 1
                             ? r_min
                             : r_min + (r_max - r_min) *
                                           static_cast<double>(i) /
                                           static_cast<double>(r_steps - 1);
        double x = kGenericX0;
        for (std::size_t k = 0; k < transient; ++k) {
            x = r * x * (1.0 - x);
        }
        for (std::size_t k = 0; k < keep; ++k) {
            x = r * x * (1.0 - x);
            points.push_back({r, x});
        }
    }
    return points;
}

double lyapunov_exponent(const LogisticParams& params, std::size_t n) {
    if (n < 10000) {
        throw std::domain_error("lyapunov_exponent: n must be >= 10^4");
    }
    check_params(params.x0, params.r);
    const double r = params.r;
    double x = params.x0;
    for (std::size_t i = 0; i < kDefaultTransient; ++i) {
        x = r * x * (1.0 - x);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double slope = std::fabs(r * (1.0 - 2.0 * x));
        // An orbit pinned exactly at the vertex has slope 0; clamp so the
        // average stays finite instead of collapsing to -inf.
        if (slope < 1e-300) {
            slope = 1e-300;
        }
        acc += std::log(slope);
        x = r * x * (1.0 - x);
    }
    return acc / static_cast<double>(n);
}

} // namespace bpk
