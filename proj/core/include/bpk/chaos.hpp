#pragma once

#include <cstddef>
#include <vector>

namespace bpk {

/// Bifurcation parameter and initial state of the quadratic recurrence
/// x_{n+1} = r * x_n * (1 - x_n). Valid parameters keep orbits in [0,1].
struct LogisticParams {
    double r;
    double x0;
};

using ChaoticSequence = std::vector<double>;

struct BifurcationPoint {
    double r;
    double x;
};

/// Iterations discarded before any sample is emitted, so orbits settle onto
/// the attractor regardless of x0.
inline constexpr std::size_t kDefaultTransient = 128;

/// One iterate of the logistic map. Throws std::domain_error if x is outside
/// [0,1] or r outside (0,4].
double logistic_step(double x, double r);

/// Iterates `transient` steps from params.x0 (discarded), then returns the
/// next `n` iterates.
ChaoticSequence generate(const LogisticParams& params, std::size_t n,
                         std::size_t transient = kDefaultTransient);

/// Attractor samples on a uniform r grid: per column, `transient` burn-in
/// iterations followed by `keep` emitted points. Defaults reproduce the
/// classic diagram over r in [2.8, 4.0].
std::vector<BifurcationPoint> bifurcation_diagram(double r_min = 2.8,
                                                  double r_max = 4.0,
                                                  std::size_t r_steps = 1200,
                                                  std::size_t transient = 500,
                                                  std::size_t keep = 200);

/// Numerical Lyapunov exponent (1/n) * sum ln|r * (1 - 2 x_i)| over the
/// post-transient orbit. Positive values diagnose the chaotic regime.
/// Requires n >= 10^4.
double lyapunov_exponent(const LogisticParams& params, std::size_t n);

} // namespace bpk
