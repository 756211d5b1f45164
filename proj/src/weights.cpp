#include "cascade/weights.hpp"

#include <cmath>
#include <stdexcept>

namespace cascade {

namespace {
constexpr double k_boundary_tol = 1e-12;
}

Phase classify_phase(double gamma, double beta) {
  if (gamma < 0.0 || beta < 0.0)
    throw std::invalid_argument("classify_phase: parameters must be nonnegative");
  if (!(std::isfinite(gamma) && std::isfinite(beta)))
    throw std::invalid_argument("classify_phase: parameters must be finite");
  // the critical segment wins ties against the open regions around it
  if (gamma > 0.5 && gamma < 1.0 && std::abs(gamma + beta - 1.0) <= k_boundary_tol)
    return Phase::boundary;
  if (gamma <= 0.5 && gamma * gamma + beta * beta < 0.5) return Phase::phase_one;
  if (gamma > 0.5 && gamma < 1.0 && gamma + beta < 1.0) return Phase::phase_one;
  return Phase::outside;
}

ModelParams model_params(double gamma, double beta) {
  ModelParams p;
  p.gamma = gamma;
  p.beta = beta;
  p.phase = classify_phase(gamma, beta);
  return p;
}

double mean_factor(const ModelParams& par) {
  const double g = par.gamma;
  const double b = par.beta;
  return std::exp2(1.0 + g * g - 2.0 * g - b * b);
}

CriticalityReport criticality_check(std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("criticality_check: trials must be positive");
  if (trials < 2) throw std::invalid_argument("criticality_check: need at least 2 trials");
  RunningStat mass, deriv;
  for (std::uint64_t t = 0; t < trials; ++t) {
    // the same draws the cascade's first generation would see
    NodeRng rng(seed, t);
    const double v0 = rng.v_increment(1, 0);
    const double v1 = rng.v_increment(1, 1);
    const double e0 = std::exp(-v0);
    const double e1 = std::exp(-v1);
    mass.add(e0 + e1);
    deriv.add(v0 * e0 + v1 * e1);
  }
  CriticalityReport rep;
  rep.mass = make_estimate(mass, seed);
  rep.derivative = make_estimate(deriv, seed);
  return rep;
}

}  // namespace cascade
