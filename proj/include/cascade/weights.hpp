// Model parameters and single-node weight law.
//
// Each node of the binary tree carries an independent complex Gaussian
// increment Theta = v + i x with v ~ N(2 ln 2, 2 ln 2) and x ~ N(0, 1).
// A leaf z at depth n weighs exp(-gamma V(z) + i beta sqrt(2 ln 2) X(z)),
// where V and X are the partial sums of the increments along the ray to z.
// The normalization is critical: E[sum of exp(-V) over the two children] = 1
// and E[sum of V exp(-V)] = 0.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "cascade/rng.hpp"
#include "cascade/stats.hpp"

namespace cascade {

// exp(-gamma v) * (cos(bcoef x) + i sin(bcoef x)) with bcoef = beta sqrt(2 ln 2);
// shared by every traversal so different passes agree bit for bit
inline std::complex<double> leaf_weight(double gamma, double bcoef, double v, double x) {
  const double r = std::exp(-gamma * v);
  const double arg = bcoef * x;
  return {r * std::cos(arg), r * std::sin(arg)};
}

enum class Phase {
  phase_one,      // interior: uniform convergence to a continuous limit
  boundary,       // critical line gamma + beta = 1, 1/2 < gamma < 1
  outside,        // everything else, including the junction (1/2, 1/2)
};

struct ModelParams {
  double gamma = 0.0;
  double beta = 0.0;
  Phase phase = Phase::outside;
};

// Region test on the closed positive quadrant.  The interior region is
//   (gamma <= 1/2 and gamma^2 + beta^2 < 1/2) or
//   (1/2 < gamma < 1 and gamma + beta < 1),
// and the critical segment is 1/2 < gamma < 1 with gamma + beta = 1, matched
// to within 1e-12.  Negative parameters are rejected.
Phase classify_phase(double gamma, double beta);

ModelParams model_params(double gamma, double beta);

// Expected total leaf mass per generation: E[M_1] = 2^(1 + g^2 - 2g - b^2).
// Equals 1 exactly on the critical segment.
double mean_factor(const ModelParams& par);

struct ThetaSample {
  double v_inc;  // real part, N(2 ln 2, 2 ln 2)
  double x_inc;  // imaginary part, N(0, 1)
};

// Sequential sampler over a dedicated stream, for draws that are not tied to
// a tree position.
class ThetaSampler {
 public:
  ThetaSampler(std::uint64_t master_seed, std::uint64_t trial)
      : stream_(mix64(derive_stream(master_seed, trial) ^ k_domain_theta)),
        counter_(0) {}

  ThetaSample next() {
    ++counter_;
    const std::uint64_t h = mix64(stream_ ^ (counter_ * k_golden));
    ThetaSample s;
    s.v_inc = k_two_ln2 +
              k_sqrt_two_ln2 * inv_normal_cdf(u64_to_unit(mix64(h ^ k_lane_v)));
    s.x_inc = inv_normal_cdf(u64_to_unit(mix64(h ^ k_lane_x)));
    return s;
  }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t stream_;
  std::uint64_t counter_;
};

struct CriticalityReport {
  EstimateReport mass;        // E[e^{-V(0)} + e^{-V(1)}], should be 1
  EstimateReport derivative;  // E[V(0)e^{-V(0)} + V(1)e^{-V(1)}], should be 0
};

// Monte Carlo check of the critical normalization on first-generation pairs.
// trials = 0 is rejected.
CriticalityReport criticality_check(std::uint64_t trials, std::uint64_t seed);

}  // namespace cascade
