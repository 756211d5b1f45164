// Monte Carlo campaigns over the tree simulator.  Each function runs its own
// trial loop through the deterministic chunked reducer, derives per-row
// streams from the master seed, and returns estimates with enough context to
// rerun bit for bit.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cascade/cascade.hpp"
#include "cascade/measure.hpp"
#include "cascade/stats.hpp"
#include "cascade/weights.hpp"

namespace cascade {

struct GridRow {
  double key = 0.0;  // grid coordinate: a depth n, a level l, or an offset x
  EstimateReport report;
};

// E[M_n] / mean_factor^n, one row per depth; exactly 1 + 0i in expectation.
// depth 0 is deterministic and reported with a single trial.
struct MartingaleResult {
  std::vector<GridRow> rows;
};
MartingaleResult martingale_mean(const ModelParams& par, const std::vector<int>& depths,
                                 std::uint64_t trials, std::uint64_t seed,
                                 int threads = 0, bool breadth_mode = false);

// P(||M_{n,0}|| >= e^{gamma x}) over an x grid, one sup per trial shared by
// every threshold.  bound_ratio = estimate * e^x / (1 + x).
struct TailSupResult {
  int n = 0;
  std::vector<GridRow> rows;
};
TailSupResult tail_sup(const ModelParams& par, int n, const std::vector<double>& x_grid,
                       std::uint64_t trials, std::uint64_t seed, int threads = 0);

// E[|M_n|^4 1{min V >= -x}] over a depth grid at fixed offset x.
// bound_ratio = estimate * e^{x(1 - 4 gamma)}, which should be stable in n.
struct FourthMomentResult {
  double x = 0.0;
  std::vector<GridRow> rows;
};
FourthMomentResult fourth_moment(const ModelParams& par, const std::vector<int>& depths,
                                 double x, std::uint64_t trials, std::uint64_t seed,
                                 int threads = 0);

// P(some node of the first `depth` generations falls below
// -x + (1/2 - epsilon0) ln|u|) over an x grid.  Model-independent.  The event
// over the infinite tree is truncated at `depth`; every row carries a note.
// bound_ratio = estimate * e^x / (1 + x).
struct BarrierResult {
  int depth = 0;
  double epsilon0 = k_default_epsilon0;
  std::vector<GridRow> rows;
};
BarrierResult barrier_probability(const std::vector<double>& x_grid, int depth,
                                  double epsilon0, std::uint64_t trials,
                                  std::uint64_t seed, int threads = 0);

// Mean largest block oscillation of the mean-normalized partial-sum path per
// refinement level, with decay fits of ln E[osc_l] against ln l (boundary
// scaling: polynomial in l) and against l ln 2 (interior scaling: geometric).
struct ModulusResult {
  int depth = 0;
  std::vector<GridRow> rows;
  DecayFit fit_log;
  DecayFit fit_lin;
};
ModulusResult modulus_experiment(const ModelParams& par, int depth, int l_min, int l_max,
                                 std::uint64_t trials, std::uint64_t seed,
                                 int threads = 0,
                                 DiameterMode mode = DiameterMode::exact);

// E[TV over the leaf grid] per depth; bound_ratio divides by the closed form
// 2^{n(1 - 2 gamma + gamma^2)}.  worst_refinement_gap is the most negative
// unit-scaled violation of TV(l) <= TV(l+1) seen in any trial.
struct VariationResult {
  std::vector<GridRow> rows;
  double worst_refinement_gap = 0.0;
};
VariationResult variation_experiment(const ModelParams& par,
                                     const std::vector<int>& depths,
                                     std::uint64_t trials, std::uint64_t seed,
                                     int threads = 0);

// Deterministic exactness suite: recursion at the split, left-edge
// decomposition, grid domination by the sup functional at p = 0 and p = 4,
// total-variation refinement monotonicity, subtree recombination, and the
// flat-parameter case where everything is exact.
struct IdentityOutcome {
  std::string label;
  double err = 0.0;
  double tol = 0.0;
  bool pass = false;
};
std::vector<IdentityOutcome> identity_suite(const ModelParams& par, int depth,
                                            std::uint64_t trials, std::uint64_t seed);

}  // namespace cascade
