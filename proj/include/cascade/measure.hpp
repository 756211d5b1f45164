// The complex measure built from leaf weights: partial-sum path, internal
// consistency checks, the ray-indexed sup functional, block oscillations and
// total variation at every dyadic refinement level.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "cascade/cascade.hpp"
#include "cascade/weights.hpp"

namespace cascade {

// M[0, k 2^-n] for k = 0..2^n: the measure of [0, t] has density 2^n dx on
// leaf cells, so the cell length cancels and the partial sums are plain
// prefix sums of leaf weights (divided by `normalization`).
struct PartialSumProcess {
  int depth = 0;
  double gamma = 0.0;
  double beta = 0.0;
  double normalization = 1.0;
  std::vector<std::complex<double>> sums;  // 2^depth + 1 entries, sums[0] = 0

  std::complex<double> total() const { return sums.back(); }
};

PartialSumProcess partial_sums(const LevelState& leaves, const ModelParams& par,
                               double normalization = 1.0);

// consumes the stream; rejects a stream that is not at its first leaf
PartialSumProcess partial_sums(LeafStream& leaves, const ModelParams& par,
                               double normalization = 1.0);

// Splitting the measure at 1/2: each half of the partial-sum path must equal
// the first-generation weight times that child's relative subtree mass.
// Returns the worst unit-scaled relative error over the two halves.
double verify_cascade_recursion(const PartialSumProcess& proc,
                                std::span<const std::complex<double>> level1_masses,
                                const LevelState& first_gen);

// Left-edge decomposition: for a depth-n leaf index u, M[0, t_u] equals the
// sum over right steps of the ray of (left sibling weight) x (left sibling
// relative mass).  The right-hand side is recomputed from scratch, so the two
// routes share no partial sums.  Returns the worst unit-scaled relative error.
double verify_left_decomposition(const PartialSumProcess& proc, const LevelState& leaves,
                                 const ModelParams& par,
                                 std::span<const std::uint64_t> u_indices);

// Sup over depth-n rays of the left-edge majorant of a depth-(n+p) field:
//   max_z [ sum_k e^{-gamma V(z|k left)} |M(z|k left)| 1{ray steps right at k}
//           + e^{-gamma V(z)} |M(z)| ].
// Dominates |M[0, t]| at every grid point t = k 2^-n.  One depth-first pass,
// O(depth) memory; n = 0 degenerates to |M_p[0,1]|.
double sup_functional(std::uint64_t stream, int n, int p, const ModelParams& par);
double sup_functional(std::uint64_t master_seed, std::uint64_t trial, int n, int p,
                      const ModelParams& par);

namespace geom {

// strictly convex hull (collinear points dropped), counterclockwise
std::vector<std::complex<double>> convex_hull(std::vector<std::complex<double>> pts);

// squared diameter of a strictly convex ccw polygon by rotating calipers
double hull_diameter_sq(const std::vector<std::complex<double>>& hull);

}  // namespace geom

enum class DiameterMode {
  exact,  // convex hull + rotating calipers
  bbox,   // bounding-box diagonal: upper bound within sqrt(2)
};

// Oscillation of the path over the 2^l closed dyadic blocks of one level.
// lo is the largest block diameter; every sub-block oscillation of the path
// at scales finer than 2^-l lies in [lo, hi] with hi = 3 lo.
struct OscillationProfile {
  int level = 0;
  DiameterMode mode = DiameterMode::exact;
  std::vector<double> diameters;  // one per block
  double lo = 0.0;
  double hi = 0.0;
};

OscillationProfile block_oscillations(const PartialSumProcess& proc, int l,
                                      DiameterMode mode = DiameterMode::exact);

// All levels l_min..l_max in one pass, merging block hulls bottom-up.
std::vector<OscillationProfile> oscillation_profile(const PartialSumProcess& proc,
                                                    int l_min, int l_max,
                                                    DiameterMode mode = DiameterMode::exact);

// Largest block diameter per level, without materializing per-block vectors.
std::vector<double> oscillation_sups(const PartialSumProcess& proc, int l_min, int l_max,
                                     DiameterMode mode = DiameterMode::exact);

// Total variation along the level-l dyadic grid; nondecreasing in l.
double total_variation(const PartialSumProcess& proc, int l);

}  // namespace cascade
