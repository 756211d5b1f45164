// Tree simulation: breadth-first level arrays, a constant-memory leaf stream,
// and single-pass reductions.  All of them draw node increments through the
// counter-based NodeRng, so every traversal of one trial sees the same field.

#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascade/rng.hpp"
#include "cascade/weights.hpp"

namespace cascade {

// thrown when a breadth-first request exceeds the configured depth budget
class capacity_error : public std::runtime_error {
 public:
  explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

// level arrays above this depth would need multi-GB allocations
inline constexpr int k_breadth_depth_cap = 26;
inline constexpr double k_default_epsilon0 = 0.05;

struct SimConfig {
  double epsilon0 = k_default_epsilon0;  // barrier slope is 1/2 - epsilon0
  int breadth_depth_cap = k_breadth_depth_cap;
};

// One generation of the field plus running extremes of all generations so far.
//
// barrier_margin is min over nodes u with 1 <= |u| <= depth of
// V(u) - r ln|u| with r = 1/2 - epsilon0; it starts at +infinity (the root
// carries no increment) and is monotone under extend, so one simulation
// serves a whole grid of barrier offsets.
struct LevelState {
  int depth = 0;
  std::uint64_t stream = 0;  // node draw stream; enough to re-simulate any level
  double epsilon0 = k_default_epsilon0;
  double barrier_r = 0.5 - k_default_epsilon0;
  std::vector<double> v;  // real parts, 2^depth entries in dyadic order
  std::vector<double> x;  // imaginary parts
  double min_v = 0.0;     // min of V over generations 0..depth
  double barrier_margin = std::numeric_limits<double>::infinity();

  bool barrier_crossed(double offset) const { return barrier_margin <= -offset; }
};

LevelState root_level(std::uint64_t master_seed, std::uint64_t trial,
                      double epsilon0 = k_default_epsilon0);
LevelState root_level_for_stream(std::uint64_t stream,
                                 double epsilon0 = k_default_epsilon0);

// next generation; throws capacity_error past the depth cap
LevelState extend(const LevelState& parent, int depth_cap = k_breadth_depth_cap);

LevelState simulate_breadth(std::uint64_t master_seed, std::uint64_t trial, int depth,
                            const SimConfig& cfg = {});
LevelState simulate_breadth_for_stream(std::uint64_t stream, int depth,
                                       const SimConfig& cfg = {});

// Leaf-by-leaf traversal in dyadic order with O(depth) memory.  Yields the
// same leaf values bit for bit as the breadth-first arrays, and the same
// min_v / barrier_margin once exhausted.
class LeafStream {
 public:
  struct Leaf {
    std::uint64_t index;
    double v;
    double x;
  };

  LeafStream(std::uint64_t master_seed, std::uint64_t trial, int depth,
             double epsilon0 = k_default_epsilon0);
  static LeafStream for_stream(std::uint64_t stream, int depth,
                               double epsilon0 = k_default_epsilon0);

  // false once all 2^depth leaves have been yielded
  bool next(Leaf& out);

  int depth() const { return depth_; }
  std::uint64_t stream() const { return rng_.stream(); }
  std::uint64_t position() const { return count_; }
  bool done() const { return count_ == leaf_count_; }

  // running extremes over every node examined so far; final values equal the
  // breadth-first ones once done()
  double min_v() const { return min_v_; }
  double barrier_margin() const { return margin_; }

 private:
  LeafStream(std::uint64_t stream, int depth, double epsilon0, int);
  void rebuild_from(int level);

  NodeRng rng_;
  int depth_;
  double barrier_r_;
  std::uint64_t leaf_count_;
  std::uint64_t next_index_ = 0;
  std::uint64_t count_ = 0;
  std::vector<double> v_path_;    // partial sums along the current ray
  std::vector<double> x_path_;
  std::vector<double> log_depth_;
  double min_v_ = 0.0;
  double margin_ = std::numeric_limits<double>::infinity();
};

// Everything the scalar experiments need from one tree, in a single
// depth-first pass with O(depth) memory.  mass is the sum of leaf weights
// exp(-gamma V + i beta sqrt(2 ln 2) X) accumulated in leaf order with
// compensated summation; with_mass = false skips the imaginary lane and the
// per-leaf transcendentals entirely.
struct TreeSummary {
  int depth = 0;
  std::complex<double> mass{0.0, 0.0};
  double min_v = 0.0;
  double barrier_margin = std::numeric_limits<double>::infinity();
};

TreeSummary reduce_tree(std::uint64_t stream, int depth, const ModelParams& par,
                        double epsilon0 = k_default_epsilon0, bool with_mass = true);

// Relative subtree masses of the 2^l depth-l nodes of a depth-(n+p) field:
// entry u is the sum over leaves z below u of
// exp(-gamma (V(z)-V(u)) + i beta sqrt(2 ln 2) (X(z)-X(u))).
// l = leaves.depth gives all ones exactly; l = 0 gives the total mass.
std::vector<std::complex<double>> subtree_masses(const LevelState& leaves, int l,
                                                 const ModelParams& par);

// Binary snapshot of one level for reproducibility debugging: fixed header
// followed by the v then x arrays as little-endian doubles.
void dump_level(const LevelState& level, const ModelParams& par, std::ostream& os);

struct DumpedLevel {
  LevelState level;
  double gamma = 0.0;
  double beta = 0.0;
};

DumpedLevel load_level(std::istream& is);

}  // namespace cascade
