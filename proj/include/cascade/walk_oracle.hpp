// Single-particle companion walk and the reference estimates built on it.
//
// Tilting the branching law by e^{-V} turns tree sums into expectations of a
// centered random walk with step variance 2 ln 2:
//   E[ sum over |z| = n of F(x + V(z)) e^{-V(z)} ] = E[ F(x + S_n) ].
// The ballot and exponential-sum estimates quantify how often that walk stays
// nonnegative, which is what controls the tail of the sup functional.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cascade/stats.hpp"

namespace cascade {

struct WalkPath {
  double start = 0.0;
  std::vector<double> values;  // S_1..S_n
  double running_min = 0.0;    // min over j >= 1; +infinity when n = 0
};

WalkPath sample_walk(std::uint64_t master_seed, std::uint64_t trial, int n, double x);

// Test functions for the tree-vs-walk comparison.
struct TestFunction {
  enum class Kind { indicator_above, identity, exp_decay, polynomial };

  Kind kind = Kind::identity;
  double threshold = 0.0;        // indicator_above: 1{s > threshold}
  double rate = 1.0;             // exp_decay: e^{-rate s}
  std::vector<double> coeffs;    // polynomial: c0 + c1 s + c2 s^2 + ...

  double operator()(double s) const;
  std::string name() const;

  static TestFunction one() { return poly({1.0}); }
  static TestFunction ident() { return TestFunction{Kind::identity, 0.0, 1.0, {}}; }
  static TestFunction indicator(double thr) {
    return TestFunction{Kind::indicator_above, thr, 1.0, {}};
  }
  static TestFunction exponential(double rate) {
    return TestFunction{Kind::exp_decay, 0.0, rate, {}};
  }
  static TestFunction poly(std::vector<double> c) {
    return TestFunction{Kind::polynomial, 0.0, 1.0, std::move(c)};
  }
};

struct ComparePair {
  EstimateReport tree;  // E[ sum_z F(x + V(z)) e^{-V(z)} ], branching side
  EstimateReport walk;  // E[ F(x + S_n) ], single-particle side
};

// Independent Monte Carlo estimates of the two sides; they must agree within
// combined statistical error.
ComparePair many_to_one_compare(const TestFunction& f, int n, double x,
                                std::uint64_t trials, std::uint64_t seed,
                                int threads = 0);

// P_x( min_{1<=j<=n} S_j >= 0 and S_n in [a, b] ).  bound_ratio scales the
// estimate by n^{3/2} / ((1+x)(1+b^+)(1+(b-a))), which stays bounded in n.
EstimateReport ballot_probability(int n, double x, double a, double b,
                                  std::uint64_t trials, std::uint64_t seed,
                                  int threads = 0);

// E_x[ sum_{l=0..H} e^{-kappa S_l} 1{min_{j<=l} S_j >= 0} ] with S_0 = x.
// The l = 0 term is e^{-kappa x} (an empty min is vacuous).  The horizon is
// doubled until two consecutive estimates agree within 2 standard errors;
// the report carries a truncation note with the final horizon.
EstimateReport exp_sum(double kappa, double x, std::uint64_t horizon,
                       std::uint64_t trials, std::uint64_t seed, int threads = 0);

}  // namespace cascade
