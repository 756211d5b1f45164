#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "cascade/measure.hpp"
#include "cascade/stats.hpp"

using namespace cascade;

namespace {

double brute_diameter_sq(const std::vector<std::complex<double>>& pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, std::norm(pts[i] - pts[j]));
  return best;
}

PartialSumProcess flat_process(int n) {
  // gamma = beta = 0: every leaf weighs 1, so sums[k] = k 2^-n exactly
  const LevelState leaves = simulate_breadth(1234, 0, n);
  return partial_sums(leaves, model_params(0.0, 0.0), std::exp2(n));
}

}  // namespace

TEST_CASE("partial sums are prefix sums of leaf weights") {
  const ModelParams par = model_params(0.7, 0.3);
  const int n = 3;
  const LevelState leaves = simulate_breadth(17, 6, n);
  const PartialSumProcess proc = partial_sums(leaves, par);
  REQUIRE(proc.sums.size() == (1ULL << n) + 1);
  CHECK(proc.sums[0] == std::complex<double>(0.0, 0.0));
  CHECK(proc.depth == n);
  CHECK(proc.normalization == 1.0);
  const double bc = par.beta * k_sqrt_two_ln2;
  ComplexSum acc;
  for (std::uint64_t k = 0; k < (1ULL << n); ++k) {
    acc.add(leaf_weight(par.gamma, bc, leaves.v[k], leaves.x[k]));
    CHECK(proc.sums[k + 1] == acc.value());
  }
  CHECK(proc.total() == proc.sums.back());

  // normalization divides every entry
  const PartialSumProcess scaled = partial_sums(leaves, par, 2.0);
  for (std::size_t k = 0; k < proc.sums.size(); ++k)
    CHECK(scaled.sums[k] == proc.sums[k] / 2.0);
}

TEST_CASE("streaming and breadth-first partial sums agree bit for bit") {
  const ModelParams par = model_params(0.7, 0.3);
  const int n = 12;
  const LevelState leaves = simulate_breadth(29, 3, n);
  LeafStream stream(29, 3, n);
  const PartialSumProcess a = partial_sums(leaves, par);
  const PartialSumProcess b = partial_sums(stream, par);
  CHECK(a.sums == b.sums);

  // a consumed stream is rejected
  LeafStream used(29, 3, 4);
  LeafStream::Leaf leaf;
  used.next(leaf);
  CHECK_THROWS_AS((void)partial_sums(used, par), std::invalid_argument);
}

TEST_CASE("split and left-edge identities hold on simulated fields") {
  const ModelParams par = model_params(0.7, 0.3);
  for (int n = 1; n <= 9; n += 2) {
    const LevelState leaves = simulate_breadth(41, static_cast<std::uint64_t>(n), n);
    const PartialSumProcess proc = partial_sums(leaves, par);
    const auto masses = subtree_masses(leaves, std::min(1, leaves.depth), par);
    const LevelState first = simulate_breadth_for_stream(leaves.stream, 1);
    if (n >= 1) {
      CHECK(verify_cascade_recursion(proc, masses, first) < 1e-12);
    }
    std::vector<std::uint64_t> us = {0, (1ULL << n) - 1, (1ULL << n) / 3};
    CHECK(verify_left_decomposition(proc, leaves, par, us) < 1e-12);
  }
}

TEST_CASE("sup functional dominates every grid value") {
  const ModelParams par = model_params(0.7, 0.3);
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const std::uint64_t stream = derive_stream(59, trial);
    for (int p = 0; p <= 3; ++p) {
      const int n = 6;
      const LevelState leaves = simulate_breadth_for_stream(stream, n + p);
      const PartialSumProcess proc = partial_sums(leaves, par);
      const double sup = sup_functional(stream, n, p, par);
      for (std::uint64_t k = 0; k <= (1ULL << n); ++k)
        CHECK(std::abs(proc.sums[k << p]) <= sup * (1.0 + 1e-13));
    }
  }
}

TEST_CASE("sup functional with no subdivision bounds the total mass") {
  const ModelParams par = model_params(0.7, 0.3);
  const std::uint64_t stream = derive_stream(60, 0);
  const PartialSumProcess proc =
      partial_sums(simulate_breadth_for_stream(stream, 5), par);
  const double sup = sup_functional(stream, 0, 5, par);
  CHECK(std::abs(proc.total()) <= sup * (1.0 + 1e-13));
}

TEST_CASE("convex hull handles canonical configurations") {
  using C = std::complex<double>;
  // square with interior and duplicate points
  auto hull = geom::convex_hull({C(0, 0), C(1, 0), C(1, 1), C(0, 1), C(0.5, 0.5),
                                 C(0.25, 0.75), C(1, 1), C(0, 0)});
  CHECK(hull.size() == 4);
  CHECK(geom::hull_diameter_sq(hull) == doctest::Approx(2.0).epsilon(1e-15));

  // collinear points collapse to the two endpoints
  hull = geom::convex_hull({C(0, 0), C(1, 1), C(2, 2), C(3, 3)});
  CHECK(hull.size() == 2);
  CHECK(geom::hull_diameter_sq(hull) == doctest::Approx(18.0).epsilon(1e-15));

  // degenerate cases
  CHECK(geom::hull_diameter_sq(geom::convex_hull({C(2, 3)})) == 0.0);
  CHECK(geom::hull_diameter_sq(geom::convex_hull({})) == 0.0);
  CHECK(geom::hull_diameter_sq(geom::convex_hull({C(1, 1), C(1, 1)})) == 0.0);
}

TEST_CASE("hull diameter matches brute force on random clouds") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> norm(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    const int m = 2 + static_cast<int>(gen() % 40);
    std::vector<std::complex<double>> pts(m);
    const bool lattice = rep % 3 == 0;  // exercise collinear/tie-heavy inputs
    for (auto& p : pts) {
      if (lattice)
        p = {std::floor(unif(gen) * 4) / 4.0, std::floor(unif(gen) * 4) / 4.0};
      else
        p = {norm(gen), norm(gen)};
    }
    const auto hull = geom::convex_hull(pts);
    const double got = geom::hull_diameter_sq(hull);
    const double want = brute_diameter_sq(pts);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("flat parameters make every oscillation quantity exact") {
  const int n = 10;
  const PartialSumProcess proc = flat_process(n);
  for (int l = 0; l <= n; ++l) {
    const OscillationProfile prof = block_oscillations(proc, l);
    CHECK(prof.level == l);
    REQUIRE(prof.diameters.size() == (1ULL << l));
    // the path is a straight segment: every block diameter is its width
    for (double d : prof.diameters)
      CHECK(d == doctest::Approx(std::exp2(-l)).epsilon(1e-12));
    CHECK(prof.lo == doctest::Approx(std::exp2(-l)).epsilon(1e-12));
    CHECK(prof.hi == doctest::Approx(3.0 * std::exp2(-l)).epsilon(1e-12));
    // bbox diagonal equals the exact diameter for a flat segment
    const OscillationProfile box = block_oscillations(proc, l, DiameterMode::bbox);
    CHECK(box.lo == doctest::Approx(prof.lo).epsilon(1e-12));
    // total variation of a monotone real path is its total increment
    CHECK(total_variation(proc, l) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("merged multi-level profiles equal the per-level computation") {
  const ModelParams par = model_params(0.7, 0.3);
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    const LevelState leaves = simulate_breadth(83, trial, 10);
    const PartialSumProcess proc = partial_sums(leaves, par);
    for (const DiameterMode mode : {DiameterMode::exact, DiameterMode::bbox}) {
      const auto profiles = oscillation_profile(proc, 2, 8, mode);
      REQUIRE(profiles.size() == 7);
      const auto sups = oscillation_sups(proc, 2, 8, mode);
      REQUIRE(sups.size() == 7);
      for (int l = 2; l <= 8; ++l) {
        const OscillationProfile direct = block_oscillations(proc, l, mode);
        const OscillationProfile& merged = profiles[static_cast<std::size_t>(l - 2)];
        CHECK(merged.level == l);
        REQUIRE(merged.diameters.size() == direct.diameters.size());
        for (std::size_t k = 0; k < direct.diameters.size(); ++k)
          CHECK(merged.diameters[k] == doctest::Approx(direct.diameters[k]).epsilon(1e-12));
        CHECK(merged.lo == doctest::Approx(direct.lo).epsilon(1e-12));
        CHECK(sups[static_cast<std::size_t>(l - 2)] ==
              doctest::Approx(direct.lo).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("oscillations shrink and variation grows under refinement") {
  const ModelParams par = model_params(0.7, 0.3);
  const LevelState leaves = simulate_breadth(97, 1, 10);
  const PartialSumProcess proc = partial_sums(leaves, par);
  double prev_osc = std::numeric_limits<double>::infinity();
  double prev_tv = 0.0;
  for (int l = 0; l <= 10; ++l) {
    const double osc = block_oscillations(proc, l).lo;
    const double tv = total_variation(proc, l);
    CHECK(osc <= prev_osc * (1.0 + 1e-13));
    CHECK(tv >= prev_tv * (1.0 - 1e-13));
    prev_osc = osc;
    prev_tv = tv;
  }
  // level 0 quantities are global: one block spanning the whole path
  CHECK(total_variation(proc, 0) == std::abs(proc.total()));
}

TEST_CASE("bbox diameters bracket the exact ones") {
  const ModelParams par = model_params(0.7, 0.3);
  const LevelState leaves = simulate_breadth(101, 4, 9);
  const PartialSumProcess proc = partial_sums(leaves, par);
  for (int l = 1; l <= 9; l += 2) {
    const double exact = block_oscillations(proc, l, DiameterMode::exact).lo;
    const double box = block_oscillations(proc, l, DiameterMode::bbox).lo;
    CHECK(box >= exact * (1.0 - 1e-13));
    CHECK(box <= exact * std::sqrt(2.0) * (1.0 + 1e-13));
  }
}

TEST_CASE("oscillation level bounds are validated") {
  const PartialSumProcess proc = flat_process(4);
  CHECK_THROWS_AS((void)block_oscillations(proc, -1), std::invalid_argument);
  CHECK_THROWS_AS((void)block_oscillations(proc, 5), std::invalid_argument);
  CHECK_THROWS_AS((void)oscillation_profile(proc, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS((void)total_variation(proc, 5), std::invalid_argument);
}
