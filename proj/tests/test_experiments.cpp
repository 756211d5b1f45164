#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "cascade/experiments.hpp"

using namespace cascade;

TEST_CASE("martingale mean normalizes the expected mass to one") {
  const ModelParams par = model_params(0.7, 0.3);
  const MartingaleResult res = martingale_mean(par, {0, 6, 9}, 4000, 21);
  REQUIRE(res.rows.size() == 3);

  // depth 0 is the deterministic unit mass
  CHECK(res.rows[0].key == 0.0);
  CHECK(res.rows[0].report.estimate == std::complex<double>(1.0, 0.0));
  CHECK(res.rows[0].report.trials == 1);
  CHECK(res.rows[0].report.std_error == std::complex<double>(0.0, 0.0));

  for (std::size_t i = 1; i < 3; ++i) {
    const EstimateReport& rep = res.rows[i].report;
    CHECK(rep.complex_valued);
    CHECK(rep.trials == 4000);
    CHECK(std::abs(rep.estimate.real() - 1.0) < 4.0 * rep.std_error.real());
    CHECK(std::abs(rep.estimate.imag()) < 4.0 * rep.std_error.imag());
  }
}

TEST_CASE("martingale mean is identical across traversal modes") {
  const ModelParams par = model_params(0.7, 0.3);
  const MartingaleResult dfs = martingale_mean(par, {9}, 500, 5, 0, false);
  const MartingaleResult bfs = martingale_mean(par, {9}, 500, 5, 0, true);
  CHECK(dfs.rows[0].report.estimate == bfs.rows[0].report.estimate);
  CHECK(dfs.rows[0].report.std_error == bfs.rows[0].report.std_error);
}

TEST_CASE("martingale mean at flat parameters is exact") {
  // gamma = beta = 0: the mass is exactly 2^n, so every normalized trial is 1
  const ModelParams par = model_params(0.0, 0.0);
  const MartingaleResult res = martingale_mean(par, {7}, 100, 3);
  CHECK(res.rows[0].report.estimate == std::complex<double>(1.0, 0.0));
  CHECK(res.rows[0].report.std_error == std::complex<double>(0.0, 0.0));
}

TEST_CASE("martingale mean validates inputs") {
  const ModelParams par = model_params(0.7, 0.3);
  CHECK_THROWS_AS((void)martingale_mean(par, {3}, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)martingale_mean(par, {-1}, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)martingale_mean(par, {41}, 100, 0), std::invalid_argument);
}

TEST_CASE("sup tail probabilities decrease pathwise along the offset grid") {
  const ModelParams par = model_params(0.7, 0.3);
  const TailSupResult res = tail_sup(par, 7, {0.5, 1.0, 2.0, 3.0}, 2000, 7);
  REQUIRE(res.rows.size() == 4);
  CHECK(res.n == 7);
  double prev = 1.0;
  for (const auto& row : res.rows) {
    const double p = row.report.estimate.real();
    CHECK(p >= 0.0);
    CHECK(p <= prev);  // same sup per trial serves every threshold
    CHECK(row.report.bound_ratio.has_value());
    prev = p;
  }
  // ratio recomputation
  const auto& r1 = res.rows[1];
  CHECK(*r1.report.bound_ratio ==
        doctest::Approx(r1.report.estimate.real() * std::exp(1.0) / 2.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)tail_sup(par, 21, {1.0}, 100, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)tail_sup(par, 5, {}, 100, 0), std::invalid_argument);
}

TEST_CASE("unreached thresholds are flagged") {
  const ModelParams par = model_params(0.7, 0.3);
  // a threshold far beyond anything a depth-4 field can reach
  const TailSupResult res = tail_sup(par, 4, {40.0}, 200, 7);
  CHECK(res.rows[0].report.estimate.real() == 0.0);
  REQUIRE(res.rows[0].report.truncation.has_value());
}

TEST_CASE("conditioned fourth moment grows pathwise with the cutoff") {
  const ModelParams par = model_params(0.7, 0.3);
  // the same trees serve both cutoffs, so the indicator only gains events
  const FourthMomentResult lo = fourth_moment(par, {6}, 1.0, 1500, 9);
  const FourthMomentResult hi = fourth_moment(par, {6}, 3.0, 1500, 9);
  CHECK(lo.x == 1.0);
  CHECK(lo.rows[0].report.estimate.real() <= hi.rows[0].report.estimate.real());
  CHECK(lo.rows[0].report.estimate.real() >= 0.0);
  CHECK(lo.rows[0].report.bound_ratio.has_value());
  // scaled ratio = estimate * e^{x(1 - 4 gamma)}
  CHECK(*lo.rows[0].report.bound_ratio ==
        doctest::Approx(lo.rows[0].report.estimate.real() * std::exp(1.0 - 2.8))
            .epsilon(1e-12));
  CHECK_THROWS_AS((void)fourth_moment(par, {21}, 1.0, 100, 0), std::invalid_argument);
}

TEST_CASE("barrier crossings become rarer as the barrier drops") {
  // same trees: raising epsilon0 lowers the barrier line pathwise
  const BarrierResult steep = barrier_probability({1.0, 2.0}, 10, 0.05, 2000, 11);
  const BarrierResult shallow = barrier_probability({1.0, 2.0}, 10, 0.30, 2000, 11);
  REQUIRE(steep.rows.size() == 2);
  CHECK(steep.epsilon0 == 0.05);
  for (std::size_t i = 0; i < 2; ++i) {
    const double p_steep = steep.rows[i].report.estimate.real();
    const double p_shallow = shallow.rows[i].report.estimate.real();
    CHECK(p_shallow <= p_steep);
    CHECK(p_steep <= 1.0);
    CHECK(p_shallow >= 0.0);
    REQUIRE(steep.rows[i].report.truncation.has_value());
    CHECK(steep.rows[i].report.truncation->find("truncated") != std::string::npos);
  }
  // larger offsets are harder to cross, pathwise on the same trees
  CHECK(steep.rows[1].report.estimate.real() <= steep.rows[0].report.estimate.real());

  CHECK_THROWS_AS((void)barrier_probability({1.0}, 0, 0.05, 100, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)barrier_probability({1.0}, 25, 0.05, 100, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)barrier_probability({1.0}, 10, 0.6, 100, 0),
                  std::invalid_argument);
}

TEST_CASE("flat parameters give the exact geometric oscillation decay") {
  const ModelParams par = model_params(0.0, 0.0);
  const ModulusResult res = modulus_experiment(par, 10, 2, 8, 50, 13);
  REQUIRE(res.rows.size() == 7);
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const int l = 2 + static_cast<int>(i);
    CHECK(res.rows[i].key == static_cast<double>(l));
    // every trial yields the identical dyadic sup, so mean and spread are exact
    CHECK(res.rows[i].report.estimate.real() == std::exp2(-l));
    CHECK(res.rows[i].report.std_error.real() == 0.0);
  }
  // ln E[osc_l] = -l ln 2: the geometric fit is exact with slope -1 per level
  CHECK(res.fit_lin.slope == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(res.fit_lin.r_squared == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.depth == 10);
}

TEST_CASE("boundary oscillations decay strictly slower than interior ones") {
  const ModulusResult boundary =
      modulus_experiment(model_params(0.7, 0.3), 12, 3, 9, 150, 17);
  const ModulusResult interior =
      modulus_experiment(model_params(0.3, 0.3), 12, 3, 9, 150, 17);
  CHECK(boundary.fit_log.slope < 0.0);
  CHECK(interior.fit_lin.slope < boundary.fit_lin.slope);
  CHECK(boundary.fit_log.r_squared > 0.5);
  CHECK_THROWS_AS(
      (void)modulus_experiment(model_params(0.7, 0.3), 10, 0, 5, 100, 0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      (void)modulus_experiment(model_params(0.7, 0.3), 10, 5, 11, 100, 0),
      std::invalid_argument);
}

TEST_CASE("bbox oscillation mode brackets the exact experiment") {
  const ModelParams par = model_params(0.7, 0.3);
  const ModulusResult exact =
      modulus_experiment(par, 10, 3, 7, 100, 19, 0, DiameterMode::exact);
  const ModulusResult box =
      modulus_experiment(par, 10, 3, 7, 100, 19, 0, DiameterMode::bbox);
  for (std::size_t i = 0; i < exact.rows.size(); ++i) {
    const double e = exact.rows[i].report.estimate.real();
    const double b = box.rows[i].report.estimate.real();
    CHECK(b >= e * (1.0 - 1e-13));
    CHECK(b <= e * std::sqrt(2.0) * (1.0 + 1e-13));
  }
}

TEST_CASE("total variation matches its closed form on the critical segment") {
  const ModelParams par = model_params(0.7, 0.3);
  const VariationResult res = variation_experiment(par, {5, 8}, 4000, 23);
  REQUIRE(res.rows.size() == 2);
  CHECK(res.worst_refinement_gap == 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    const int n = i == 0 ? 5 : 8;
    const EstimateReport& rep = res.rows[i].report;
    const double target = std::exp2(0.09 * n);
    CHECK(std::abs(rep.estimate.real() - target) < 4.0 * rep.std_error.real());
    REQUIRE(rep.bound_ratio.has_value());
    CHECK(*rep.bound_ratio ==
          doctest::Approx(rep.estimate.real() / target).epsilon(1e-12));
  }
}

TEST_CASE("every exactness identity passes on and off the critical segment") {
  const std::pair<double, double> points[] = {{0.7, 0.3}, {0.3, 0.3}, {0.0, 0.0}};
  for (const auto& [g, b] : points) {
    const auto outcomes = identity_suite(model_params(g, b), 7, 2, 29);
    REQUIRE(outcomes.size() == 7);
    for (const auto& o : outcomes) {
      INFO("gamma=" << g << " beta=" << b << " check=" << o.label);
      CHECK(o.pass);
      CHECK(o.err <= o.tol);
      CHECK(o.err >= 0.0);
    }
  }
  CHECK_THROWS_AS((void)identity_suite(model_params(0.7, 0.3), 0, 2, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)identity_suite(model_params(0.7, 0.3), 23, 2, 0),
                  std::invalid_argument);
}

TEST_CASE("experiment campaigns replay bit for bit") {
  const ModelParams par = model_params(0.7, 0.3);
  const TailSupResult a = tail_sup(par, 6, {1.0, 2.0}, 800, 31);
  const TailSupResult b = tail_sup(par, 6, {1.0, 2.0}, 800, 31);
  CHECK(a.rows[0].report.estimate == b.rows[0].report.estimate);
  CHECK(a.rows[1].report.std_error == b.rows[1].report.std_error);
  const BarrierResult c = barrier_probability({2.0}, 8, 0.05, 500, 31);
  const BarrierResult d = barrier_probability({2.0}, 8, 0.05, 500, 31);
  CHECK(c.rows[0].report.estimate == d.rows[0].report.estimate);
}
