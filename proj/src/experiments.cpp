#include "cascade/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cascade/measure.hpp"
#include "cascade/parallel.hpp"
#include "cascade/rng.hpp"

namespace cascade {

namespace {

constexpr std::uint64_t k_tag_mean = 0x6D65616EULL;
constexpr std::uint64_t k_tag_tail = 0x7461696CULL;
constexpr std::uint64_t k_tag_fourth = 0x666F7572ULL;
constexpr std::uint64_t k_tag_barrier = 0x62617272ULL;
constexpr std::uint64_t k_tag_modulus = 0x6D6F6475ULL;
constexpr std::uint64_t k_tag_variation = 0x76617269ULL;
constexpr std::uint64_t k_tag_identity = 0x6964656EULL;

// per-row master so different grid rows draw independent fields
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t k) {
  return mix64(mix64(seed ^ (tag * k_golden)) + k);
}

struct VecStat {
  std::vector<RunningStat> v;
  VecStat() = default;
  explicit VecStat(std::size_t m) : v(m) {}
  void merge(const VecStat& o) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i].merge(o.v[i]);
  }
};

}  // namespace

MartingaleResult martingale_mean(const ModelParams& par, const std::vector<int>& depths,
                                 std::uint64_t trials, std::uint64_t seed, int threads,
                                 bool breadth_mode) {
  MartingaleResult out;
  const double factor = mean_factor(par);
  for (const int n : depths) {
    if (n < 0) throw std::invalid_argument("martingale_mean: negative depth");
    GridRow row;
    row.key = static_cast<double>(n);
    if (n == 0) {
      // the depth-0 mass is the lone root weight: deterministically 1
      row.report = make_deterministic({1.0, 0.0}, true, seed);
      out.rows.push_back(std::move(row));
      continue;
    }
    if (trials < 2) throw std::invalid_argument("martingale_mean: need >= 2 trials");
    const double norm = std::pow(factor, n);
    const std::uint64_t master = sub_seed(seed, k_tag_mean, static_cast<std::uint64_t>(n));
    ComplexStat acc = parallel_reduce(
        trials, k_default_chunk, threads, ComplexStat{},
        [&](std::uint64_t t0, std::uint64_t t1, ComplexStat& a) {
          for (std::uint64_t t = t0; t < t1; ++t) {
            const std::uint64_t stream = derive_stream(master, t);
            std::complex<double> mass;
            if (breadth_mode)
              mass = partial_sums(simulate_breadth_for_stream(stream, n), par).total();
            else
              mass = reduce_tree(stream, n, par).mass;
            a.add(mass / norm);
          }
        });
    row.report = make_estimate(acc, seed);
    out.rows.push_back(std::move(row));
  }
  return out;
}

TailSupResult tail_sup(const ModelParams& par, int n, const std::vector<double>& x_grid,
                       std::uint64_t trials, std::uint64_t seed, int threads) {
  if (n < 0 || n > 20) throw std::invalid_argument("tail_sup: n out of range");
  if (x_grid.empty()) throw std::invalid_argument("tail_sup: empty grid");
  if (trials < 2) throw std::invalid_argument("tail_sup: need >= 2 trials");
  std::vector<double> thresholds(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i)
    thresholds[i] = std::exp(par.gamma * x_grid[i]);
  const std::uint64_t master = sub_seed(seed, k_tag_tail, static_cast<std::uint64_t>(n));
  VecStat acc = parallel_reduce(
      trials, k_default_chunk, threads, VecStat(x_grid.size()),
      [&](std::uint64_t t0, std::uint64_t t1, VecStat& a) {
        for (std::uint64_t t = t0; t < t1; ++t) {
          // one sup per trial serves the whole threshold grid
          const double s = sup_functional(derive_stream(master, t), n, 0, par);
          for (std::size_t i = 0; i < thresholds.size(); ++i)
            a.v[i].add(s >= thresholds[i] ? 1.0 : 0.0);
        }
      });
  TailSupResult out;
  out.n = n;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    GridRow row;
    row.key = x_grid[i];
    row.report = make_estimate(acc.v[i], seed);
    row.report.bound_ratio =
        row.report.estimate.real() * std::exp(x_grid[i]) / (1.0 + x_grid[i]);
    if (acc.v[i].mean == 0.0)
      row.report.truncation = "no exceedances observed at this threshold";
    out.rows.push_back(std::move(row));
  }
  return out;
}

FourthMomentResult fourth_moment(const ModelParams& par, const std::vector<int>& depths,
                                 double x, std::uint64_t trials, std::uint64_t seed,
                                 int threads) {
  if (trials < 2) throw std::invalid_argument("fourth_moment: need >= 2 trials");
  FourthMomentResult out;
  out.x = x;
  for (const int n : depths) {
    if (n < 0 || n > 20) throw std::invalid_argument("fourth_moment: depth out of range");
    const std::uint64_t master =
        sub_seed(seed, k_tag_fourth, static_cast<std::uint64_t>(n));
    RunningStat acc = parallel_reduce(
        trials, k_default_chunk, threads, RunningStat{},
        [&](std::uint64_t t0, std::uint64_t t1, RunningStat& a) {
          for (std::uint64_t t = t0; t < t1; ++t) {
            const TreeSummary ts = reduce_tree(derive_stream(master, t), n, par);
            if (ts.min_v >= -x) {
              const double m2 = std::norm(ts.mass);
              a.add(m2 * m2);
            } else {
              a.add(0.0);
            }
          }
        });
    GridRow row;
    row.key = static_cast<double>(n);
    row.report = make_estimate(acc, seed);
    row.report.bound_ratio =
        row.report.estimate.real() * std::exp(x * (1.0 - 4.0 * par.gamma));
    out.rows.push_back(std::move(row));
  }
  return out;
}

BarrierResult barrier_probability(const std::vector<double>& x_grid, int depth,
                                  double epsilon0, std::uint64_t trials,
                                  std::uint64_t seed, int threads) {
  if (depth < 1 || depth > 24)
    throw std::invalid_argument("barrier_probability: depth must lie in [1, 24]");
  if (!(epsilon0 > 0.0 && epsilon0 < 0.5))
    throw std::invalid_argument("barrier_probability: epsilon0 must lie in (0, 1/2)");
  if (x_grid.empty()) throw std::invalid_argument("barrier_probability: empty grid");
  if (trials < 2) throw std::invalid_argument("barrier_probability: need >= 2 trials");
  const ModelParams unused{};  // the barrier event only involves the real field
  const std::uint64_t master =
      sub_seed(seed, k_tag_barrier, static_cast<std::uint64_t>(depth));
  VecStat acc = parallel_reduce(
      trials, k_default_chunk, threads, VecStat(x_grid.size()),
      [&](std::uint64_t t0, std::uint64_t t1, VecStat& a) {
        for (std::uint64_t t = t0; t < t1; ++t) {
          // the margin is monotone in x, so one pass serves the whole grid
          const TreeSummary ts =
              reduce_tree(derive_stream(master, t), depth, unused, epsilon0, false);
          for (std::size_t i = 0; i < x_grid.size(); ++i)
            a.v[i].add(ts.barrier_margin <= -x_grid[i] ? 1.0 : 0.0);
        }
      });
  BarrierResult out;
  out.depth = depth;
  out.epsilon0 = epsilon0;
  const std::string note =
      "crossing events truncated to the first " + std::to_string(depth) +
      " generations of the infinite tree";
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    GridRow row;
    row.key = x_grid[i];
    row.report = make_estimate(acc.v[i], seed);
    row.report.bound_ratio =
        row.report.estimate.real() * std::exp(x_grid[i]) / (1.0 + x_grid[i]);
    row.report.truncation = note;
    out.rows.push_back(std::move(row));
  }
  return out;
}

ModulusResult modulus_experiment(const ModelParams& par, int depth, int l_min, int l_max,
                                 std::uint64_t trials, std::uint64_t seed, int threads,
                                 DiameterMode mode) {
  if (depth < 1 || depth > k_breadth_depth_cap)
    throw std::invalid_argument("modulus_experiment: depth out of range");
  if (l_min < 1 || l_min > l_max || l_max > depth)
    throw std::invalid_argument("modulus_experiment: bad level range");
  if (trials < 2) throw std::invalid_argument("modulus_experiment: need >= 2 trials");
  const double norm = std::pow(mean_factor(par), depth);
  const std::uint64_t master =
      sub_seed(seed, k_tag_modulus, static_cast<std::uint64_t>(depth));
  const std::size_t nlevels = static_cast<std::size_t>(l_max - l_min) + 1;
  VecStat acc = parallel_reduce(
      trials, k_default_chunk, threads, VecStat(nlevels),
      [&](std::uint64_t t0, std::uint64_t t1, VecStat& a) {
        for (std::uint64_t t = t0; t < t1; ++t) {
          const LevelState lv =
              simulate_breadth_for_stream(derive_stream(master, t), depth);
          const PartialSumProcess proc = partial_sums(lv, par, norm);
          const std::vector<double> sups = oscillation_sups(proc, l_min, l_max, mode);
          for (std::size_t i = 0; i < nlevels; ++i) a.v[i].add(sups[i]);
        }
      });
  ModulusResult out;
  out.depth = depth;
  std::vector<double> log_l, l_ln2, log_est;
  for (std::size_t i = 0; i < nlevels; ++i) {
    const int l = l_min + static_cast<int>(i);
    GridRow row;
    row.key = static_cast<double>(l);
    row.report = make_estimate(acc.v[i], seed);
    out.rows.push_back(std::move(row));
    log_l.push_back(std::log(static_cast<double>(l)));
    l_ln2.push_back(static_cast<double>(l) * std::numbers::ln2);
    log_est.push_back(std::log(acc.v[i].mean));
  }
  out.fit_log = fit_line(log_l, log_est);
  out.fit_lin = fit_line(l_ln2, log_est);
  return out;
}

VariationResult variation_experiment(const ModelParams& par,
                                     const std::vector<int>& depths,
                                     std::uint64_t trials, std::uint64_t seed,
                                     int threads) {
  if (trials < 2) throw std::invalid_argument("variation_experiment: need >= 2 trials");
  struct TvAcc {
    RunningStat leaf_tv;
    double worst_gap = 0.0;  // most positive value of (TV(l) - TV(l+1)) / scale
    void merge(const TvAcc& o) {
      leaf_tv.merge(o.leaf_tv);
      worst_gap = std::max(worst_gap, o.worst_gap);
    }
  };
  VariationResult out;
  const double g = par.gamma;
  const double tv_exponent = 1.0 - 2.0 * g + g * g;
  for (const int n : depths) {
    if (n < 1 || n > k_breadth_depth_cap)
      throw std::invalid_argument("variation_experiment: depth out of range");
    const std::uint64_t master =
        sub_seed(seed, k_tag_variation, static_cast<std::uint64_t>(n));
    TvAcc acc = parallel_reduce(
        trials, k_default_chunk, threads, TvAcc{},
        [&](std::uint64_t t0, std::uint64_t t1, TvAcc& a) {
          for (std::uint64_t t = t0; t < t1; ++t) {
            const LevelState lv =
                simulate_breadth_for_stream(derive_stream(master, t), n);
            const PartialSumProcess proc = partial_sums(lv, par);
            double prev = total_variation(proc, 0);
            for (int l = 1; l <= n; ++l) {
              const double cur = total_variation(proc, l);
              a.worst_gap =
                  std::max(a.worst_gap, (prev - cur) / std::max(1.0, cur));
              prev = cur;
            }
            a.leaf_tv.add(prev);
          }
        });
    GridRow row;
    row.key = static_cast<double>(n);
    row.report = make_estimate(acc.leaf_tv, seed);
    row.report.bound_ratio = row.report.estimate.real() / std::exp2(tv_exponent * n);
    out.rows.push_back(std::move(row));
    out.worst_refinement_gap = std::max(out.worst_refinement_gap, acc.worst_gap);
  }
  return out;
}

std::vector<IdentityOutcome> identity_suite(const ModelParams& par, int depth,
                                            std::uint64_t trials, std::uint64_t seed) {
  if (depth < 1 || depth > 22) throw std::invalid_argument("identity_suite: bad depth");
  if (trials < 1) throw std::invalid_argument("identity_suite: need >= 1 trial");
  constexpr int p_alt = 4;
  const std::uint64_t master = sub_seed(seed, k_tag_identity, 0);
  const std::uint64_t leaves_n = std::uint64_t{1} << depth;
  const double bcoef = par.beta * k_sqrt_two_ln2;

  double worst_rec = 0.0, worst_dec = 0.0, worst_tri0 = 0.0, worst_tri4 = 0.0;
  double worst_tv = 0.0, worst_comb = 0.0;

  for (std::uint64_t t = 0; t < trials; ++t) {
    const std::uint64_t stream = derive_stream(master, t);
    const LevelState lv = simulate_breadth_for_stream(stream, depth);
    const PartialSumProcess proc = partial_sums(lv, par);

    // split at 1/2
    const auto m1 = subtree_masses(lv, 1, par);
    const LevelState g1 = simulate_breadth_for_stream(stream, 1);
    worst_rec = std::max(worst_rec, verify_cascade_recursion(proc, m1, g1));

    // left-edge decomposition at the corners and at random interior leaves
    std::vector<std::uint64_t> us = {0, leaves_n - 1};
    for (int i = 0; i < 100; ++i)
      us.push_back(mix64(stream ^ (0xDECull + static_cast<std::uint64_t>(i))) &
                   (leaves_n - 1));
    worst_dec = std::max(worst_dec, verify_left_decomposition(proc, lv, par, us));

    // the sup functional dominates the partial sums on its grid
    const double sup0 = sup_functional(stream, depth, 0, par);
    double maxk = 0.0;
    for (const auto& z : proc.sums) maxk = std::max(maxk, std::abs(z));
    worst_tri0 = std::max(worst_tri0, (maxk - sup0) / std::max(1.0, maxk));

    const LevelState lv4 = simulate_breadth_for_stream(stream, depth + p_alt);
    const PartialSumProcess proc4 = partial_sums(lv4, par);
    const double sup4 = sup_functional(stream, depth, p_alt, par);
    double maxk4 = 0.0;
    for (std::uint64_t k = 0; k <= leaves_n; ++k)
      maxk4 = std::max(maxk4, std::abs(proc4.sums[k << p_alt]));
    worst_tri4 = std::max(worst_tri4, (maxk4 - sup4) / std::max(1.0, maxk4));

    // refinement monotonicity of the total variation
    double prev = total_variation(proc, 0);
    for (int l = 1; l <= depth; ++l) {
      const double cur = total_variation(proc, l);
      worst_tv = std::max(worst_tv, (prev - cur) / std::max(1.0, cur));
      prev = cur;
    }

    // recombining subtree masses against the direct total
    for (const int l : {0, 1, depth / 2, depth}) {
      const auto masses = subtree_masses(lv, l, par);
      const LevelState anc =
          l == depth ? lv : simulate_breadth_for_stream(stream, l);
      ComplexSum tot;
      for (std::size_t b = 0; b < masses.size(); ++b)
        tot.add(leaf_weight(par.gamma, bcoef, anc.v[b], anc.x[b]) * masses[b]);
      worst_comb = std::max(worst_comb, rel_diff(tot.value(), proc.total()));
    }
  }

  // flat parameters: every weight is exactly 2^-depth after normalization
  double worst_leb = 0.0;
  {
    const LevelState lv =
        simulate_breadth_for_stream(derive_stream(master, trials), depth);
    const PartialSumProcess proc =
        partial_sums(lv, model_params(0.0, 0.0), std::exp2(depth));
    for (std::uint64_t k = 0; k <= leaves_n; ++k)
      worst_leb = std::max(worst_leb, std::abs(proc.sums[k].real() -
                                               std::ldexp(double(k), -depth)) +
                                          std::abs(proc.sums[k].imag()));
  }

  const auto mk = [](std::string label, double err, double tol) {
    return IdentityOutcome{std::move(label), err, tol, err <= tol};
  };
  return {
      mk("cascade_recursion_split", worst_rec, 1e-10),
      mk("left_edge_decomposition", worst_dec, 1e-10),
      mk("sup_dominates_grid_p0", worst_tri0, 1e-10),
      mk("sup_dominates_grid_p4", worst_tri4, 1e-10),
      mk("tv_refinement_monotone", worst_tv, 1e-12),
      mk("subtree_recombination", worst_comb, 1e-10),
      mk("flat_parameter_exactness", worst_leb, 1e-15),
  };
}

}  // namespace cascade
