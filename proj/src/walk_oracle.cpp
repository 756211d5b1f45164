#include "cascade/walk_oracle.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "cascade/parallel.hpp"
#include "cascade/rng.hpp"

namespace cascade {

namespace {

// keeps the walk side of the comparison off the tree side's streams
constexpr std::uint64_t k_domain_pair = 0x6D616E79746F6F6EULL;

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

WalkPath sample_walk(std::uint64_t master_seed, std::uint64_t trial, int n, double x) {
  if (n < 0) throw std::invalid_argument("sample_walk: negative length");
  WalkPath path;
  path.start = x;
  path.values.resize(static_cast<std::size_t>(n));
  path.running_min = std::numeric_limits<double>::infinity();
  const WalkRng rng(master_seed, trial);
  double s = x;
  for (int j = 1; j <= n; ++j) {
    s += rng.step(static_cast<std::uint64_t>(j));
    path.values[j - 1] = s;
    if (s < path.running_min) path.running_min = s;
  }
  return path;
}

double TestFunction::operator()(double s) const {
  switch (kind) {
    case Kind::indicator_above:
      return s > threshold ? 1.0 : 0.0;
    case Kind::identity:
      return s;
    case Kind::exp_decay:
      return std::exp(-rate * s);
    case Kind::polynomial: {
      double acc = 0.0;
      for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * s + coeffs[i];
      return acc;
    }
  }
  return 0.0;
}

std::string TestFunction::name() const {
  switch (kind) {
    case Kind::indicator_above:
      return "indicator_above(" + fmt_num(threshold) + ")";
    case Kind::identity:
      return "identity";
    case Kind::exp_decay:
      return "exp_decay(" + fmt_num(rate) + ")";
    case Kind::polynomial: {
      if (coeffs.size() == 1 && coeffs[0] == 1.0) return "one";
      std::string s = "polynomial(";
      for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (i) s += ",";
        s += fmt_num(coeffs[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

namespace {

// sum over depth-n leaves of F(x + V(z)) e^{-V(z)}, one v-lane DFS
struct TiltedSumDfs {
  NodeRng rng;
  int depth;
  const TestFunction* f;
  double x;
  NeumaierSum acc;

  void walk(int d, std::uint64_t idx, double v) {
    if (d == depth) {
      acc.add((*f)(x + v) * std::exp(-v));
      return;
    }
    walk(d + 1, 2 * idx, v + rng.v_increment(d + 1, 2 * idx));
    walk(d + 1, 2 * idx + 1, v + rng.v_increment(d + 1, 2 * idx + 1));
  }
};

struct PairAcc {
  RunningStat tree, walk;
  void merge(const PairAcc& o) {
    tree.merge(o.tree);
    walk.merge(o.walk);
  }
};

}  // namespace

ComparePair many_to_one_compare(const TestFunction& f, int n, double x,
                                std::uint64_t trials, std::uint64_t seed, int threads) {
  if (n < 0 || n > 20)
    throw std::invalid_argument("many_to_one_compare: tree side limited to n <= 20");
  if (trials < 2) throw std::invalid_argument("many_to_one_compare: need >= 2 trials");
  const std::uint64_t walk_master = mix64(seed ^ k_domain_pair);
  PairAcc acc = parallel_reduce(
      trials, k_default_chunk, threads, PairAcc{},
      [&](std::uint64_t t0, std::uint64_t t1, PairAcc& a) {
        for (std::uint64_t t = t0; t < t1; ++t) {
          TiltedSumDfs dfs{NodeRng(seed, t), n, &f, x, {}};
          dfs.walk(0, 0, 0.0);
          a.tree.add(dfs.acc.value());

          const WalkRng wrng(walk_master, t);
          double s = x;
          for (int j = 1; j <= n; ++j) s += wrng.step(static_cast<std::uint64_t>(j));
          a.walk.add(f(s));
        }
      });
  ComparePair out;
  out.tree = make_estimate(acc.tree, seed);
  out.walk = make_estimate(acc.walk, seed);
  return out;
}

EstimateReport ballot_probability(int n, double x, double a, double b,
                                  std::uint64_t trials, std::uint64_t seed,
                                  int threads) {
  if (n < 1) throw std::invalid_argument("ballot_probability: need n >= 1");
  if (a > b) throw std::invalid_argument("ballot_probability: empty window (a > b)");
  if (trials < 2) throw std::invalid_argument("ballot_probability: need >= 2 trials");
  RunningStat acc = parallel_reduce(
      trials, k_default_chunk, threads, RunningStat{},
      [&](std::uint64_t t0, std::uint64_t t1, RunningStat& st) {
        for (std::uint64_t t = t0; t < t1; ++t) {
          const WalkRng rng(seed, t);
          double s = x;
          bool alive = true;
          for (int j = 1; j <= n; ++j) {
            s += rng.step(static_cast<std::uint64_t>(j));
            if (s < 0.0) {
              alive = false;
              break;
            }
          }
          st.add(alive && s >= a && s <= b ? 1.0 : 0.0);
        }
      });
  EstimateReport rep = make_estimate(acc, seed);
  if (std::isfinite(b)) {
    const double scale = std::pow(static_cast<double>(n), 1.5) /
                         ((1.0 + x) * (1.0 + std::max(b, 0.0)) * (1.0 + (b - a)));
    rep.bound_ratio = rep.estimate.real() * scale;
  }
  return rep;
}

namespace {

RunningStat exp_sum_run(double kappa, double x, std::uint64_t horizon,
                        std::uint64_t trials, std::uint64_t seed, int threads) {
  return parallel_reduce(
      trials, k_default_chunk, threads, RunningStat{},
      [&](std::uint64_t t0, std::uint64_t t1, RunningStat& st) {
        for (std::uint64_t t = t0; t < t1; ++t) {
          const WalkRng rng(seed, t);
          NeumaierSum acc;
          acc.add(std::exp(-kappa * x));  // l = 0: empty min, vacuously alive
          double s = x;
          for (std::uint64_t l = 1; l <= horizon; ++l) {
            s += rng.step(l);
            if (s < 0.0) break;  // indicator dies for this and every later term
            acc.add(std::exp(-kappa * s));
          }
          st.add(acc.value());
        }
      });
}

}  // namespace

EstimateReport exp_sum(double kappa, double x, std::uint64_t horizon,
                       std::uint64_t trials, std::uint64_t seed, int threads) {
  if (!(kappa > 0.0)) throw std::invalid_argument("exp_sum: kappa must be positive");
  if (trials < 2) throw std::invalid_argument("exp_sum: need >= 2 trials");

  if (horizon == 0) {
    RunningStat st = exp_sum_run(kappa, x, 0, trials, seed, threads);
    EstimateReport rep = make_estimate(st, seed);
    rep.truncation = "series truncated at horizon 0";
    return rep;
  }

  // double the horizon until consecutive estimates agree within 2 SE; the
  // streams are counter-based, so a longer horizon extends the same paths
  std::uint64_t h = horizon;
  RunningStat cur = exp_sum_run(kappa, x, h, trials, seed, threads);
  bool stabilized = false;
  for (int round = 0; round < 6; ++round) {
    const RunningStat nxt = exp_sum_run(kappa, x, 2 * h, trials, seed, threads);
    const double delta = std::abs(nxt.mean - cur.mean);
    h *= 2;
    cur = nxt;
    if (delta <= 2.0 * nxt.std_error()) {
      stabilized = true;
      break;
    }
  }
  EstimateReport rep = make_estimate(cur, seed);
  rep.truncation = std::string("series truncated at horizon ") + std::to_string(h) +
                   (stabilized ? "; stabilized within 2 SE of previous horizon"
                               : "; NOT stabilized within 2 SE");
  return rep;
}

}  // namespace cascade
