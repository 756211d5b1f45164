// Accumulators, estimate reports and small statistical utilities shared by
// the simulation and the experiment drivers.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cascade {

// Neumaier-compensated scalar sum; exact for long runs of well-scaled terms.
struct NeumaierSum {
  double s = 0.0;
  double c = 0.0;

  void add(double v) {
    const double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }

  double value() const { return s + c; }
};

struct ComplexSum {
  NeumaierSum re, im;

  void add(std::complex<double> z) {
    re.add(z.real());
    im.add(z.imag());
  }

  std::complex<double> value() const { return {re.value(), im.value()}; }
};

// Welford accumulator with Chan's merge rule, so chunked parallel reductions
// reproduce the serial result to rounding.
struct RunningStat {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }

  void merge(const RunningStat& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double d = o.mean - mean;
    const std::uint64_t t = n + o.n;
    mean += d * (static_cast<double>(o.n) / static_cast<double>(t));
    m2 += o.m2 + d * d * (static_cast<double>(n) * static_cast<double>(o.n) /
                          static_cast<double>(t));
    n = t;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

struct ComplexStat {
  RunningStat re, im;

  void add(std::complex<double> z) {
    re.add(z.real());
    im.add(z.imag());
  }

  void merge(const ComplexStat& o) {
    re.merge(o.re);
    im.merge(o.im);
  }

  std::uint64_t count() const { return re.n; }
  std::complex<double> mean() const { return {re.mean, im.mean}; }
  std::complex<double> std_error() const { return {re.std_error(), im.std_error()}; }
};

// One Monte Carlo estimate with enough context to reproduce it bit for bit.
struct EstimateReport {
  std::complex<double> estimate{0.0, 0.0};
  std::complex<double> std_error{0.0, 0.0};
  bool complex_valued = false;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::optional<double> bound_ratio;
  std::optional<std::string> truncation;
};

inline EstimateReport make_estimate(const RunningStat& st, std::uint64_t seed) {
  if (st.n < 2) throw std::invalid_argument("estimate needs at least 2 trials");
  EstimateReport r;
  r.estimate = {st.mean, 0.0};
  r.std_error = {st.std_error(), 0.0};
  r.complex_valued = false;
  r.trials = st.n;
  r.seed = seed;
  return r;
}

inline EstimateReport make_estimate(const ComplexStat& st, std::uint64_t seed) {
  if (st.count() < 2) throw std::invalid_argument("estimate needs at least 2 trials");
  EstimateReport r;
  r.estimate = st.mean();
  r.std_error = st.std_error();
  r.complex_valued = true;
  r.trials = st.count();
  r.seed = seed;
  return r;
}

// degenerate case: the quantity is deterministic, no sampling involved
inline EstimateReport make_deterministic(std::complex<double> value, bool complex_valued,
                                         std::uint64_t seed) {
  EstimateReport r;
  r.estimate = value;
  r.complex_valued = complex_valued;
  r.trials = 1;
  r.seed = seed;
  return r;
}

// scale-aware relative difference; unit scale floors the denominator so that
// exact identities between O(1) quantities are judged against their terms
inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double rel_diff(std::complex<double> a, std::complex<double> b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Ordinary least squares fit of ordinate against abscissa.
struct DecayFit {
  std::vector<double> abscissa;
  std::vector<double> ordinate;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline DecayFit fit_line(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (xs.size() < 2) throw std::invalid_argument("fit_line: need at least 2 points");
  const std::size_t m = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissa");
  DecayFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    ss_res += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  f.abscissa = std::move(xs);
  f.ordinate = std::move(ys);
  return f;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// asymptotic two-sample critical value at level alpha
inline double ks_critical(double alpha, std::size_t m, std::size_t n) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(m + n) /
                       (static_cast<double>(m) * static_cast<double>(n)));
}

}  // namespace cascade
