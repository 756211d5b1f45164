#include "cascade/measure.hpp"

#include <algorithm>
#include <cmath>

namespace cascade {

namespace {

void check_norm(double normalization) {
  if (!(normalization > 0.0) || !std::isfinite(normalization))
    throw std::invalid_argument("partial_sums: normalization must be positive");
}

}  // namespace

PartialSumProcess partial_sums(const LevelState& leaves, const ModelParams& par,
                               double normalization) {
  check_norm(normalization);
  PartialSumProcess p;
  p.depth = leaves.depth;
  p.gamma = par.gamma;
  p.beta = par.beta;
  p.normalization = normalization;
  const std::size_t count = leaves.v.size();
  p.sums.resize(count + 1);
  p.sums[0] = {0.0, 0.0};
  const double bcoef = par.beta * k_sqrt_two_ln2;
  ComplexSum acc;
  for (std::size_t k = 0; k < count; ++k) {
    acc.add(leaf_weight(par.gamma, bcoef, leaves.v[k], leaves.x[k]) / normalization);
    p.sums[k + 1] = acc.value();
  }
  return p;
}

PartialSumProcess partial_sums(LeafStream& leaves, const ModelParams& par,
                               double normalization) {
  check_norm(normalization);
  if (leaves.position() != 0)
    throw std::invalid_argument("partial_sums: stream already advanced; "
                                "sums must be accumulated in dyadic order");
  PartialSumProcess p;
  p.depth = leaves.depth();
  p.gamma = par.gamma;
  p.beta = par.beta;
  p.normalization = normalization;
  const std::uint64_t count = std::uint64_t{1} << leaves.depth();
  p.sums.resize(count + 1);
  p.sums[0] = {0.0, 0.0};
  const double bcoef = par.beta * k_sqrt_two_ln2;
  ComplexSum acc;
  LeafStream::Leaf leaf;
  std::uint64_t expected = 0;
  while (leaves.next(leaf)) {
    if (leaf.index != expected)
      throw std::invalid_argument("partial_sums: leaves arrived out of order");
    acc.add(leaf_weight(par.gamma, bcoef, leaf.v, leaf.x) / normalization);
    p.sums[expected + 1] = acc.value();
    ++expected;
  }
  return p;
}

double verify_cascade_recursion(const PartialSumProcess& proc,
                                std::span<const std::complex<double>> level1_masses,
                                const LevelState& first_gen) {
  if (proc.depth < 1)
    throw std::invalid_argument("verify_cascade_recursion: depth must be >= 1");
  if (level1_masses.size() != 2)
    throw std::invalid_argument("verify_cascade_recursion: need the two level-1 masses");
  if (first_gen.depth != 1 || first_gen.v.size() != 2)
    throw std::invalid_argument("verify_cascade_recursion: first_gen must be level 1");
  if (proc.normalization != 1.0)
    throw std::invalid_argument("verify_cascade_recursion: use unnormalized sums");
  const double bcoef = proc.beta * k_sqrt_two_ln2;
  const std::size_t half = std::size_t{1} << (proc.depth - 1);
  const std::complex<double> w0 =
      leaf_weight(proc.gamma, bcoef, first_gen.v[0], first_gen.x[0]);
  const std::complex<double> w1 =
      leaf_weight(proc.gamma, bcoef, first_gen.v[1], first_gen.x[1]);
  const double e0 = rel_diff(proc.sums[half], w0 * level1_masses[0]);
  const double e1 = rel_diff(proc.total() - proc.sums[half], w1 * level1_masses[1]);
  return std::max(e0, e1);
}

double verify_left_decomposition(const PartialSumProcess& proc, const LevelState& leaves,
                                 const ModelParams& par,
                                 std::span<const std::uint64_t> u_indices) {
  const int n = leaves.depth;
  if (proc.depth != n)
    throw std::invalid_argument("verify_left_decomposition: depth mismatch");
  if (proc.normalization != 1.0)
    throw std::invalid_argument("verify_left_decomposition: use unnormalized sums");
  if (n < 1) throw std::invalid_argument("verify_left_decomposition: depth must be >= 1");

  // ancestor generations, re-simulated from the stored stream
  SimConfig cfg;
  cfg.epsilon0 = leaves.epsilon0;
  std::vector<LevelState> levels;
  levels.reserve(static_cast<std::size_t>(n));
  levels.push_back(root_level_for_stream(leaves.stream, leaves.epsilon0));
  for (int d = 1; d < n; ++d) levels.push_back(extend(levels.back()));

  const double bcoef = par.beta * k_sqrt_two_ln2;
  double worst = 0.0;
  for (const std::uint64_t u : u_indices) {
    if (u >= proc.sums.size() - 1)
      throw std::invalid_argument("verify_left_decomposition: leaf index out of range");
    ComplexSum rhs;
    for (int d = 1; d <= n; ++d) {
      const std::uint64_t prefix = u >> (n - d);
      if ((prefix & 1) == 0) continue;  // ray steps left: no left sibling here
      const std::uint64_t s = prefix - 1;
      const double vs = d == n ? leaves.v[s] : levels[d].v[s];
      const double xs = d == n ? leaves.x[s] : levels[d].x[s];
      // relative mass of the sibling subtree, summed from scratch
      ComplexSum ms;
      const std::uint64_t lo = s << (n - d);
      const std::uint64_t hi = (s + 1) << (n - d);
      for (std::uint64_t z = lo; z < hi; ++z)
        ms.add(leaf_weight(par.gamma, bcoef, leaves.v[z] - vs, leaves.x[z] - xs));
      const std::complex<double> w = leaf_weight(par.gamma, bcoef, vs, xs);
      rhs.add(w * ms.value());
    }
    worst = std::max(worst, rel_diff(proc.sums[u], rhs.value()));
  }
  return worst;
}

namespace {

struct SupDfs {
  NodeRng rng;
  int n;
  int p;
  double gamma;
  double bcoef;
  double best = 0.0;

  // relative subtree mass below the ray depth; nothing to track here
  std::complex<double> below(int d, std::uint64_t idx) {
    if (d == n + p) return {1.0, 0.0};
    double dv0, dx0, dv1, dx1;
    rng.increments(d + 1, 2 * idx, dv0, dx0);
    rng.increments(d + 1, 2 * idx + 1, dv1, dx1);
    return leaf_weight(gamma, bcoef, dv0, dx0) * below(d + 1, 2 * idx) +
           leaf_weight(gamma, bcoef, dv1, dx1) * below(d + 1, 2 * idx + 1);
  }

  // v_abs is V at this node; left_sum collects the left-sibling terms of the
  // ray so far, one term per right step
  std::complex<double> down(int d, std::uint64_t idx, double v_abs, double left_sum) {
    if (d == n) {
      const std::complex<double> m = below(d, idx);
      const double cand = left_sum + std::exp(-gamma * v_abs) * std::abs(m);
      if (cand > best) best = cand;
      return m;
    }
    double dv0, dx0, dv1, dx1;
    rng.increments(d + 1, 2 * idx, dv0, dx0);
    rng.increments(d + 1, 2 * idx + 1, dv1, dx1);
    const std::complex<double> m0 = down(d + 1, 2 * idx, v_abs + dv0, left_sum);
    const double lterm = std::exp(-gamma * (v_abs + dv0)) * std::abs(m0);
    const std::complex<double> m1 =
        down(d + 1, 2 * idx + 1, v_abs + dv1, left_sum + lterm);
    return leaf_weight(gamma, bcoef, dv0, dx0) * m0 +
           leaf_weight(gamma, bcoef, dv1, dx1) * m1;
  }
};

}  // namespace

double sup_functional(std::uint64_t stream, int n, int p, const ModelParams& par) {
  if (n < 0 || p < 0 || n + p > 40)
    throw std::invalid_argument("sup_functional: bad depths");
  SupDfs dfs{NodeRng(stream), n, p, par.gamma, par.beta * k_sqrt_two_ln2};
  dfs.down(0, 0, 0.0, 0.0);
  return dfs.best;
}

double sup_functional(std::uint64_t master_seed, std::uint64_t trial, int n, int p,
                      const ModelParams& par) {
  return sup_functional(derive_stream(master_seed, trial), n, p, par);
}

namespace geom {

namespace {

double cross3(std::complex<double> o, std::complex<double> a, std::complex<double> b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) -
         (a.imag() - o.imag()) * (b.real() - o.real());
}

bool lex_less(std::complex<double> a, std::complex<double> b) {
  return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

}  // namespace

std::vector<std::complex<double>> convex_hull(std::vector<std::complex<double>> pts) {
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t m = pts.size();
  if (m <= 2) return pts;
  std::vector<std::complex<double>> h(2 * m);
  std::size_t k = 0;
  // lower chain, strict left turns only
  for (std::size_t i = 0; i < m; ++i) {
    while (k >= 2 && cross3(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  // upper chain
  for (std::size_t i = m - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross3(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);  // last point repeats the first
  return h;
}

double hull_diameter_sq(const std::vector<std::complex<double>>& hull) {
  const std::size_t m = hull.size();
  if (m < 2) return 0.0;
  if (m == 2) return std::norm(hull[1] - hull[0]);
  const auto crossv = [](std::complex<double> a, std::complex<double> b) {
    return a.real() * b.imag() - a.imag() * b.real();
  };
  double best = 0.0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < m; ++i) {
    const std::complex<double> a = hull[i];
    const std::complex<double> b = hull[(i + 1) % m];
    const std::complex<double> e = b - a;
    // advance the antipodal point while it moves away from edge (a, b)
    while (crossv(e, hull[(j + 1) % m] - hull[j]) > 0.0) j = (j + 1) % m;
    best = std::max(best, std::norm(hull[j] - a));
    best = std::max(best, std::norm(hull[j] - b));
  }
  return best;
}

}  // namespace geom

namespace {

void check_level(const PartialSumProcess& proc, int l) {
  if (l < 0 || l > proc.depth)
    throw std::invalid_argument("refinement level out of range");
}

double bbox_diag(const std::complex<double>* pts, std::size_t count) {
  double rlo = pts[0].real(), rhi = rlo, ilo = pts[0].imag(), ihi = ilo;
  for (std::size_t k = 1; k < count; ++k) {
    rlo = std::min(rlo, pts[k].real());
    rhi = std::max(rhi, pts[k].real());
    ilo = std::min(ilo, pts[k].imag());
    ihi = std::max(ihi, pts[k].imag());
  }
  return std::hypot(rhi - rlo, ihi - ilo);
}

std::vector<OscillationProfile> profile_impl(const PartialSumProcess& proc, int l_min,
                                             int l_max, DiameterMode mode,
                                             bool keep_diameters) {
  check_level(proc, l_min);
  check_level(proc, l_max);
  if (l_min > l_max) throw std::invalid_argument("oscillation_profile: l_min > l_max");

  std::vector<OscillationProfile> out(static_cast<std::size_t>(l_max - l_min) + 1);

  if (mode == DiameterMode::bbox) {
    struct Box {
      double rlo, rhi, ilo, ihi;
    };
    std::uint64_t blocks = std::uint64_t{1} << l_max;
    const std::uint64_t width = (std::uint64_t{1} << proc.depth) >> l_max;
    std::vector<Box> boxes(blocks);
    for (std::uint64_t b = 0; b < blocks; ++b) {
      Box box{proc.sums[b * width].real(), proc.sums[b * width].real(),
              proc.sums[b * width].imag(), proc.sums[b * width].imag()};
      for (std::uint64_t k = b * width + 1; k <= (b + 1) * width; ++k) {
        box.rlo = std::min(box.rlo, proc.sums[k].real());
        box.rhi = std::max(box.rhi, proc.sums[k].real());
        box.ilo = std::min(box.ilo, proc.sums[k].imag());
        box.ihi = std::max(box.ihi, proc.sums[k].imag());
      }
      boxes[b] = box;
    }
    for (int l = l_max;; --l) {
      OscillationProfile& prof = out[static_cast<std::size_t>(l - l_min)];
      prof.level = l;
      prof.mode = mode;
      prof.lo = 0.0;
      if (keep_diameters) prof.diameters.resize(blocks);
      for (std::uint64_t b = 0; b < blocks; ++b) {
        const double d = std::hypot(boxes[b].rhi - boxes[b].rlo,
                                    boxes[b].ihi - boxes[b].ilo);
        if (keep_diameters) prof.diameters[b] = d;
        prof.lo = std::max(prof.lo, d);
      }
      prof.hi = 3.0 * prof.lo;
      if (l == l_min) break;
      blocks >>= 1;
      for (std::uint64_t b = 0; b < blocks; ++b) {
        const Box& a = boxes[2 * b];
        const Box& c = boxes[2 * b + 1];
        boxes[b] = Box{std::min(a.rlo, c.rlo), std::max(a.rhi, c.rhi),
                       std::min(a.ilo, c.ilo), std::max(a.ihi, c.ihi)};
      }
      boxes.resize(blocks);
    }
    return out;
  }

  // exact mode: per-block hulls at the finest level, merged pairwise upward
  std::uint64_t blocks = std::uint64_t{1} << l_max;
  const std::uint64_t width = (std::uint64_t{1} << proc.depth) >> l_max;
  std::vector<std::vector<std::complex<double>>> hulls(blocks);
  {
    std::vector<std::complex<double>> pts;
    for (std::uint64_t b = 0; b < blocks; ++b) {
      pts.assign(proc.sums.begin() + static_cast<std::ptrdiff_t>(b * width),
                 proc.sums.begin() + static_cast<std::ptrdiff_t>((b + 1) * width + 1));
      hulls[b] = geom::convex_hull(std::move(pts));
      pts.clear();
    }
  }
  for (int l = l_max;; --l) {
    OscillationProfile& prof = out[static_cast<std::size_t>(l - l_min)];
    prof.level = l;
    prof.mode = mode;
    prof.lo = 0.0;
    if (keep_diameters) prof.diameters.resize(blocks);
    for (std::uint64_t b = 0; b < blocks; ++b) {
      const double d = std::sqrt(geom::hull_diameter_sq(hulls[b]));
      if (keep_diameters) prof.diameters[b] = d;
      prof.lo = std::max(prof.lo, d);
    }
    prof.hi = 3.0 * prof.lo;
    if (l == l_min) break;
    blocks >>= 1;
    std::vector<std::complex<double>> merged;
    for (std::uint64_t b = 0; b < blocks; ++b) {
      merged.assign(hulls[2 * b].begin(), hulls[2 * b].end());
      merged.insert(merged.end(), hulls[2 * b + 1].begin(), hulls[2 * b + 1].end());
      hulls[b] = geom::convex_hull(std::move(merged));
      merged.clear();
    }
    hulls.resize(blocks);
  }
  return out;
}

}  // namespace

OscillationProfile block_oscillations(const PartialSumProcess& proc, int l,
                                      DiameterMode mode) {
  check_level(proc, l);
  OscillationProfile prof;
  prof.level = l;
  prof.mode = mode;
  const std::uint64_t blocks = std::uint64_t{1} << l;
  const std::uint64_t width = (std::uint64_t{1} << proc.depth) >> l;
  prof.diameters.resize(blocks);
  prof.lo = 0.0;
  std::vector<std::complex<double>> pts;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const std::complex<double>* first = proc.sums.data() + b * width;
    double d;
    if (mode == DiameterMode::bbox) {
      d = bbox_diag(first, width + 1);
    } else {
      pts.assign(first, first + width + 1);
      d = std::sqrt(geom::hull_diameter_sq(geom::convex_hull(std::move(pts))));
      pts.clear();
    }
    prof.diameters[b] = d;
    prof.lo = std::max(prof.lo, d);
  }
  prof.hi = 3.0 * prof.lo;
  return prof;
}

std::vector<OscillationProfile> oscillation_profile(const PartialSumProcess& proc,
                                                    int l_min, int l_max,
                                                    DiameterMode mode) {
  return profile_impl(proc, l_min, l_max, mode, true);
}

std::vector<double> oscillation_sups(const PartialSumProcess& proc, int l_min, int l_max,
                                     DiameterMode mode) {
  const auto profiles = profile_impl(proc, l_min, l_max, mode, false);
  std::vector<double> sups(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) sups[i] = profiles[i].lo;
  return sups;
}

double total_variation(const PartialSumProcess& proc, int l) {
  check_level(proc, l);
  const std::uint64_t blocks = std::uint64_t{1} << l;
  const std::uint64_t width = (std::uint64_t{1} << proc.depth) >> l;
  NeumaierSum acc;
  for (std::uint64_t b = 0; b < blocks; ++b)
    acc.add(std::abs(proc.sums[(b + 1) * width] - proc.sums[b * width]));
  return acc.value();
}

}  // namespace cascade
