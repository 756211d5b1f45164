#include "cascade/cascade.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace cascade {

static_assert(std::endian::native == std::endian::little,
              "level snapshots assume a little-endian host");

LevelState root_level_for_stream(std::uint64_t stream, double epsilon0) {
  if (!(epsilon0 > 0.0 && epsilon0 < 0.5))
    throw std::invalid_argument("root_level: epsilon0 must lie in (0, 1/2)");
  LevelState s;
  s.depth = 0;
  s.stream = stream;
  s.epsilon0 = epsilon0;
  s.barrier_r = 0.5 - epsilon0;
  s.v.assign(1, 0.0);
  s.x.assign(1, 0.0);
  s.min_v = 0.0;
  s.barrier_margin = std::numeric_limits<double>::infinity();
  return s;
}

LevelState root_level(std::uint64_t master_seed, std::uint64_t trial, double epsilon0) {
  return root_level_for_stream(derive_stream(master_seed, trial), epsilon0);
}

LevelState extend(const LevelState& parent, int depth_cap) {
  const int d = parent.depth + 1;
  if (d > depth_cap)
    throw capacity_error("extend: depth " + std::to_string(d) +
                         " exceeds breadth-first cap " + std::to_string(depth_cap));
  LevelState child;
  child.depth = d;
  child.stream = parent.stream;
  child.epsilon0 = parent.epsilon0;
  child.barrier_r = parent.barrier_r;
  const std::size_t m = parent.v.size();
  child.v.resize(2 * m);
  child.x.resize(2 * m);
  const NodeRng rng(parent.stream);
  double level_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double pv = parent.v[i];
    const double px = parent.x[i];
    for (int c = 0; c < 2; ++c) {
      const std::uint64_t idx = 2 * i + static_cast<std::uint64_t>(c);
      double dv, dx;
      rng.increments(d, idx, dv, dx);
      const double vv = pv + dv;
      child.v[idx] = vv;
      child.x[idx] = px + dx;
      if (vv < level_min) level_min = vv;
    }
  }
  child.min_v = std::min(parent.min_v, level_min);
  // min over the level commutes with subtracting the common depth penalty
  child.barrier_margin = std::min(parent.barrier_margin,
                                  level_min - child.barrier_r * std::log(double(d)));
  return child;
}

LevelState simulate_breadth_for_stream(std::uint64_t stream, int depth,
                                       const SimConfig& cfg) {
  if (depth < 0) throw std::invalid_argument("simulate_breadth: negative depth");
  if (depth > cfg.breadth_depth_cap)
    throw capacity_error("simulate_breadth: depth " + std::to_string(depth) +
                         " exceeds breadth-first cap " +
                         std::to_string(cfg.breadth_depth_cap));
  LevelState s = root_level_for_stream(stream, cfg.epsilon0);
  for (int d = 0; d < depth; ++d) s = extend(s, cfg.breadth_depth_cap);
  return s;
}

LevelState simulate_breadth(std::uint64_t master_seed, std::uint64_t trial, int depth,
                            const SimConfig& cfg) {
  return simulate_breadth_for_stream(derive_stream(master_seed, trial), depth, cfg);
}

namespace {

// validated before any member depends on the depth
std::uint64_t checked_leaf_count(int depth) {
  if (depth < 0 || depth > 62) throw std::invalid_argument("LeafStream: bad depth");
  return std::uint64_t{1} << depth;
}

}  // namespace

LeafStream::LeafStream(std::uint64_t stream, int depth, double epsilon0, int)
    : rng_(stream),
      depth_(depth),
      barrier_r_(0.5 - epsilon0),
      leaf_count_(checked_leaf_count(depth)),
      v_path_(static_cast<std::size_t>(depth) + 1, 0.0),
      x_path_(static_cast<std::size_t>(depth) + 1, 0.0),
      log_depth_(static_cast<std::size_t>(depth) + 1, 0.0) {
  if (!(epsilon0 > 0.0 && epsilon0 < 0.5))
    throw std::invalid_argument("LeafStream: epsilon0 must lie in (0, 1/2)");
  for (int d = 1; d <= depth; ++d) log_depth_[d] = std::log(double(d));
}

LeafStream::LeafStream(std::uint64_t master_seed, std::uint64_t trial, int depth,
                       double epsilon0)
    : LeafStream(derive_stream(master_seed, trial), depth, epsilon0, 0) {}

LeafStream LeafStream::for_stream(std::uint64_t stream, int depth, double epsilon0) {
  return LeafStream(stream, depth, epsilon0, 0);
}

void LeafStream::rebuild_from(int level) {
  for (int d = level; d <= depth_; ++d) {
    const std::uint64_t idx = next_index_ >> (depth_ - d);
    const double vv = v_path_[d - 1] + rng_.v_increment(d, idx);
    const double xx = x_path_[d - 1] + rng_.x_increment(d, idx);
    v_path_[d] = vv;
    x_path_[d] = xx;
    if (vv < min_v_) min_v_ = vv;
    const double m = vv - barrier_r_ * log_depth_[d];
    if (m < margin_) margin_ = m;
  }
}

bool LeafStream::next(Leaf& out) {
  if (count_ == leaf_count_) return false;
  if (depth_ == 0) {
    out = Leaf{0, 0.0, 0.0};
    ++count_;
    return true;
  }
  next_index_ = count_;
  // the binary increment flips a suffix; only those levels need recomputing
  const int from =
      count_ == 0 ? 1 : depth_ - static_cast<int>(std::countr_one(count_ - 1));
  rebuild_from(from);
  out.index = next_index_;
  out.v = v_path_[depth_];
  out.x = x_path_[depth_];
  ++count_;
  return true;
}

namespace {

struct ReduceDfs {
  NodeRng rng;
  int depth;
  double gamma;
  double bcoef;
  double barrier_r;
  bool with_mass;
  const double* logd;
  ComplexSum mass;
  double min_v = 0.0;
  double margin = std::numeric_limits<double>::infinity();

  void walk(int d, std::uint64_t idx, double v, double x) {
    if (d == depth) {
      if (with_mass) mass.add(leaf_weight(gamma, bcoef, v, x));
      return;
    }
    for (int c = 0; c < 2; ++c) {
      const std::uint64_t ci = 2 * idx + static_cast<std::uint64_t>(c);
      double dv, dx = 0.0;
      if (with_mass)
        rng.increments(d + 1, ci, dv, dx);
      else
        dv = rng.v_increment(d + 1, ci);
      const double vv = v + dv;
      if (vv < min_v) min_v = vv;
      const double m = vv - barrier_r * logd[d + 1];
      if (m < margin) margin = m;
      walk(d + 1, ci, vv, x + dx);
    }
  }
};

}  // namespace

TreeSummary reduce_tree(std::uint64_t stream, int depth, const ModelParams& par,
                        double epsilon0, bool with_mass) {
  if (depth < 0 || depth > 40) throw std::invalid_argument("reduce_tree: bad depth");
  if (!(epsilon0 > 0.0 && epsilon0 < 0.5))
    throw std::invalid_argument("reduce_tree: epsilon0 must lie in (0, 1/2)");
  std::vector<double> logd(static_cast<std::size_t>(depth) + 1, 0.0);
  for (int d = 1; d <= depth; ++d) logd[d] = std::log(double(d));
  ReduceDfs dfs{NodeRng(stream), depth,          par.gamma, par.beta * k_sqrt_two_ln2,
                0.5 - epsilon0,  with_mass,      logd.data(),
                {},              0.0,            std::numeric_limits<double>::infinity()};
  dfs.walk(0, 0, 0.0, 0.0);
  TreeSummary out;
  out.depth = depth;
  out.mass = dfs.mass.value();
  out.min_v = dfs.min_v;
  out.barrier_margin = dfs.margin;
  return out;
}

std::vector<std::complex<double>> subtree_masses(const LevelState& leaves, int l,
                                                 const ModelParams& par) {
  if (l < 0 || l > leaves.depth)
    throw std::invalid_argument("subtree_masses: level out of range");
  const LevelState* anc = &leaves;
  LevelState resim;
  if (l != leaves.depth) {
    SimConfig cfg;
    cfg.epsilon0 = leaves.epsilon0;
    resim = simulate_breadth_for_stream(leaves.stream, l, cfg);
    anc = &resim;
  }
  const double bcoef = par.beta * k_sqrt_two_ln2;
  const std::uint64_t blocks = std::uint64_t{1} << l;
  const std::uint64_t width = std::uint64_t{1} << (leaves.depth - l);
  std::vector<std::complex<double>> out(blocks);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const double va = anc->v[b];
    const double xa = anc->x[b];
    ComplexSum s;
    for (std::uint64_t k = b * width; k < (b + 1) * width; ++k)
      s.add(leaf_weight(par.gamma, bcoef, leaves.v[k] - va, leaves.x[k] - xa));
    out[b] = s.value();
  }
  return out;
}

namespace {

constexpr char k_magic[4] = {'C', 'S', 'C', 'L'};
constexpr std::uint32_t k_version = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("load_level: truncated snapshot");
  return v;
}

}  // namespace

void dump_level(const LevelState& level, const ModelParams& par, std::ostream& os) {
  os.write(k_magic, 4);
  put(os, k_version);
  put(os, static_cast<std::uint32_t>(level.depth));
  put(os, std::uint32_t{0});
  put(os, level.stream);
  put(os, par.gamma);
  put(os, par.beta);
  put(os, level.epsilon0);
  put(os, level.min_v);
  put(os, level.barrier_margin);
  os.write(reinterpret_cast<const char*>(level.v.data()),
           static_cast<std::streamsize>(level.v.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(level.x.data()),
           static_cast<std::streamsize>(level.x.size() * sizeof(double)));
  if (!os) throw std::runtime_error("dump_level: write failed");
}

DumpedLevel load_level(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, k_magic, 4) != 0)
    throw std::runtime_error("load_level: bad magic");
  if (get<std::uint32_t>(is) != k_version)
    throw std::runtime_error("load_level: unsupported version");
  const auto depth = get<std::uint32_t>(is);
  if (depth > 30) throw std::runtime_error("load_level: implausible depth");
  get<std::uint32_t>(is);  // reserved
  DumpedLevel out;
  out.level.depth = static_cast<int>(depth);
  out.level.stream = get<std::uint64_t>(is);
  out.gamma = get<double>(is);
  out.beta = get<double>(is);
  out.level.epsilon0 = get<double>(is);
  out.level.barrier_r = 0.5 - out.level.epsilon0;
  out.level.min_v = get<double>(is);
  out.level.barrier_margin = get<double>(is);
  const std::size_t count = std::size_t{1} << depth;
  out.level.v.resize(count);
  out.level.x.resize(count);
  is.read(reinterpret_cast<char*>(out.level.v.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  is.read(reinterpret_cast<char*>(out.level.x.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw std::runtime_error("load_level: truncated snapshot");
  return out;
}

}  // namespace cascade
