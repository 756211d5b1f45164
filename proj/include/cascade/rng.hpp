// Counter-based random number generation for tree-indexed Gaussian fields.
//
// Every draw is a pure function of (stream, counter, lane).  A stream is a
// 64-bit id derived from a master seed and a trial index; nodes of the binary
// tree are addressed by their heap index, so breadth-first and depth-first
// traversals of the same trial see bit-identical values.  No generator state
// is carried around, which also makes the per-trial work order-independent
// across worker threads.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cascade {

inline constexpr double k_two_ln2 = 2.0 * std::numbers::ln2;
// sqrt(2 ln 2), the std dev of the real part and the walk step scale
inline constexpr double k_sqrt_two_ln2 = 1.1774100225154747;

// splitmix64 finalizer: 3 xorshift-multiply rounds, full avalanche
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t k_golden = 0x9E3779B97F4A7C15ULL;

// per-trial (or per-domain) stream id; distinct indices give decorrelated streams
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master + k_golden) ^ (index * k_golden));
}

// domain tags keep node draws, walk draws and scratch draws disjoint
inline constexpr std::uint64_t k_domain_walk = 0x77616C6B73746570ULL;
inline constexpr std::uint64_t k_domain_theta = 0x7468657461736571ULL;
inline constexpr std::uint64_t k_lane_v = 0xA5A5A5A5A5A5A5A5ULL;
inline constexpr std::uint64_t k_lane_x = 0x5A5A5A5A5A5A5A5AULL;

// Uniform on (0,1): 2^52 equally spaced midpoints, symmetric about 1/2.
// 52 bits keep both endpoint values exactly representable, so the result is
// never 0 or 1 (with 53 bits the top midpoint rounds up to 1.0).
inline double u64_to_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

// Inverse standard normal cdf, Wichura's PPND16 rational approximations.
// Absolute error below 1e-15 over (0,1); both tails handled explicitly.
inline double inv_normal_cdf(double p) {
  const double q = p - 0.5;
  if (q >= -0.425 && q <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
            1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
          1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double z;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    z = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    z = num / den;
  }
  return q < 0.0 ? -z : z;
}

// Draw source for one trial's tree: nodes keyed by heap index, so the value
// at (depth, index) does not depend on traversal order.  Copyable, 8 bytes.
class NodeRng {
 public:
  NodeRng(std::uint64_t master_seed, std::uint64_t trial)
      : stream_(derive_stream(master_seed, trial)) {}
  explicit NodeRng(std::uint64_t stream) : stream_(stream) {}

  std::uint64_t stream() const { return stream_; }

  // real-part increment: N(2 ln 2, 2 ln 2)
  double v_increment(int depth, std::uint64_t index) const {
    const std::uint64_t h = node_key(depth, index);
    return k_two_ln2 +
           k_sqrt_two_ln2 * inv_normal_cdf(u64_to_unit(mix64(h ^ k_lane_v)));
  }

  // imaginary-part increment: N(0, 1), independent of the real part
  double x_increment(int depth, std::uint64_t index) const {
    const std::uint64_t h = node_key(depth, index);
    return inv_normal_cdf(u64_to_unit(mix64(h ^ k_lane_x)));
  }

  void increments(int depth, std::uint64_t index, double& dv, double& dx) const {
    const std::uint64_t h = node_key(depth, index);
    dv = k_two_ln2 +
         k_sqrt_two_ln2 * inv_normal_cdf(u64_to_unit(mix64(h ^ k_lane_v)));
    dx = inv_normal_cdf(u64_to_unit(mix64(h ^ k_lane_x)));
  }

 private:
  std::uint64_t node_key(int depth, std::uint64_t index) const {
    // heap index is unique across (depth, index) pairs
    const std::uint64_t heap = (std::uint64_t{1} << depth) + index;
    return mix64(stream_ ^ (heap * k_golden));
  }

  std::uint64_t stream_;
};

// Sequential N(0, 2 ln 2) steps for the tilted single-particle walk.
class WalkRng {
 public:
  WalkRng(std::uint64_t master_seed, std::uint64_t trial)
      : stream_(mix64(derive_stream(master_seed, trial) ^ k_domain_walk)) {}

  // step counters start at 1; counter 0 is reserved
  double step(std::uint64_t counter) const {
    const std::uint64_t h = mix64(stream_ ^ (counter * k_golden));
    return k_sqrt_two_ln2 * inv_normal_cdf(u64_to_unit(h));
  }

 private:
  std::uint64_t stream_;
};

}  // namespace cascade
