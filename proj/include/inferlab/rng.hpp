#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

// Counter-based random streams. Every control problem gets its own engine
// whose state is a hash of (root_seed, stream_index, problem index), so a
// worker that owns an index range reproduces exactly what a single-threaded
// sweep would produce, bit for bit, on any platform.

namespace inferlab {

struct SeedSpec {
  std::uint64_t root_seed = 0;
  std::uint64_t stream_index = 0;
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

namespace rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// SplitMix64: the state walks a Weyl sequence, outputs are mixed.
class Engine {
 public:
  using result_type = std::uint64_t;
  explicit Engine(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<std::uint64_t>::max();
  }
  result_type operator()() {
    state_ += kGolden;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t derive_state(const SeedSpec& seed, std::uint64_t index) {
  std::uint64_t h = seed.root_seed;
  h = mix64(h + kGolden * (seed.stream_index + 1));
  h = mix64(h + kGolden * (index + 1));
  return h;
}

inline Engine engine_for(const SeedSpec& seed, std::uint64_t index) {
  return Engine(derive_state(seed, index));
}

// Uniform on [0,1).
inline double u01(Engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform on (0,1): never returns an exact endpoint, safe under log().
inline double u01_open(Engine& g) {
  return (static_cast<double>(g() >> 12) + 0.5) * 0x1.0p-52;
}

// Box-Muller. One value per call; no state carried between calls.
inline double normal(Engine& g) {
  double u1 = u01_open(g);
  double u2 = u01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

// Mean-1 exponential.
inline double exponential(Engine& g) { return -std::log(u01_open(g)); }

// exp(sigma Z - sigma^2/2): unit mean by construction.
inline double lognormal_unit(Engine& g, double sigma) {
  return std::exp(sigma * normal(g) - 0.5 * sigma * sigma);
}

// log of a Gamma(shape, 1) draw. Marsaglia-Tsang for shape >= 1; for
// shape < 1 the standard boost Gamma(shape) = Gamma(shape+1) * U^(1/shape)
// is applied in log space so tiny shapes (Beta(0.02, ...) tails) cannot
// underflow to -inf.
inline double log_gamma_draw(Engine& g, double shape) {
  double boost = 0.0;
  if (shape < 1.0) {
    boost = std::log(u01_open(g)) / shape;
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal(g);
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = u01_open(g);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return std::log(d * v) + boost;
    }
  }
}

// Beta(a,b) via two gammas, assembled on the log scale and clamped away from
// the boundary so downstream densities stay finite.
inline double beta_draw(Engine& g, double a, double b) {
  double lx = log_gamma_draw(g, a);
  double ly = log_gamma_draw(g, b);
  double p;
  if (lx >= ly) {
    p = 1.0 / (1.0 + std::exp(ly - lx));
  } else {
    double r = std::exp(lx - ly);
    p = r / (1.0 + r);
  }
  const double lo = std::numeric_limits<double>::denorm_min();
  const double hi = 1.0 - 0x1.0p-53;
  if (p < lo) p = lo;
  if (p > hi) p = hi;
  return p;
}

}  // namespace rng
}  // namespace inferlab
