#pragma once

// Random depth fields, model scales and deep-trap classification.
//
// A landscape is lazy: tau(v) hashes (seed, v) to a uniform variate and maps
// it through the inverse CDF of the depth law, so the field is never stored
// and every thread sees the same value for the same vertex.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trap/graph.hpp"
#include "trap/rng.hpp"

namespace trap {

enum class DepthLaw { pareto, rem };

class Landscape {
 public:
  /// P[tau >= u] = u^-alpha for u >= 1, alpha in (0, 1).
  static Landscape pareto(double alpha, std::uint64_t seed);
  /// tau = exp(beta * E), E ~ Normal(0, n). beta = 0 gives tau == 1.
  static Landscape rem(double beta, unsigned n, std::uint64_t seed);
  /// "pareto:alpha=0.5" or "rem:beta=1.2,n=20".
  static Landscape parse(std::string_view text, std::uint64_t seed);
  std::string to_string() const;

  DepthLaw law() const { return law_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  unsigned rem_n() const { return rem_n_; }
  std::uint64_t seed() const { return seed_; }
  /// Hash key of the field; tau(v) is a function of (key, v) only.
  std::uint64_t key() const { return key_; }
  /// Constant factor applied to every depth (1 unless rescaled).
  double scale() const { return scale_; }

  Landscape with_seed(std::uint64_t seed) const;
  /// Same field with every depth multiplied by c.
  Landscape scaled(double c) const;

  double tau(VertexId v) const { return tau_from_uniform(unit_open(draw(key_, v))); }
  double tau_from_uniform(double u) const {
    return scale_ * (law_ == DepthLaw::pareto ? pareto_depth(u) : rem_depth(u));
  }
  /// REM depth for a given energy.
  double tau_from_energy(double energy) const;

  /// Exact P[tau >= u].
  double tail(double u) const;

  // Constants exposed for the vector kernels.
  bool alpha_is_half() const { return alpha_ == 0.5; }
  double neg_inv_alpha() const { return -1.0 / alpha_; }
  /// beta * sqrt(n): tau = exp(rem_sigma * Phi^-1(U)).
  double rem_sigma() const { return rem_sigma_; }

 private:
  Landscape() = default;
  double pareto_depth(double u) const {
    if (alpha_ == 0.5) return 1.0 / (u * u);
    return simd::ref::exp(simd::ref::log(u) * neg_inv_alpha());
  }
  double rem_depth(double u) const {
    return simd::ref::exp(rem_sigma_ * simd::ref::normal_quantile(u));
  }

  DepthLaw law_ = DepthLaw::pareto;
  double alpha_ = 0.5;
  double beta_ = 0;
  unsigned rem_n_ = 0;
  double rem_sigma_ = 0;
  double scale_ = 1.0;
  std::uint64_t seed_ = 0;
  std::uint64_t key_ = 0;
};

/// Hash key used for the depth field generated from a seed.
std::uint64_t environment_key(std::uint64_t seed);

struct ScaleSet {
  double t = 0;    // observation time
  double g = 0;    // depth
  double rho = 0;  // density of deep traps
  double r = 0;    // number of steps
  double f = 0;    // Green-function scale, t / g
  double xi = 0;   // walk horizon m * r
  double m = 0;    // horizon multiplier
};

enum class ScaleModel { rem, torus, complete };

/// Hypercube REM scales for depth exponent alpha and inverse temperature beta.
ScaleSet rem_scales(unsigned n, double alpha, double beta, double m);
/// Torus scales with L = 2^n.
ScaleSet torus_scales(unsigned n, double alpha, double gamma, double m);
/// Complete graph on N vertices: rho = N^-1/2, r = N^1/2, g = t = N^(1/(2 alpha)), f = 1.
ScaleSet complete_scales(std::uint64_t vertices, double alpha, double m);

/// alpha^2 beta^2 / (2 log 2); REM aging needs it inside (3/4, 1).
double rem_window_ratio(double alpha, double beta);
bool rem_window_ok(double alpha, double beta);
/// beta giving the requested window ratio.
double rem_beta_for_ratio(double alpha, double ratio);
/// Torus results need gamma in (0, 1/6).
bool torus_gamma_ok(double gamma);

struct TrapWindow {
  double eps = 0.1;
  double M = 10.0;
};
void validate(const TrapWindow& w);

enum class TrapClass { shallow, deep, very_deep };

/// shallow: tau < eps g; deep: eps g <= tau < M g; very deep: tau >= M g.
inline TrapClass classify(double tau, const TrapWindow& w, double g) {
  if (tau < w.eps * g) return TrapClass::shallow;
  if (tau < w.M * g) return TrapClass::deep;
  return TrapClass::very_deep;
}

/// Membership test for the deep set of one environment.
struct DeepSet {
  Landscape landscape;
  TrapWindow window;
  double g = 1;
  bool contains(VertexId v) const {
    return classify(landscape.tau(v), window, g) == TrapClass::deep;
  }
};

/// Site percolation: each vertex is a member with probability density,
/// decided by hashing (key, v).
struct PoissonCloud {
  std::uint64_t key = 0;
  double density = 0;
  bool contains(VertexId v) const { return unit_open(draw(key, v)) < density; }
};

/// All members of a cloud, by scanning every vertex. Only for graphs of at
/// most 2^32 vertices.
std::vector<VertexId> cloud_members(const Topology& topology, const PoissonCloud& cloud);

/// I(x) = x log x + (1-x) log(1-x) + log 2, with 0 log 0 = 0.
double rate_function(double x);
/// The omega in [0, 1/2] with I(omega) = level, level in (0, log 2].
double omega_root(double level);

struct DistanceAudit {
  double min_distance = 0;  // +inf for fewer than two points
  bool pass = true;
};
DistanceAudit min_distance_audit(const Topology& topology, std::span<const VertexId> cloud,
                                 double bound);

/// Empirical r(n) * P[tau >= u g(n)] for u = 1, 2, 4 from `samples` hashed
/// REM depths. Tends to u^-alpha as n grows.
std::array<double, 3> rem_tail_check(double alpha, double beta, unsigned n, std::uint64_t samples,
                                     std::uint64_t seed);

}  // namespace trap
