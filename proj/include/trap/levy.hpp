#pragma once

// Limit objects of the clock: the generalised arcsine law, the truncated depth
// law sigma on [eps, M], the jump law s = e * sigma, Laplace exponents and the
// probability that a compound-Poisson range avoids an interval.

#include <cstdint>

#include "trap/rng.hpp"

namespace trap {

struct LevyParams {
  double alpha = 0.5;
  double eps = 1e-3;
  double M = 1e3;

  /// eps^-alpha - M^-alpha: total mass of the truncated Levy measure.
  double p() const;
  void validate() const;
};

/// Regularized incomplete beta I_z(a, b) by continued fraction.
double incomplete_beta(double a, double b, double z);

/// Asl_alpha(z) = (sin(alpha pi) / pi) int_0^z u^(alpha-1) (1-u)^-alpha du.
double asl(double alpha, double z);

/// P[sigma <= u] = (eps^-alpha - u^-alpha) / p, clamped outside [eps, M].
double sigma_cdf(const LevyParams& params, double u);
double sigma_quantile(const LevyParams& params, double q);
double sample_sigma(const LevyParams& params, Stream& rand);
/// e * sigma with e ~ Exp(1) independent.
double sample_s_infinity(const LevyParams& params, Stream& rand);
/// E[sigma] in closed form.
double sigma_mean(const LevyParams& params);

/// psi(lambda) = int (1 - e^{-lambda v}) nu(dv), nu the truncated Levy measure
/// with density int_eps^M alpha z^{-alpha-2} e^{-v/z} dz. The v-integral is
/// done in closed form, leaving int_eps^M alpha lambda z^-alpha / (1 + lambda z) dz.
double laplace_exponent(const LevyParams& params, double lambda);

/// Gamma(1+alpha) Gamma(1-alpha) lambda^alpha.
double stable_exponent(double alpha, double lambda);

struct AvoidanceEstimate {
  double estimate = 0;
  double stderr_ = 0;
  std::uint64_t reps = 0;
};

/// Fraction of replicas whose partial sums of i.i.d. s-jumps jump over [a, b]
/// without landing in it. The range of a compound-Poisson process does not
/// depend on its jump times, so the jump sequence is simulated directly.
AvoidanceEstimate range_avoidance(const LevyParams& params, double a, double b,
                                  std::uint64_t reps, std::uint64_t seed, unsigned workers = 0);

/// Probability that the compound-Poisson clock (rate p, jumps s) exceeds
/// `level` by time m, by Monte Carlo.
double clock_exceeds(const LevyParams& params, double m, double level, std::uint64_t reps,
                     std::uint64_t seed);

/// Smallest m in {1, 2, 4, ..., 1024} with clock_exceeds(m, 1 + theta) >= prob.
double horizon_multiplier(const LevyParams& params, double theta, double prob,
                          std::uint64_t reps, std::uint64_t seed);

}  // namespace trap
