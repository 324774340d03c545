#include "trap/levy.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "trap/parallel.hpp"

namespace trap {

namespace {

/// Modified Lentz evaluation of the continued fraction of I_z(a, b).
double beta_fraction(double a, double b, double z) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1;
  const double qam = a - 1;
  double c = 1;
  double d = 1 - qab * z / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * z / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * z / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1) < eps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double LevyParams::p() const { return std::pow(eps, -alpha) - std::pow(M, -alpha); }

void LevyParams::validate() const {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("levy alpha must be in (0, 1)");
  if (!(eps > 0 && M > eps && std::isfinite(M))) throw std::invalid_argument("levy window needs 0 < eps < M");
}

double incomplete_beta(double a, double b, double z) {
  if (!(a > 0 && b > 0)) throw std::invalid_argument("incomplete_beta needs a, b > 0");
  if (!(z >= 0 && z <= 1)) throw std::invalid_argument("incomplete_beta needs z in [0, 1]");
  if (z == 0) return 0;
  if (z == 1) return 1;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(z) +
                           b * std::log1p(-z);
  const double front = std::exp(log_front);
  if (z < (a + 1) / (a + b + 2)) return front * beta_fraction(a, b, z) / a;
  return 1 - front * beta_fraction(b, a, 1 - z) / b;
}

double asl(double alpha, double z) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("asl needs alpha in (0, 1)");
  if (!(z >= 0 && z <= 1)) throw std::invalid_argument("asl needs z in [0, 1]");
  if (z == 0) return 0;
  if (z == 1) return 1;
  // B(alpha, 1-alpha) = pi / sin(alpha pi), so the prefactor is exact.
  const double a = alpha;
  const double b = 1 - alpha;
  const double front = std::exp(a * std::log(z) + b * std::log1p(-z)) * std::sin(alpha * std::numbers::pi) /
                       std::numbers::pi;
  if (z < (a + 1) / 3.0) return front * beta_fraction(a, b, z) / a;
  return 1 - front * beta_fraction(b, a, 1 - z) / b;
}

double sigma_cdf(const LevyParams& params, double u) {
  params.validate();
  if (u <= params.eps) return 0;
  if (u >= params.M) return 1;
  return (std::pow(params.eps, -params.alpha) - std::pow(u, -params.alpha)) / params.p();
}

double sigma_quantile(const LevyParams& params, double q) {
  const double x = std::pow(params.eps, -params.alpha) - q * params.p();
  return std::pow(x, -1.0 / params.alpha);
}

double sample_sigma(const LevyParams& params, Stream& rand) {
  return sigma_quantile(params, rand.uniform());
}

double sample_s_infinity(const LevyParams& params, Stream& rand) {
  const double e = rand.exponential();
  return e * sample_sigma(params, rand);
}

double sigma_mean(const LevyParams& params) {
  // int_eps^M u * alpha u^{-alpha-1} du / p
  const double a = params.alpha;
  return a * (std::pow(params.M, 1 - a) - std::pow(params.eps, 1 - a)) / ((1 - a) * params.p());
}

double laplace_exponent(const LevyParams& params, double lambda) {
  params.validate();
  if (!(lambda >= 0)) throw std::invalid_argument("laplace_exponent needs lambda >= 0");
  if (lambda == 0) return 0;
  const double a = params.alpha;
  // z = e^y: alpha lambda e^{(1-alpha) y} / (1 + lambda e^y) dy.
  auto integrand = [&](double y) {
    const double z = std::exp(y);
    return a * lambda * std::exp((1 - a) * y) / (1 + lambda * z);
  };
  double error = 0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, std::log(params.eps), std::log(params.M), 20, 1e-14, &error);
  return value;
}

double stable_exponent(double alpha, double lambda) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("stable_exponent needs alpha in (0, 1)");
  if (!(lambda >= 0)) throw std::invalid_argument("stable_exponent needs lambda >= 0");
  if (lambda == 0) return 0;
  return std::tgamma(1 + alpha) * std::tgamma(1 - alpha) * std::pow(lambda, alpha);
}

AvoidanceEstimate range_avoidance(const LevyParams& params, double a, double b,
                                  std::uint64_t reps, std::uint64_t seed, unsigned workers) {
  params.validate();
  if (!(a > 0 && b >= a)) throw std::invalid_argument("range_avoidance needs 0 < a <= b");
  if (reps < 1) throw std::invalid_argument("range_avoidance needs reps >= 1");
  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (reps + kChunk - 1) / kChunk;
  std::vector<std::uint64_t> misses(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::uint64_t end = std::min<std::uint64_t>(reps, (c + 1) * kChunk);
    std::uint64_t count = 0;
    for (std::uint64_t k = c * kChunk; k < end; ++k) {
      Stream rand(derive_key(seed, k));
      double sum = 0;
      // Jump until the partial sums reach a; the replica misses [a, b]
      // exactly when that jump also clears b.
      while (sum < a) sum += sample_s_infinity(params, rand);
      count += sum > b;
    }
    misses[c] = count;
  });
  std::uint64_t total = 0;
  for (auto m : misses) total += m;
  AvoidanceEstimate est;
  est.reps = reps;
  est.estimate = static_cast<double>(total) / static_cast<double>(reps);
  est.stderr_ = std::sqrt(est.estimate * (1 - est.estimate) / static_cast<double>(reps));
  return est;
}

double clock_exceeds(const LevyParams& params, double m, double level, std::uint64_t reps,
                     std::uint64_t seed) {
  params.validate();
  const double rate = params.p();
  std::uint64_t count = 0;
  for (std::uint64_t k = 0; k < reps; ++k) {
    Stream rand(derive_key(seed, k));
    double time = rand.exponential() / rate;
    double sum = 0;
    while (time <= m && sum < level) {
      sum += sample_s_infinity(params, rand);
      time += rand.exponential() / rate;
    }
    count += sum >= level;
  }
  return static_cast<double>(count) / static_cast<double>(reps);
}

double horizon_multiplier(const LevyParams& params, double theta, double prob,
                          std::uint64_t reps, std::uint64_t seed) {
  for (double m = 1; m <= 1024; m *= 2) {
    if (clock_exceeds(params, m, 1 + theta, reps, seed) >= prob) return m;
  }
  return 1024;
}

}  // namespace trap
