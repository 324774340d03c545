#include "trap/potential.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace trap {

namespace {

/// Neumaier compensated summation.
struct CompensatedSum {
  long double sum = 0;
  long double carry = 0;
  long double abs_total = 0;
  void add(long double x) {
    const long double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) carry += (sum - t) + x;
    else carry += (x - t) + sum;
    sum = t;
    abs_total += std::fabs(x);
  }
  long double value() const { return sum + carry; }
};

std::uint64_t torus_gap(std::uint64_t a, std::uint64_t side) { return a < side - a ? a : side - a; }

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

long double green_weight(long double sin2_1, long double sin2_2, long double q) {
  // lambda = 1 - (sin^2 a + sin^2 b): (1 + lambda) / 2 over (1 - lambda) + lambda q.
  const long double one_minus = sin2_1 + sin2_2;
  const long double lambda = 1 - one_minus;
  return ((1 + lambda) / 2) / (one_minus + lambda * q);
}

}  // namespace

std::vector<long double> krawtchouk_row(unsigned n, unsigned k) {
  if (n > 62) throw std::invalid_argument("krawtchouk: n must be at most 62");
  if (k > n) throw std::invalid_argument("krawtchouk: k must be at most n");
  std::vector<long double> row(n + 1);
  __int128 prev = 1;                       // K_0
  __int128 cur = static_cast<__int128>(n) - 2 * static_cast<__int128>(k);  // K_1
  row[0] = 1;
  if (n >= 1) row[1] = static_cast<long double>(cur);
  for (unsigned i = 1; i < n; ++i) {
    // (i+1) K_{i+1} = (n - 2k) K_i - (n - i + 1) K_{i-1}; the division is exact.
    const __int128 next =
        ((static_cast<__int128>(n) - 2 * static_cast<__int128>(k)) * cur - static_cast<__int128>(n - i + 1) * prev) /
        static_cast<__int128>(i + 1);
    prev = cur;
    cur = next;
    row[i + 1] = static_cast<long double>(cur);
  }
  return row;
}

double krawtchouk(unsigned n, unsigned i, unsigned k) {
  if (i > n) throw std::invalid_argument("krawtchouk: i must be at most n");
  return static_cast<double>(krawtchouk_row(n, k)[i]);
}

double hypercube_hitting_lt(unsigned n, unsigned k, double s, double gamma) {
  if (n < 1 || n > 62) throw std::invalid_argument("hypercube_hitting_lt: n must be in [1, 62]");
  if (k > n) throw std::invalid_argument("hypercube_hitting_lt: k must be at most n");
  if (!(s >= 0)) throw std::invalid_argument("hypercube_hitting_lt: s must be nonnegative");
  if (s == 0 || k == 0) return 1.0;
  const long double lambda = static_cast<long double>(s) * std::exp2(-static_cast<long double>(gamma) * n);
  const long double a = std::exp(-lambda);
  const long double one_minus_a = -std::expm1(-lambda);
  const auto kraw = krawtchouk_row(n, k);
  CompensatedSum num, den;
  long double binom = 1;  // C(n, i)
  for (unsigned i = 0; i <= n; ++i) {
    const long double d = one_minus_a + a * (2.0L * i / n);
    num.add(kraw[i] / d);
    den.add(binom / d);
    binom = binom * (n - i) / (i + 1);
  }
  const long double value = num.value();
  constexpr long double kUnit = std::numeric_limits<long double>::epsilon();
  if (!(value > 0) || 8 * kUnit * num.abs_total > 1e-9L * std::fabs(value)) {
    throw std::domain_error("hypercube_hitting_lt: cancellation exceeds the precision budget");
  }
  return static_cast<double>(value / den.value());
}

MatthewsBounds matthews_bounds(double f_plus, double f_minus, double set_size) {
  if (!(f_minus > 0 && f_minus <= f_plus)) {
    throw std::invalid_argument("matthews_bounds needs 0 < f_minus <= f_plus");
  }
  if (!(f_plus < 1)) throw std::invalid_argument("matthews_bounds: degenerate transform f >= 1");
  if (!(set_size >= 2)) throw std::invalid_argument("matthews_bounds needs set_size >= 2");
  const double N = set_size;
  const double ip = 1 / f_plus;
  const double im = 1 / f_minus;
  const double common = std::lgamma(N) - std::lgamma(N - 1);
  MatthewsBounds b;
  b.lower = std::exp(std::lgamma(im) - std::lgamma(ip) + common + std::lgamma(N - 2 + ip) -
                     std::lgamma(N - 1 + im));
  b.upper = std::exp(std::lgamma(ip) - std::lgamma(im) + common + std::lgamma(N - 2 + im) -
                     std::lgamma(N - 1 + ip));
  return b;
}

double alternating_harmonic(unsigned n) {
  if (n < 1) throw std::invalid_argument("alternating_harmonic needs n >= 1");
  // (v^n - 1) / (1 - v) = -(1 - v^n) / (1 - v). Near v = 1 the quadrature
  // hands us 1 - v exactly as the complement argument.
  auto integrand = [n](double v, double vc) {
    const double one_minus_v = v > 0.5 ? vc : 1 - v;
    if (one_minus_v <= 0) return -static_cast<double>(n);
    const double one_minus_pow = -std::expm1(n * std::log1p(-one_minus_v));
    return -one_minus_pow / one_minus_v;
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(integrand, 0.0, 1.0, 1e-15);
}

double alternating_harmonic_direct(unsigned n) {
  if (n < 1) throw std::invalid_argument("alternating_harmonic needs n >= 1");
  long double binom = 1;
  long double sum = 0;
  for (unsigned i = 1; i <= n; ++i) {
    binom = binom * (n - i + 1) / i;
    sum += (i % 2 ? -binom : binom) / i;
  }
  return static_cast<double>(sum);
}

double torus_time_scale(unsigned n, double gamma) {
  return std::exp2(2.0 * n) * std::pow(static_cast<double>(n), 1 - gamma);
}

double torus_green(unsigned n, std::uint64_t x1, std::uint64_t x2, double s, double gamma) {
  if (n < 1 || n > 12) throw std::invalid_argument("torus_green: n must be in [1, 12]");
  if (!(s > 0)) throw std::invalid_argument("torus_green: s must be positive");
  const std::uint64_t L = std::uint64_t{1} << n;
  x1 %= L;
  x2 %= L;
  const long double q = -std::expm1(-static_cast<long double>(s) / torus_time_scale(n, gamma));
  std::vector<long double> sin2(L), cosx1(L), cosx2(L);
  const long double pi = std::numbers::pi_v<long double>;
  for (std::uint64_t t = 0; t < L; ++t) {
    const long double sn = std::sin(pi * t / L);
    sin2[t] = sn * sn;
    cosx1[t] = std::cos(2 * pi * static_cast<long double>((t * x1) % L) / L);
    cosx2[t] = std::cos(2 * pi * static_cast<long double>((t * x2) % L) / L);
  }
  CompensatedSum total;
  for (std::uint64_t a = 0; a < L; ++a) {
    long double row = 0;
    for (std::uint64_t b = 0; b < L; ++b) row += cosx2[b] * green_weight(sin2[a], sin2[b], q);
    total.add(cosx1[a] * row);
  }
  return static_cast<double>(total.value() / (static_cast<long double>(L) * L));
}

std::vector<double> torus_green_profile(unsigned n, double s, double gamma) {
  if (n < 1 || n > 12) throw std::invalid_argument("torus_green_profile: n must be in [1, 12]");
  if (!(s > 0)) throw std::invalid_argument("torus_green_profile: s must be positive");
  const std::size_t L = std::size_t{1} << n;
  const std::size_t half = L / 2 + 1;
  const long double q = -std::expm1(-static_cast<long double>(s) / torus_time_scale(n, gamma));
  std::vector<long double> sin2(L);
  for (std::size_t t = 0; t < L; ++t) {
    const long double sn = std::sin(std::numbers::pi_v<long double> * t / L);
    sin2[t] = sn * sn;
  }
  double* in = fftw_alloc_real(L * L);
  fftw_complex* out = fftw_alloc_complex(L * half);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_2d(static_cast<int>(L), static_cast<int>(L), in, out, FFTW_ESTIMATE);
  }
  // in[a * L + b] holds the weight of theta = (b, a), i.e. theta_1 = b.
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = 0; b < L; ++b) in[a * L + b] = static_cast<double>(green_weight(sin2[b], sin2[a], q));
  }
  fftw_execute(plan);
  const double norm = 1.0 / static_cast<double>(L * L);
  std::vector<double> g(L * L);
  // The weights are even in each coordinate, so the transform is real and
  // symmetric under x_1 -> L - x_1.
  for (std::size_t x2 = 0; x2 < L; ++x2) {
    for (std::size_t x1 = 0; x1 < half; ++x1) {
      const double v = out[x2 * half + x1][0] * norm;
      g[x1 + L * x2] = v;
      g[(L - x1) % L + L * x2] = v;
    }
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return g;
}

TorusHittingProfile torus_hitting_profile(unsigned n, double gamma, double s, double rho, double kappa) {
  if (kappa < 0) kappa = 2 + gamma;
  const auto g = torus_green_profile(n, s, gamma);
  const std::uint64_t L = std::uint64_t{1} << n;
  const double r_min = std::exp2(n) * std::pow(static_cast<double>(n), -kappa);
  TorusHittingProfile p;
  p.g0 = g[0];
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::uint64_t x2 = 0; x2 < L; ++x2) {
    for (std::uint64_t x1 = 0; x1 < L; ++x1) {
      const double d = static_cast<double>(torus_gap(x1, L) + torus_gap(x2, L));
      if (d < r_min) continue;
      const double ratio = g[x1 + L * x2] / p.g0;
      hi = std::max(hi, ratio);
      lo = std::min(lo, ratio);
    }
  }
  if (!(lo <= hi)) throw std::domain_error("torus_hitting_profile: no vertex beyond the minimal distance");
  p.f_plus = hi;
  p.f_minus = lo;
  p.set_size = rho * std::pow(static_cast<double>(n), gamma);
  p.sandwich = matthews_bounds(p.f_plus, p.f_minus, std::max(2.0, p.set_size));
  return p;
}

TorusConstantFit fit_torus_constant(unsigned n, double gamma, const std::vector<double>& s_grid,
                                    double rho, double kappa) {
  if (s_grid.size() < 2) throw std::invalid_argument("fit_torus_constant needs at least two s values");
  const double ng = std::pow(static_cast<double>(n), gamma);
  std::vector<double> yp, ym, mid;
  for (double s : s_grid) {
    const auto p = torus_hitting_profile(n, gamma, s, rho, kappa);
    yp.push_back(1 / (ng * p.f_plus));
    ym.push_back(1 / (ng * p.f_minus));
    // A Laplace transform never exceeds 1, which tightens a vacuous upper bound.
    mid.push_back(0.5 * (p.sandwich.lower + std::min(1.0, p.sandwich.upper)));
  }
  auto slope = [&](const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(s_grid.size());
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
      sx += s_grid[i];
      sy += y[i];
      sxx += s_grid[i] * s_grid[i];
      sxy += s_grid[i] * y[i];
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
  };
  TorusConstantFit fit;
  fit.k_r_plus = 1 / slope(yp);
  fit.k_r_minus = 1 / slope(ym);
  const double set_rho = rho;
  auto loss = [&](double log_k) {
    const double K = std::exp(log_k);
    double acc = 0;
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
      const double model = K * set_rho / (s_grid[i] + K * set_rho);
      acc += (mid[i] - model) * (mid[i] - model);
    }
    return acc;
  };
  const auto best = boost::math::tools::brent_find_minima(loss, std::log(1e-3), std::log(1e3), 40);
  fit.k_r_sandwich = std::exp(best.first);
  return fit;
}

}  // namespace trap
