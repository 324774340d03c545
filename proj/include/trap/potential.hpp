#pragma once

// Exact potential theory for the walks: hypercube hitting-time transforms via
// Krawtchouk sums, Matthews' Gamma-function sandwich, the alternating
// harmonic identity and torus Green functions via eigen-sums.

#include <cstdint>
#include <vector>

namespace trap {

/// K_i(k; n) = sum_j (-1)^j C(k, j) C(n-k, i-j), exact for n <= 62.
double krawtchouk(unsigned n, unsigned i, unsigned k);
/// K_0..K_n at fixed (n, k), exact integers stored as long double.
std::vector<long double> krawtchouk_row(unsigned n, unsigned k);

/// E_{z_k}[exp(-s 2^{-gamma n} H(0))] on the n-cube, where z_k is at Hamming
/// distance k from 0. s = 0 gives 1. Throws std::domain_error when the
/// alternating sum loses more than the 1e-9 relative precision budget.
double hypercube_hitting_lt(unsigned n, unsigned k, double s, double gamma);

struct MatthewsBounds {
  double lower = 0;
  double upper = 0;
};

/// Bounds on E_x[exp(-s H(A \ {x}) / 2^{gamma n})] for |A| = set_size from the
/// extreme pairwise transforms f_minus <= f_plus < 1.
MatthewsBounds matthews_bounds(double f_plus, double f_minus, double set_size);

/// sum_{i=1}^n (-1)^i C(n, i) / i via int_0^1 (v^n - 1) / (1 - v) dv.
double alternating_harmonic(unsigned n);
/// The same sum term by term (long double); accurate for n <= 25.
double alternating_harmonic_direct(unsigned n);

/// h(n) = 2^{2n} n^{1-gamma}.
double torus_time_scale(unsigned n, double gamma);

/// G(x; s) = L^-2 sum_theta cos(2 pi theta.x / L) ((1 + lambda_theta) / 2) /
/// (1 - e^{-s/h} lambda_theta) on the torus with L = 2^n.
double torus_green(unsigned n, std::uint64_t x1, std::uint64_t x2, double s, double gamma);

/// G(x; s) for every x, row-major (index x1 + L x2), by a 2-D FFT.
std::vector<double> torus_green_profile(unsigned n, double s, double gamma);

struct TorusHittingProfile {
  double g0 = 0;          // G(0; s)
  double f_plus = 0;      // sup of G(x)/G(0) over d(0, x) >= 2^n n^-kappa
  double f_minus = 0;     // inf of the same
  double set_size = 0;    // cloud size rho n^gamma
  MatthewsBounds sandwich;
};

TorusHittingProfile torus_hitting_profile(unsigned n, double gamma, double s, double rho = 10.0,
                                          double kappa = -1.0);

struct TorusConstantFit {
  double k_r_plus = 0;       // from the slope of 1 / (n^gamma f_plus) in s
  double k_r_minus = 0;      // from the slope of 1 / (n^gamma f_minus) in s
  double k_r_sandwich = 0;   // least-squares K in [1e-3, 1e3] with K rho / (s + K rho) through the
                             // sandwich midpoints, upper bound capped at 1
};

/// Implied hitting constant over an s-grid.
TorusConstantFit fit_torus_constant(unsigned n, double gamma, const std::vector<double>& s_grid,
                                    double rho = 10.0, double kappa = -1.0);

}  // namespace trap
