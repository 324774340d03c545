#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "trap/graph.hpp"
#include "trap/landscape.hpp"

using namespace trap;

TEST_CASE("pareto inverse cdf") {
  const auto half = Landscape::pareto(0.5, 1);
  CHECK(half.tau_from_uniform(0.25) == 16.0);
  const auto p = Landscape::pareto(0.8, 1);
  CHECK(p.tau_from_uniform(0.5) == doctest::Approx(std::pow(0.5, -1 / 0.8)).epsilon(1e-15));
  CHECK(Landscape::rem(1.0, 20, 1).tau_from_energy(0.0) == 1.0);
}

TEST_CASE("pareto tail frequencies") {
  for (double alpha : {0.5, 0.8}) {
    const auto land = Landscape::pareto(alpha, 77);
    const int n = 1000000;
    for (double u : {1.5, 10.0, 100.0}) {
      int over = 0;
      for (int v = 0; v < n; ++v) over += land.tau(v) >= u;
      const double p = std::pow(u, -alpha);
      CHECK(std::fabs(over - n * p) < 4 * std::sqrt(n * p * (1 - p)));
      CHECK(land.tail(u) == doctest::Approx(p).epsilon(1e-14));
    }
    for (int v = 0; v < 1000; ++v) CHECK(land.tau(v) >= 1.0);
  }
}

TEST_CASE("depths are a pure function of seed and vertex") {
  const auto a = Landscape::pareto(0.6, 5);
  const auto b = Landscape::pareto(0.6, 5);
  const auto c = Landscape::pareto(0.6, 6);
  int differ = 0;
  for (VertexId v = 0; v < 1000; ++v) {
    CHECK(a.tau(v) == b.tau(v));
    differ += a.tau(v) != c.tau(v);
  }
  CHECK(differ == 1000);
  CHECK(a.with_seed(6).tau(17) == c.tau(17));
  CHECK(a.scaled(4.0).tau(17) == 4.0 * a.tau(17));
}

TEST_CASE("landscape parse round-trip") {
  const auto p = Landscape::parse("pareto:alpha=0.6", 3);
  CHECK(p.law() == DepthLaw::pareto);
  CHECK(p.alpha() == 0.6);
  CHECK(Landscape::parse(p.to_string(), 3).tau(9) == p.tau(9));
  const auto r = Landscape::parse("rem:beta=1.25,n=16", 3);
  CHECK(r.law() == DepthLaw::rem);
  CHECK(r.beta() == 1.25);
  CHECK(r.rem_n() == 16);
  CHECK(Landscape::parse(r.to_string(), 3).tau(9) == r.tau(9));
  CHECK_THROWS(Landscape::parse("pareto:alpha=1.5", 1));
  CHECK_THROWS(Landscape::parse("pareto:beta=0.5", 1));
  CHECK_THROWS(Landscape::parse("gauss:alpha=0.5", 1));
  CHECK_THROWS(Landscape::parse("rem:beta=1", 1));
}

TEST_CASE("torus scale identities") {
  const auto s = torus_scales(8, 0.5, 0.1, 4);
  CHECK(s.f == doctest::Approx(8).epsilon(1e-12));
  CHECK(s.t / s.g == doctest::Approx(s.f).epsilon(1e-12));
  CHECK(s.rho * s.r == doctest::Approx(s.f).epsilon(1e-12));
  CHECK(s.xi == doctest::Approx(4 * s.r).epsilon(1e-15));
  CHECK(s.t == doctest::Approx(std::pow(2.0, 32) * std::pow(8.0, 1 - 0.2)).epsilon(1e-12));
  CHECK(s.rho == doctest::Approx(std::pow(s.g, -0.5)).epsilon(1e-12));
  // Condition (A) holds exactly for a Pareto field: rho^-1 P[tau >= u g] = u^-alpha.
  const auto land = Landscape::pareto(0.5, 1);
  for (double u : {0.5, 1.0, 3.0}) {
    CHECK(land.tail(u * s.g) / s.rho == doctest::Approx(std::pow(u, -0.5)).epsilon(1e-12));
  }
}

TEST_CASE("rem scales") {
  const double alpha = 0.8;
  const double beta = rem_beta_for_ratio(alpha, 0.8);
  CHECK(rem_window_ratio(alpha, beta) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(rem_window_ok(alpha, beta));
  CHECK_FALSE(rem_window_ok(alpha, rem_beta_for_ratio(alpha, 0.7)));
  const auto s = rem_scales(20, alpha, beta, 2);
  CHECK(s.r == doctest::Approx(std::exp(0.8 * std::log(2.0) * 20)).epsilon(1e-12));
  CHECK(s.r == doctest::Approx(6.5536e4).epsilon(1e-3));
  CHECK(s.rho * s.r == doctest::Approx(1).epsilon(1e-12));
  CHECK(s.t == s.g);
  CHECK(s.f == 1.0);
  const double g = std::pow(alpha * beta * std::sqrt(2 * std::numbers::pi * 20), -1 / alpha) *
                   std::exp(alpha * beta * beta * 20);
  CHECK(s.g == doctest::Approx(g).epsilon(1e-12));
  CHECK_THROWS(rem_scales(2000, alpha, 5.0, 1));
}

TEST_CASE("complete-graph scales") {
  const auto s = complete_scales(100000, 0.6, 3);
  CHECK(s.rho == doctest::Approx(1 / std::sqrt(1e5)).epsilon(1e-14));
  CHECK(s.r == doctest::Approx(std::sqrt(1e5)).epsilon(1e-14));
  CHECK(s.g == doctest::Approx(std::pow(1e5, 1 / 1.2)).epsilon(1e-13));
  CHECK(s.t == s.g);
  CHECK(s.f == 1.0);
  // Pareto: rho^-1 P[tau >= g] = 1.
  CHECK(Landscape::pareto(0.6, 1).tail(s.g) / s.rho == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("classification boundaries are half-open") {
  const TrapWindow w{0.1, 10};
  const double g = 1000;
  CHECK(classify(w.eps * g, w, g) == TrapClass::deep);
  CHECK(classify(w.M * g, w, g) == TrapClass::very_deep);
  CHECK(classify(std::nextafter(w.eps * g, 0.0), w, g) == TrapClass::shallow);
  CHECK(classify(1, TrapWindow{0.1, 10}, 1e6) == TrapClass::shallow);
  CHECK_THROWS(validate(TrapWindow{1.5, 10}));
  CHECK_THROWS(validate(TrapWindow{0.1, 0.9}));
}

TEST_CASE("rate function and its root") {
  CHECK(rate_function(0.5) == doctest::Approx(0).scale(1));
  CHECK(std::fabs(rate_function(0.5)) < 1e-16);
  CHECK(rate_function(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(rate_function(1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const double level = (2 * 0.9 - 1) * std::log(2.0);
  const double w = omega_root(level);
  CHECK(w >= 0);
  CHECK(w <= 0.5);
  CHECK(std::fabs(rate_function(w) - level) < 1e-12);
  for (int i = 0; i <= 100; ++i) {
    const double x = 0.005 * i;
    if (rate_function(x) > 0) CHECK(std::fabs(omega_root(rate_function(x)) - x) < 1e-10);
  }
  // Convexity on a grid.
  for (int i = 1; i < 999; ++i) {
    const double h = 1e-3;
    const double x = i * h;
    CHECK(rate_function(x - h) + rate_function(x + h) - 2 * rate_function(x) >= -1e-15);
  }
  CHECK_THROWS(omega_root(0.0));
  CHECK_THROWS(omega_root(1.0));
}

TEST_CASE("minimal distance audit") {
  const auto h = Topology::hypercube(10);
  std::vector<VertexId> one{5};
  CHECK(min_distance_audit(h, one, 100).pass);
  CHECK(std::isinf(min_distance_audit(h, one, 100).min_distance));
  std::vector<VertexId> two{0, Topology::flipped_prefix(3)};
  const auto a = min_distance_audit(h, two, 3);
  CHECK(a.min_distance == 3);
  CHECK(a.pass);
  CHECK_FALSE(min_distance_audit(h, two, 4).pass);
}

TEST_CASE("hypercube Poisson clouds respect the minimal distance bound") {
  // gamma = 0.85 on the 20-cube: pairs closer than (omega' - delta) n are rare,
  // with omega' solving I(omega') = (2 gamma - 1) log 2.
  const unsigned n = 20;
  const double gamma = 0.85;
  const double omega = omega_root((2 * gamma - 1) * std::log(2.0));
  const double bound = (omega - 0.1) * n;
  const auto h = Topology::hypercube(n);
  int passes = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const PoissonCloud cloud{derive_key(trial, 99), std::exp2(-gamma * n)};
    const auto members = cloud_members(h, cloud);
    passes += min_distance_audit(h, members, bound).pass;
  }
  CHECK(passes >= 99);
}

TEST_CASE("rem tail check approaches u^-alpha") {
  const double alpha = 0.8;
  const double beta = rem_beta_for_ratio(alpha, 0.8);
  const boost::math::normal_distribution<double> normal;
  double previous_gap = std::numeric_limits<double>::infinity();
  for (unsigned n : {12u, 16u, 20u}) {
    const auto s = rem_scales(n, alpha, beta, 1);
    // Exact r P[beta sqrt(n) Z >= log(u g)].
    double exact_gap = 0;
    for (int k = 0; k < 3; ++k) {
      const double u = std::exp2(k);
      const double exact = s.r * cdf(complement(normal, std::log(u * s.g) / (beta * std::sqrt(n))));
      exact_gap = std::max(exact_gap, std::fabs(exact - std::pow(u, -alpha)));
    }
    CHECK(exact_gap < previous_gap);
    previous_gap = exact_gap;
    const auto est = rem_tail_check(alpha, beta, n, 4000000, 1);
    for (int k = 0; k < 3; ++k) {
      const double u = std::exp2(k);
      const double p = cdf(complement(normal, std::log(u * s.g) / (beta * std::sqrt(n))));
      const double sd = s.r * std::sqrt(p / 4e6);
      CHECK(std::fabs(est[k] - s.r * p) < 4 * sd);
    }
  }
  CHECK_THROWS(rem_tail_check(alpha, beta, 12, 1000, 1));
}
