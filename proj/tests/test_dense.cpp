#include <doctest.h>

#include <cmath>
#include <vector>

#include "trap/dense_oracle.hpp"
#include "trap/dynamics.hpp"
#include "trap/simd/dispatch.hpp"

using namespace trap;

namespace {

std::vector<double> depths(const Topology& g, const Landscape& land) {
  std::vector<double> tau(g.vertex_count());
  for (VertexId v = 0; v < tau.size(); ++v) tau[v] = land.tau(v);
  return tau;
}

}  // namespace

TEST_CASE("two-state chain") {
  const DenseChain chain(Topology::complete(2), {1.0, 1.0});
  CHECK(chain.two_time(0, 1, 1) == doctest::Approx((1 + std::exp(-2.0)) / 2).epsilon(1e-13));
  const double a = 2, b = 5;
  const DenseChain skew(Topology::complete(2), {a, b});
  // P[X(t) = 0 | X(0) = 0] for rates 1/a (0 -> 1) and 1/b (1 -> 0).
  const double k = 1 / a + 1 / b;
  for (double t : {0.3, 1.0, 4.0}) {
    const double exact = (1 / b) / k + (1 / a) / k * std::exp(-k * t);
    CHECK(skew.transition(t)(0, 0) == doctest::Approx(exact).epsilon(1e-12));
  }
  CHECK_THROWS(DenseChain(Topology::hypercube(11), std::vector<double>(2048, 1.0)));
}

TEST_CASE("transition matrix is stochastic and matches the generator") {
  const auto g = Topology::torus2d(2);
  const DenseChain chain(g, depths(g, Landscape::pareto(0.5, 3)));
  const auto P = chain.transition(0.7);
  for (Eigen::Index i = 0; i < P.rows(); ++i) CHECK(P.row(i).sum() == doctest::Approx(1).epsilon(1e-12));
  CHECK(P.minCoeff() > -1e-14);
  // Semigroup and the small-time derivative.
  CHECK((chain.transition(0.3) * chain.transition(0.4) - P).cwiseAbs().maxCoeff() < 1e-12);
  const double h = 1e-6;
  const Eigen::MatrixXd deriv = (chain.transition(h) - chain.transition(0)) / h;
  CHECK((deriv - chain.generator()).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("green row sums equal expected hitting steps") {
  const auto g = Topology::hypercube(6);
  const DenseChain chain(g, std::vector<double>(64, 1.0));
  const std::vector<VertexId> target{0, 63, 21};
  const auto G = chain.green(target);
  const auto h = chain.expected_hitting_steps(target);
  for (Eigen::Index x = 0; x < 64; ++x) CHECK(G.row(x).sum() == doctest::Approx(h(x)).epsilon(1e-11));
  CHECK(h(0) == 0);
}

TEST_CASE("Monte Carlo two-time function matches the exact chain") {
  struct Case {
    Topology topology;
    Landscape land;
    double t_w;
    double t;
  };
  const std::vector<Case> cases{
      {Topology::complete(2), Landscape::pareto(0.5, 1), 1.0, 1.0},
      {Topology::torus2d(2), Landscape::pareto(0.5, 2), 20.0, 20.0},
      {Topology::hypercube(5), Landscape::pareto(0.7, 3), 10.0, 30.0},
      {Topology::complete(30), Landscape::pareto(0.6, 4), 15.0, 15.0},
  };
  for (const auto& c : cases) {
    const DenseChain chain(c.topology, depths(c.topology, c.land));
    const double exact = chain.two_time(0, c.t_w, c.t);
    const auto model = simd::make_walk_model(c.topology, c.land);
    std::vector<std::uint64_t> keys(200000);
    for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = derive_key(77, i);
    std::vector<simd::TwoTimeResult> out(keys.size());
    simd::two_time_batch(simd::active_backend(), model, keys, {}, c.t_w, c.t_w + c.t, 0, out);
    double hits = 0;
    for (const auto& r : out) hits += r.at_first == r.at_second;
    const double p = hits / keys.size();
    CHECK(std::fabs(p - exact) < 3.5 * std::sqrt(exact * (1 - exact) / keys.size()));
  }
}
