#include "trap/dense_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace trap {

namespace {

std::vector<char> membership(std::size_t n, const std::vector<VertexId>& target) {
  std::vector<char> in(n, 0);
  for (VertexId v : target) {
    if (v >= n) throw std::invalid_argument("DenseChain: target vertex out of range");
    in[v] = 1;
  }
  return in;
}

}  // namespace

DenseChain::DenseChain(const Topology& topology, std::vector<double> tau) : tau_(std::move(tau)) {
  const std::uint64_t n = topology.vertex_count();
  if (n > kMaxStates) throw std::invalid_argument("DenseChain: at most 1024 states");
  if (tau_.size() != n) throw std::invalid_argument("DenseChain: tau must have one entry per vertex");
  for (double t : tau_) {
    if (!(t > 0)) throw std::invalid_argument("DenseChain: tau must be positive");
  }
  const auto N = static_cast<Eigen::Index>(n);
  P_ = Eigen::MatrixXd::Zero(N, N);
  const double w = 1.0 / static_cast<double>(topology.degree());
  for (VertexId x = 0; x < n; ++x) {
    switch (topology.family()) {
      case Family::complete:
        for (VertexId y = 0; y < n; ++y) {
          if (y != x) P_(x, y) = w;
        }
        break;
      case Family::hypercube:
        for (unsigned i = 0; i < topology.size(); ++i) P_(x, x ^ (VertexId{1} << i)) += w;
        break;
      case Family::torus2d:
        for (std::uint64_t d = 0; d < 4; ++d) P_(x, topology.torus_step(x, d)) += w;
        break;
    }
  }
  // D^{1/2} Q D^{-1/2} = D^{-1/2} (P - I) D^{-1/2} is symmetric because P is.
  Eigen::VectorXd inv_sqrt(N);
  for (Eigen::Index i = 0; i < N; ++i) inv_sqrt(i) = 1.0 / std::sqrt(tau_[i]);
  Eigen::MatrixXd sym = inv_sqrt.asDiagonal() * (P_ - Eigen::MatrixXd::Identity(N, N)) * inv_sqrt.asDiagonal();
  sym = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("DenseChain: eigensolver failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

Eigen::MatrixXd DenseChain::generator() const {
  const auto N = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd Q = P_ - Eigen::MatrixXd::Identity(N, N);
  for (Eigen::Index i = 0; i < N; ++i) Q.row(i) /= tau_[i];
  return Q;
}

Eigen::MatrixXd DenseChain::transition(double t) const {
  if (!(t >= 0)) throw std::invalid_argument("DenseChain::transition needs t >= 0");
  const auto N = static_cast<Eigen::Index>(size());
  Eigen::VectorXd sq(N), isq(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    sq(i) = std::sqrt(tau_[i]);
    isq(i) = 1.0 / sq(i);
  }
  const Eigen::VectorXd decay = (eigenvalues_ * t).array().exp();
  const Eigen::MatrixXd sym = eigenvectors_ * decay.asDiagonal() * eigenvectors_.transpose();
  // Q = D^{1/2} S D^{-1/2} with D = diag(1 / tau), so exp(Q t) = D^{1/2} exp(S t) D^{-1/2}.
  return isq.asDiagonal() * sym * sq.asDiagonal();
}

double DenseChain::two_time(VertexId start, double t_w, double t) const {
  if (start >= size()) throw std::invalid_argument("DenseChain::two_time: start out of range");
  const Eigen::MatrixXd first = transition(t_w);
  const Eigen::MatrixXd second = transition(t);
  double acc = 0;
  for (Eigen::Index x = 0; x < static_cast<Eigen::Index>(size()); ++x) {
    acc += first(static_cast<Eigen::Index>(start), x) * second(x, x);
  }
  return acc;
}

Eigen::VectorXd DenseChain::hitting_transform(const std::vector<VertexId>& target, double lambda) const {
  const auto N = static_cast<Eigen::Index>(size());
  const auto in = membership(size(), target);
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (!in[i]) free.push_back(i);
  }
  const auto F = static_cast<Eigen::Index>(free.size());
  const double a = std::exp(-lambda);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(F, F);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(F);
  for (Eigen::Index r = 0; r < F; ++r) {
    for (Eigen::Index y = 0; y < N; ++y) {
      const double p = P_(free[r], y);
      if (p == 0) continue;
      if (in[y]) b(r) += a * p;
    }
    for (Eigen::Index c = 0; c < F; ++c) A(r, c) -= a * P_(free[r], free[c]);
  }
  const Eigen::VectorXd u = A.partialPivLu().solve(b);
  Eigen::VectorXd out = Eigen::VectorXd::Ones(N);
  for (Eigen::Index r = 0; r < F; ++r) out(free[r]) = u(r);
  return out;
}

Eigen::MatrixXd DenseChain::green(const std::vector<VertexId>& target) const {
  const auto N = static_cast<Eigen::Index>(size());
  const auto in = membership(size(), target);
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (!in[i]) free.push_back(i);
  }
  const auto F = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(F, F);
  for (Eigen::Index r = 0; r < F; ++r) {
    for (Eigen::Index c = 0; c < F; ++c) A(r, c) -= P_(free[r], free[c]);
  }
  const Eigen::MatrixXd inv = A.partialPivLu().inverse();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index r = 0; r < F; ++r) {
    for (Eigen::Index c = 0; c < F; ++c) out(free[r], free[c]) = inv(r, c);
  }
  return out;
}

Eigen::VectorXd DenseChain::expected_hitting_steps(const std::vector<VertexId>& target) const {
  const auto N = static_cast<Eigen::Index>(size());
  const auto in = membership(size(), target);
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (!in[i]) free.push_back(i);
  }
  const auto F = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(F, F);
  for (Eigen::Index r = 0; r < F; ++r) {
    for (Eigen::Index c = 0; c < F; ++c) A(r, c) -= P_(free[r], free[c]);
  }
  const Eigen::VectorXd h = A.partialPivLu().solve(Eigen::VectorXd::Ones(F));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(N);
  for (Eigen::Index r = 0; r < F; ++r) out(free[r]) = h(r);
  return out;
}

Eigen::VectorXd DenseChain::smoothed_green(VertexId from, double decay) const {
  if (!(decay >= 0 && decay < 1)) throw std::invalid_argument("smoothed_green needs decay in [0, 1)");
  const auto N = static_cast<Eigen::Index>(size());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
  const Eigen::MatrixXd resolvent = (I - decay * P_).partialPivLu().inverse();
  const Eigen::MatrixXd smoothed = 0.5 * (I + P_) * resolvent;
  return smoothed.row(static_cast<Eigen::Index>(from)).transpose();
}

}  // namespace trap
