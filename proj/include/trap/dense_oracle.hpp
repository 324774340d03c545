#pragma once

// Brute-force answers for small graphs (at most 1024 vertices) from the full
// generator, used to check the Monte Carlo and closed-form routines.

#include <Eigen/Dense>
#include <vector>

#include "trap/graph.hpp"

namespace trap {

class DenseChain {
 public:
  static constexpr std::uint64_t kMaxStates = 1024;

  /// tau[v] is the mean holding time at v.
  DenseChain(const Topology& topology, std::vector<double> tau);

  std::size_t size() const { return tau_.size(); }
  /// Jump matrix of the embedded walk, P(x, y) = 1 / deg for neighbors.
  const Eigen::MatrixXd& jump_matrix() const { return P_; }
  /// Generator Q(x, y) = (P(x, y) - delta_xy) / tau_x.
  Eigen::MatrixXd generator() const;

  /// Transition probabilities exp(Q t).
  Eigen::MatrixXd transition(double t) const;

  /// P[X(t_w + t) = X(t_w)] for X(0) = start.
  double two_time(VertexId start, double t_w, double t) const;

  /// E_x[exp(-lambda H(target))] for the embedded walk, for every x.
  Eigen::VectorXd hitting_transform(const std::vector<VertexId>& target, double lambda) const;

  /// Green function of the walk killed on `target`: G(x, y) = expected visits
  /// to y before H(target), indexed by vertex label (rows and columns of
  /// target vertices are zero).
  Eigen::MatrixXd green(const std::vector<VertexId>& target) const;

  /// E_x[H(target)] for every x.
  Eigen::VectorXd expected_hitting_steps(const std::vector<VertexId>& target) const;

  /// sum_k decay^k (P^k + P^{k+1}) / 2, row of `from`: the smoothed Green function.
  Eigen::VectorXd smoothed_green(VertexId from, double decay) const;

 private:
  std::vector<double> tau_;
  Eigen::MatrixXd P_;
  Eigen::VectorXd eigenvalues_;   // of the symmetrized generator
  Eigen::MatrixXd eigenvectors_;
};

}  // namespace trap
