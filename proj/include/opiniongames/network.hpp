#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "opiniongames/errors.hpp"

namespace opg {

/// Directed influence edge: j's opinion enters i's disagreement cost with
/// weight `weight`. Agent ids are 1-based, matching the config document.
struct Edge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// Weighted directed social network with per-agent stubbornness.
/// Missing (i,j) pairs are weight 0 by convention, never an error.
struct NetworkSpec {
  int n = 0;
  std::vector<Edge> edges;
  std::vector<double> stubbornness;  // k_i, size n
  std::optional<int> leader_id;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Block matrices of the stacked opinion/multiplier linear system
///   dX = K_hat X0 ds + A X ds + Sigma_hat dB,   X = [x; lambda].
struct SystemMatrices {
  Eigen::MatrixXd A;          // 2n x 2n, blocks [mu, -I; -W, 0]
  Eigen::MatrixXd K_hat;      // 2n x 2n, blocks [0, 0; K, 0]
  Eigen::MatrixXd Sigma_hat;  // 2n x m, lower block identically zero
  Eigen::MatrixXd W;          // n x n influence matrix
  Eigen::VectorXd q;          // diagonal of W
};

/// Lists every violated invariant; empty report iff the spec is well-formed.
/// Diagnostic only: callers decide whether to abort.
ValidationReport validate_network(const NetworkSpec& spec);

/// W[i][i] = sum of outgoing weights + k_i, W[i][j] = -w_ij, 0 elsewhere.
/// Throws ErrorKind::Config when validate_network reports violations.
Eigen::MatrixXd build_influence_matrix(const NetworkSpec& spec);

/// Assembles A, K_hat, Sigma_hat from the network and the caller's drift and
/// diffusion blocks. Throws ErrorKind::DimensionMismatch naming the offending
/// block when shapes disagree.
SystemMatrices stack_system_matrices(const NetworkSpec& spec,
                                     const Eigen::MatrixXd& mu,
                                     const Eigen::MatrixXd& sigma);

}  // namespace opg
