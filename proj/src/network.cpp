#include "opiniongames/network.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace opg {

ValidationReport validate_network(const NetworkSpec& spec) {
  ValidationReport report;
  auto add = [&report](const std::string& v) { report.violations.push_back(v); };

  if (spec.n < 2) {
    std::ostringstream msg;
    msg << "agent count n=" << spec.n << " must be >= 2";
    add(msg.str());
  }
  if (static_cast<int>(spec.stubbornness.size()) != spec.n) {
    std::ostringstream msg;
    msg << "stubbornness list has " << spec.stubbornness.size()
        << " entries, expected n=" << spec.n;
    add(msg.str());
  }
  for (std::size_t i = 0; i < spec.stubbornness.size(); ++i) {
    const double k = spec.stubbornness[i];
    if (!std::isfinite(k) || k < 0.0) {
      std::ostringstream msg;
      msg << "negative or non-finite stubbornness k[" << i + 1 << "]=" << k;
      add(msg.str());
    }
  }

  std::set<std::pair<int, int>> seen;
  for (std::size_t e = 0; e < spec.edges.size(); ++e) {
    const Edge& edge = spec.edges[e];
    std::ostringstream where;
    where << "edge[" << e << "]=(" << edge.i << "," << edge.j << ")";
    if (edge.i < 1 || edge.i > spec.n || edge.j < 1 || edge.j > spec.n) {
      add(where.str() + ": agent id outside 1..n");
      continue;
    }
    if (edge.i == edge.j) {
      add(where.str() + ": self-edge");
    }
    if (!std::isfinite(edge.weight) || edge.weight < 0.0) {
      std::ostringstream msg;
      msg << where.str() << ": negative weight w=" << edge.weight;
      add(msg.str());
    }
    if (!seen.insert({edge.i, edge.j}).second) {
      add(where.str() + ": duplicate edge for a fixed (i,j)");
    }
  }

  if (spec.leader_id && (*spec.leader_id < 1 || *spec.leader_id > spec.n)) {
    std::ostringstream msg;
    msg << "leader_id=" << *spec.leader_id << " outside 1..n";
    add(msg.str());
  }
  return report;
}

Eigen::MatrixXd build_influence_matrix(const NetworkSpec& spec) {
  const ValidationReport report = validate_network(spec);
  if (!report.ok()) {
    std::string msg = "malformed network spec:";
    for (const auto& v : report.violations) msg += "\n  - " + v;
    fail(ErrorKind::Config, msg);
  }
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(spec.n, spec.n);
  for (const Edge& e : spec.edges) {
    W(e.i - 1, e.j - 1) = -e.weight;
    W(e.i - 1, e.i - 1) += e.weight;  // q_i accumulates outgoing weights
  }
  for (int i = 0; i < spec.n; ++i) W(i, i) += spec.stubbornness[i];
  return W;
}

SystemMatrices stack_system_matrices(const NetworkSpec& spec,
                                     const Eigen::MatrixXd& mu,
                                     const Eigen::MatrixXd& sigma) {
  const int n = spec.n;
  if (mu.rows() != n || mu.cols() != n) {
    std::ostringstream msg;
    msg << "block mu has shape " << mu.rows() << "x" << mu.cols()
        << ", expected " << n << "x" << n;
    fail(ErrorKind::DimensionMismatch, msg.str());
  }
  if (sigma.rows() != n || sigma.cols() < 1) {
    std::ostringstream msg;
    msg << "block sigma has shape " << sigma.rows() << "x" << sigma.cols()
        << ", expected " << n << " rows and at least one column";
    fail(ErrorKind::DimensionMismatch, msg.str());
  }

  SystemMatrices sm;
  sm.W = build_influence_matrix(spec);
  sm.q = sm.W.diagonal();

  const int m = static_cast<int>(sigma.cols());
  sm.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  sm.A.topLeftCorner(n, n) = mu;
  sm.A.topRightCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  sm.A.bottomLeftCorner(n, n) = -sm.W;

  sm.K_hat = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) sm.K_hat(n + i, i) = spec.stubbornness[i];

  sm.Sigma_hat = Eigen::MatrixXd::Zero(2 * n, m);
  sm.Sigma_hat.topRows(n) = sigma;
  return sm;
}

}  // namespace opg
