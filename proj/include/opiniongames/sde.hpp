#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "opiniongames/equilibrium.hpp"
#include "opiniongames/network.hpp"
#include "opiniongames/noise.hpp"

namespace opg {

/// u = policy(agent, s, x). Agents are 0-based here.
using ControlPolicy = std::function<double(int, double, double)>;

ControlPolicy zero_policy();

enum class PathRegime { General, FullConsensus, Leader, Follower };

struct OpinionPath {
  TimeGrid grid;
  PathRegime regime = PathRegime::General;
  std::vector<std::vector<double>> opinions;  // [agent][0..steps]
  std::vector<std::vector<double>> controls;  // [agent][0..steps]
  std::vector<std::vector<double>> increments;  // copy of the noise used
  std::vector<int> excursions;  // grid points with x outside [0,1], per agent

  int agents() const { return static_cast<int>(opinions.size()); }
};

using DriftFn = std::function<double(double s, double x, double u)>;
using DiffusionFn = std::function<double(double s, double x, double u)>;

/// Euler-Maruyama on dx = mu ds + sigma dB, one independent path per agent.
/// Throws ErrorKind::Divergence with the step index when the state leaves the
/// finite range.
OpinionPath simulate_general(const DriftFn& mu, const DiffusionFn& sigma,
                             const ControlPolicy& policy,
                             const std::vector<double>& x0,
                             const TimeGrid& grid, const NoisePaths& noise);

struct FullConsensusDynamics {
  FullConsensusRegime regime;
  CoefficientParams cp;
  std::vector<double> x_star;  // equilibrium profile feeding the drift
};

/// dx = [m* + gamma(s)(x - m*) - u] ds + sqrt(2 sigma) dB with m* the mean of
/// the equilibrium profile.
OpinionPath simulate_full_consensus(const FullConsensusDynamics& dyn,
                                    const ControlPolicy& policy,
                                    const std::vector<double>& x0,
                                    const TimeGrid& grid,
                                    const NoisePaths& noise);

struct LeaderDynamics {
  LeaderRegime regime;
  CoefficientParams cp;
};

/// Single path for the leader with gamma_hat and the assigned-opinion mean.
OpinionPath simulate_leader(const LeaderDynamics& dyn,
                            const ControlPolicy& policy, double x0,
                            const TimeGrid& grid, const NoisePaths& noise);

struct FollowerDynamics {
  std::vector<FollowerRegime> regimes;  // one per follower
  std::vector<CoefficientParams> cps;   // per-follower (k_i, w_i1)
};

/// Paths for the followers given the leader's fixed opinion (inside each
/// FollowerRegime).
OpinionPath simulate_followers(const FollowerDynamics& dyn,
                               const ControlPolicy& policy,
                               const std::vector<double>& x0,
                               const TimeGrid& grid, const NoisePaths& noise);

/// Trajectory of the stacked linear system's closed form
///   X(s) = exp(A s)[K_hat X0 + exp(-A s) S B(s) + sum_j exp(-A s_j) A S B(s_j) ds]
/// with the integral taken up to the current s by left rectangles.
/// `noise` supplies m increment streams (one per column of Sigma_hat).
std::vector<Eigen::VectorXd> closed_form_linear(const SystemMatrices& sm,
                                                const Eigen::VectorXd& X0,
                                                const TimeGrid& grid,
                                                const NoisePaths& noise);

struct BoundReport {
  double max_lhs = 0.0;    // max over grid points of |x_i - x_j|
  double lhs_final = 0.0;  // |x_i(t) - x_j(t)|
  double rhs = 0.0;
  double rhs_initial = 0.0;
  double rhs_drift = 0.0;
  double rhs_noise = 0.0;
  bool pass = false;
};

/// Per-path opinion-gap bound for two same-parameter agents of one path:
///   |dx(t)| <= |dx0| + |sum (c1(s) dx - du) ds| + sqrt(2 sigma) |sum ddB|,
/// all sums on the shared grid. c1 is the regime's drift slope (gamma for
/// full consensus). Throws ErrorKind::GridMismatch on inconsistent shapes.
BoundReport opinion_gap_bound_check(const OpinionPath& path, int agent_i,
                                    int agent_j,
                                    const std::function<double(double)>& c1,
                                    double sigma);

}  // namespace opg
