#include "opiniongames/sde.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace opg {

ControlPolicy zero_policy() {
  return [](int, double, double) { return 0.0; };
}

namespace {

void check_noise(const NoisePaths& noise, int n_agents, const TimeGrid& grid,
                 const char* who) {
  if (noise.agents() < n_agents) {
    std::ostringstream msg;
    msg << who << ": noise has " << noise.agents() << " streams, need "
        << n_agents;
    fail(ErrorKind::GridMismatch, msg.str());
  }
  for (int a = 0; a < n_agents; ++a) {
    if (static_cast<int>(noise.increments[a].size()) != grid.steps) {
      std::ostringstream msg;
      msg << who << ": noise stream " << a << " has "
          << noise.increments[a].size() << " increments, grid has "
          << grid.steps << " steps";
      fail(ErrorKind::GridMismatch, msg.str());
    }
  }
}

/// Shared Euler-Maruyama loop over independent per-agent scalar equations.
/// mu/sigma take (agent, s, x, u).
template <typename Mu, typename Sigma>
OpinionPath integrate(PathRegime tag, const Mu& mu, const Sigma& sigma,
                      const ControlPolicy& policy,
                      const std::vector<double>& x0, const TimeGrid& grid,
                      const NoisePaths& noise) {
  const int n = static_cast<int>(x0.size());
  check_noise(noise, n, grid, "simulate");

  OpinionPath path;
  path.grid = grid;
  path.regime = tag;
  path.opinions.assign(n, std::vector<double>(grid.steps + 1, 0.0));
  path.controls.assign(n, std::vector<double>(grid.steps + 1, 0.0));
  path.increments.assign(n, std::vector<double>(grid.steps, 0.0));
  path.excursions.assign(n, 0);

  const double ds = grid.ds();
  for (int a = 0; a < n; ++a) {
    double x = x0[a];
    path.opinions[a][0] = x;
    for (int k = 0; k < grid.steps; ++k) {
      const double s = grid.s(k);
      const double u = policy(a, s, x);
      const double dB = noise.increments[a][k];
      path.controls[a][k] = u;
      path.increments[a][k] = dB;
      if (x < 0.0 || x > 1.0) ++path.excursions[a];
      x += mu(a, s, x, u) * ds + sigma(a, s, x, u) * dB;
      if (!std::isfinite(x)) {
        std::ostringstream msg;
        msg << "divergence: non-finite opinion for agent " << a + 1
            << " at step " << k + 1 << " (s=" << grid.s(k + 1) << ")";
        fail(ErrorKind::Divergence, msg.str());
      }
      path.opinions[a][k + 1] = x;
    }
    if (x < 0.0 || x > 1.0) ++path.excursions[a];
    path.controls[a][grid.steps] = policy(a, grid.t, x);
  }
  return path;
}

}  // namespace

OpinionPath simulate_general(const DriftFn& mu, const DiffusionFn& sigma,
                             const ControlPolicy& policy,
                             const std::vector<double>& x0,
                             const TimeGrid& grid, const NoisePaths& noise) {
  return integrate(
      PathRegime::General,
      [&](int, double s, double x, double u) { return mu(s, x, u); },
      [&](int, double s, double x, double u) { return sigma(s, x, u); },
      policy, x0, grid, noise);
}

OpinionPath simulate_full_consensus(const FullConsensusDynamics& dyn,
                                    const ControlPolicy& policy,
                                    const std::vector<double>& x0,
                                    const TimeGrid& grid,
                                    const NoisePaths& noise) {
  double mean = 0.0;
  for (double v : dyn.x_star) mean += v;
  if (!dyn.x_star.empty()) mean /= static_cast<double>(dyn.x_star.size());
  const double diff = std::sqrt(2.0 * dyn.regime.sigma);
  const CoefficientParams cp = dyn.cp;
  return integrate(
      PathRegime::FullConsensus,
      [mean, cp](int, double s, double x, double u) {
        return mean + gamma(s, cp) * (x - mean) - u;
      },
      [diff](int, double, double, double) { return diff; }, policy, x0, grid,
      noise);
}

OpinionPath simulate_leader(const LeaderDynamics& dyn,
                            const ControlPolicy& policy, double x0,
                            const TimeGrid& grid, const NoisePaths& noise) {
  double mean = 0.0;
  for (double v : dyn.regime.x_tilde) mean += v;
  if (!dyn.regime.x_tilde.empty()) {
    mean /= static_cast<double>(dyn.regime.x_tilde.size());
  }
  const double diff = std::sqrt(2.0 * dyn.regime.sigma1);
  const CoefficientParams cp = dyn.cp;
  return integrate(
      PathRegime::Leader,
      [mean, cp](int, double s, double x, double u) {
        return mean + gamma_hat(s, cp) * (x - mean) - u;
      },
      [diff](int, double, double, double) { return diff; }, policy,
      std::vector<double>{x0}, grid, noise);
}

OpinionPath simulate_followers(const FollowerDynamics& dyn,
                               const ControlPolicy& policy,
                               const std::vector<double>& x0,
                               const TimeGrid& grid, const NoisePaths& noise) {
  if (dyn.regimes.size() != x0.size() || dyn.cps.size() != x0.size()) {
    fail(ErrorKind::DimensionMismatch,
         "simulate_followers: regimes/cps/x0 sizes disagree");
  }
  return integrate(
      PathRegime::Follower,
      [&dyn](int a, double s, double x, double u) {
        const FollowerRegime& fr = dyn.regimes[a];
        const CoefficientParams& cp = dyn.cps[a];
        const double lt = cp.lambda_tilde();
        const double sgn =
            fr.drift_sign == FollowerDriftSign::Statement ? 1.0 : -1.0;
        return (cp.k * x + sgn * cp.w_i1 * fr.x_bar1) / lt +
               xi_hat(s, cp) * (x - fr.x_bar1) - u;
      },
      [&dyn](int a, double, double, double) {
        return std::sqrt(2.0 * dyn.regimes[a].sigma);
      },
      policy, x0, grid, noise);
}

std::vector<Eigen::VectorXd> closed_form_linear(const SystemMatrices& sm,
                                                const Eigen::VectorXd& X0,
                                                const TimeGrid& grid,
                                                const NoisePaths& noise) {
  const auto dim = sm.A.rows();
  const auto m = sm.Sigma_hat.cols();
  if (X0.size() != dim) {
    fail(ErrorKind::DimensionMismatch, "closed_form_linear: X0 size");
  }
  check_noise(noise, static_cast<int>(m), grid, "closed_form_linear");

  // Cumulative Brownian path per noise channel.
  std::vector<std::vector<double>> B(m);
  for (int c = 0; c < m; ++c) B[c] = noise.path(c);

  const double ds = grid.ds();
  const Eigen::VectorXd base = sm.K_hat * X0;
  Eigen::VectorXd integral = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd Bvec = Eigen::VectorXd::Zero(m);

  std::vector<Eigen::VectorXd> out;
  out.reserve(grid.steps + 1);
  for (int k = 0; k <= grid.steps; ++k) {
    const double s = grid.s(k);
    for (int c = 0; c < m; ++c) Bvec(c) = B[c][k];
    const Eigen::MatrixXd Es = (sm.A * s).exp();
    const Eigen::MatrixXd Es_inv = (sm.A * (-s)).exp();
    const Eigen::VectorXd value =
        Es * (base + Es_inv * (sm.Sigma_hat * Bvec) + integral);
    if (!value.allFinite()) {
      std::ostringstream msg;
      msg << "matrix-exponential evaluation overflowed at s=" << s;
      fail(ErrorKind::Overflow, msg.str());
    }
    out.push_back(value);
    // Left-rectangle update for the next grid point.
    integral += Es_inv * (sm.A * (sm.Sigma_hat * Bvec)) * ds;
  }
  return out;
}

BoundReport opinion_gap_bound_check(const OpinionPath& path, int agent_i,
                                    int agent_j,
                                    const std::function<double(double)>& c1,
                                    double sigma) {
  const int n = path.agents();
  if (agent_i < 0 || agent_i >= n || agent_j < 0 || agent_j >= n) {
    fail(ErrorKind::GridMismatch, "gap bound: agent index out of range");
  }
  const auto& xi = path.opinions[agent_i];
  const auto& xj = path.opinions[agent_j];
  const auto& ui = path.controls[agent_i];
  const auto& uj = path.controls[agent_j];
  const auto& dBi = path.increments[agent_i];
  const auto& dBj = path.increments[agent_j];
  if (xi.size() != xj.size() || dBi.size() != dBj.size() ||
      xi.size() != dBi.size() + 1) {
    fail(ErrorKind::GridMismatch, "gap bound: trajectory shapes disagree");
  }

  const double ds = path.grid.ds();
  const int steps = path.grid.steps;
  BoundReport report;
  double drift_sum = 0.0;
  double noise_sum = 0.0;
  for (int k = 0; k <= steps; ++k) {
    report.max_lhs = std::max(report.max_lhs, std::abs(xi[k] - xj[k]));
    if (k < steps) {
      const double dx = xi[k] - xj[k];
      const double du = ui[k] - uj[k];
      drift_sum += (c1(path.grid.s(k)) * dx - du) * ds;
      noise_sum += dBi[k] - dBj[k];
    }
  }
  report.lhs_final = std::abs(xi[steps] - xj[steps]);
  report.rhs_initial = std::abs(xi[0] - xj[0]);
  report.rhs_drift = std::abs(drift_sum);
  report.rhs_noise = std::sqrt(2.0 * sigma) * std::abs(noise_sum);
  report.rhs = report.rhs_initial + report.rhs_drift + report.rhs_noise;
  // Slack covers roundoff drift between the recomputed sums and the
  // integrator's internal cumulation over long grids.
  report.pass = report.lhs_final <= report.rhs * (1.0 + 1e-12) + 1e-10;
  return report;
}

}  // namespace opg
