#include <doctest.h>

#include <cmath>
#include <numeric>

#include "opiniongames/sde.hpp"
#include "oracles.hpp"

using opg::CoefficientParams;
using opg::FollowerDriftSign;
using opg::FollowerRegime;
using opg::FullConsensusRegime;
using opg::LeaderRegime;
using opg::NoisePaths;
using opg::TimeGrid;

TEST_CASE("time grid basics") {
  TimeGrid grid(1.0, 4);
  CHECK(grid.ds() == doctest::Approx(0.25));
  CHECK(grid.s(0) == 0.0);
  CHECK(grid.s(4) == doctest::Approx(1.0));
  CHECK_THROWS_AS(TimeGrid(0.0, 4), opg::Error);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), opg::Error);
}

TEST_CASE("noise substreams") {
  TimeGrid grid(1.0, 64);
  const auto a = NoisePaths::generate(42, 0, 3, grid);
  const auto b = NoisePaths::generate(42, 0, 5, grid);
  // Adding agents never reshuffles existing agents' noise.
  for (int ag = 0; ag < 3; ++ag) {
    CHECK(a.increments[ag] == b.increments[ag]);
  }
  // Distinct replicas and seeds decorrelate.
  const auto c = NoisePaths::generate(42, 1, 3, grid);
  CHECK(a.increments[0] != c.increments[0]);
  const auto d = NoisePaths::generate(43, 0, 3, grid);
  CHECK(a.increments[0] != d.increments[0]);

  const auto cumulative = a.path(0);
  CHECK(cumulative.size() == 65);
  CHECK(cumulative[0] == 0.0);
  CHECK(cumulative[64] ==
        doctest::Approx(std::accumulate(a.increments[0].begin(),
                                        a.increments[0].end(), 0.0)));

  const auto sliced = a.select({2, 0});
  CHECK(sliced.increments[0] == a.increments[2]);
  CHECK(sliced.increments[1] == a.increments[0]);
}

TEST_CASE("increment variance matches the step size") {
  TimeGrid grid(1.0, 1000);  // ds = 1e-3
  double sum = 0.0;
  double sum_sq = 0.0;
  long count = 0;
  for (uint64_t replica = 0; replica < 10; ++replica) {
    const auto noise = NoisePaths::generate(7, replica, 10, grid);
    for (const auto& row : noise.increments) {
      for (double v : row) {
        sum += v;
        sum_sq += v * v;
        ++count;
      }
    }
  }
  REQUIRE(count == 100000);
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  CHECK(std::abs(var - grid.ds()) <= 0.03 * grid.ds());
}

TEST_CASE("general integrator on flat and constant drift") {
  TimeGrid grid(1.0, 100);
  const auto zero_noise = NoisePaths::zero(1, grid);

  auto flat = opg::simulate_general(
      [](double, double, double) { return 0.0; },
      [](double, double, double) { return 0.0; }, opg::zero_policy(), {0.3},
      grid, zero_noise);
  for (double v : flat.opinions[0]) CHECK(v == 0.3);

  auto ramp = opg::simulate_general(
      [](double, double, double) { return 1.0; },
      [](double, double, double) { return 0.0; }, opg::zero_policy(), {0.0},
      grid, zero_noise);
  CHECK(ramp.opinions[0].back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("general integrator against the exponential decay oracle") {
  TimeGrid grid(1.0, 1000);  // ds = 1e-3
  const auto zero_noise = NoisePaths::zero(1, grid);
  auto decay = opg::simulate_general(
      [](double, double x, double) { return -x; },
      [](double, double, double) { return 0.0; }, opg::zero_policy(), {1.0},
      grid, zero_noise);
  const double reference = oracle::rk4(
      [](double, double x) { return -x; }, 1.0, 1.0, 1000);
  CHECK(std::abs(decay.opinions[0].back() - reference) <= 2.0 * grid.ds());
  CHECK(std::abs(decay.opinions[0].back() - std::exp(-1.0)) <= 2.0 * grid.ds());
}

TEST_CASE("divergence is reported with the step index") {
  TimeGrid grid(1.0, 50);
  const auto zero_noise = NoisePaths::zero(1, grid);
  CHECK_THROWS_WITH_AS(
      opg::simulate_general([](double, double x, double) { return x * x * x; },
                            [](double, double, double) { return 0.0; },
                            opg::zero_policy(), {40.0}, grid, zero_noise),
      doctest::Contains("step"), opg::Error);
}

namespace {

opg::FullConsensusDynamics canonical_fc(double sigma) {
  opg::FullConsensusDynamics dyn;
  dyn.regime = FullConsensusRegime{sigma};
  dyn.cp.k = 1.0;
  dyn.cp.w = 0.5;
  dyn.cp.n = 3;
  dyn.cp.t = 1.0;
  dyn.x_star = {0.5, 0.5, 0.5};
  return dyn;
}

}  // namespace

TEST_CASE("full-consensus drift fixed point at the zero aggregate") {
  // The drift mean + gamma (x - mean) - u vanishes on the diagonal exactly
  // when the aggregate is zero.
  auto dyn = canonical_fc(0.0);
  dyn.x_star = {0.0, 0.0, 0.0};
  TimeGrid grid(1.0, 200);
  const auto noise = NoisePaths::zero(3, grid);
  const auto path = opg::simulate_full_consensus(dyn, opg::zero_policy(),
                                                 {0.0, 0.0, 0.0}, grid, noise);
  for (int a = 0; a < 3; ++a) {
    for (double v : path.opinions[a]) CHECK(v == 0.0);
  }
}

TEST_CASE("full-consensus diagonal path follows the ODE oracle") {
  auto dyn = canonical_fc(0.0);
  TimeGrid grid(1.0, 10000);  // ds = 1e-4
  const auto noise = NoisePaths::zero(1, grid);
  const auto path = opg::simulate_full_consensus(dyn, opg::zero_policy(),
                                                 {0.5}, grid, noise);
  const auto cp = dyn.cp;
  const double reference = oracle::rk4(
      [&](double s, double x) { return 0.5 + opg::gamma(s, cp) * (x - 0.5); },
      0.5, 1.0, 4000);
  CHECK(std::abs(path.opinions[0].back() - reference) <= 2.0 * grid.ds());
}

TEST_CASE("full-consensus deviation follows the quadrature oracle") {
  // The difference of two paths obeys d(dx) = gamma dx exactly (the
  // aggregate term cancels), so dx(t) = delta0 exp(integral of gamma).
  auto dyn = canonical_fc(0.0);
  TimeGrid grid(1.0, 10000);  // ds = 1e-4
  const auto noise = NoisePaths::zero(2, grid);
  const double delta0 = 0.2;
  const auto path = opg::simulate_full_consensus(
      dyn, opg::zero_policy(), {0.5 + delta0, 0.5}, grid, noise);

  const int panels = 2000;
  const double h = 1.0 / panels;
  double integral = opg::gamma(0.0, dyn.cp) + opg::gamma(1.0, dyn.cp);
  for (int i = 1; i < panels; ++i) {
    integral += (i % 2 ? 4.0 : 2.0) * opg::gamma(i * h, dyn.cp);
  }
  integral *= h / 3.0;
  const double expected = delta0 * std::exp(integral);
  const double gap = path.opinions[0].back() - path.opinions[1].back();
  CHECK(std::abs(gap - expected) < 1e-4);
}

TEST_CASE("common seed means identical paths") {
  auto dyn = canonical_fc(0.05);
  TimeGrid grid(1.0, 500);
  const auto noise = NoisePaths::generate(11, 0, 2, grid);
  const auto p1 = opg::simulate_full_consensus(dyn, opg::zero_policy(),
                                               {0.4, 0.4}, grid, noise);
  const auto p2 = opg::simulate_full_consensus(dyn, opg::zero_policy(),
                                               {0.4, 0.4}, grid, noise);
  CHECK(p1.opinions == p2.opinions);
  // Two identically parameterized agents coincide when given one stream.
  const auto shared = noise.select({0, 0});
  const auto p3 = opg::simulate_full_consensus(dyn, opg::zero_policy(),
                                               {0.4, 0.4}, grid, shared);
  CHECK(p3.opinions[0] == p3.opinions[1]);
}

TEST_CASE("permutation equivariance") {
  auto dyn = canonical_fc(0.08);
  TimeGrid grid(1.0, 300);
  const auto noise = NoisePaths::generate(17, 0, 3, grid);
  const std::vector<double> x0 = {0.2, 0.5, 0.8};
  const auto base = opg::simulate_full_consensus(dyn, opg::zero_policy(), x0,
                                                 grid, noise);
  const auto swapped = opg::simulate_full_consensus(
      dyn, opg::zero_policy(), {0.5, 0.2, 0.8}, grid, noise.select({1, 0, 2}));
  CHECK(swapped.opinions[0] == base.opinions[1]);
  CHECK(swapped.opinions[1] == base.opinions[0]);
  CHECK(swapped.opinions[2] == base.opinions[2]);
}

TEST_CASE("leader dynamics") {
  opg::LeaderDynamics dyn;
  dyn.regime = LeaderRegime{0.0, {0.4, 0.6}};
  dyn.cp.k_1 = 1.5;
  dyn.cp.w_bar = 0.5;
  dyn.cp.n = 3;
  dyn.cp.t = 1.0;
  TimeGrid grid(1.0, 400);
  const auto zero_noise = NoisePaths::zero(1, grid);

  SUBCASE("zero assigned mean is a drift fixed point") {
    opg::LeaderDynamics flat = dyn;
    flat.regime.x_tilde = {0.0, 0.0};
    const auto path = opg::simulate_leader(flat, opg::zero_policy(), 0.0, grid,
                                           zero_noise);
    for (double v : path.opinions[0]) CHECK(v == 0.0);
  }

  SUBCASE("deterministic path follows the ODE oracle") {
    const auto path = opg::simulate_leader(dyn, opg::zero_policy(), 0.5, grid,
                                           zero_noise);
    const auto cp = dyn.cp;
    const double reference = oracle::rk4(
        [&](double s, double x) {
          return 0.5 + opg::gamma_hat(s, cp) * (x - 0.5);
        },
        0.5, 1.0, 4000);
    CHECK(std::abs(path.opinions[0].back() - reference) <= 2.0 * grid.ds());
  }

  SUBCASE("w_bar = 0 reduces to the hand-coded drift") {
    opg::LeaderDynamics flat = dyn;
    flat.cp.w_bar = 0.0;
    const auto noise = NoisePaths::generate(3, 0, 1, grid);
    const auto lead = opg::simulate_leader(flat, opg::zero_policy(), 0.3, grid,
                                           noise);
    // gamma_hat is identically 1, so dx = (x - u) ds here (sigma1 = 0).
    const auto general = opg::simulate_general(
        [](double, double x, double u) { return x - u; },
        [](double, double, double) { return 0.0; },
        opg::zero_policy(), {0.3}, grid, noise);
    for (int k = 0; k <= grid.steps; ++k) {
      CHECK(lead.opinions[0][k] ==
            doctest::Approx(general.opinions[0][k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("follower dynamics") {
  TimeGrid grid(1.0, 2000);
  const auto zero_noise = NoisePaths::zero(1, grid);

  SUBCASE("detached follower grows exponentially") {
    // w_i1 = 0 and lambda_tilde = k: drift reduces to x itself.
    opg::FollowerDynamics dyn;
    dyn.regimes = {FollowerRegime{0.0, 0.7, FollowerDriftSign::Statement}};
    CoefficientParams cp;
    cp.k = 2.0;
    cp.w_i1 = 0.0;
    cp.t = 1.0;
    dyn.cps = {cp};
    const auto path = opg::simulate_followers(dyn, opg::zero_policy(), {0.5},
                                              grid, zero_noise);
    CHECK(std::abs(path.opinions[0].back() - 0.5 * std::exp(1.0)) <=
          2.0 * grid.ds());
  }

  SUBCASE("start at the leader opinion, both sign variants") {
    for (auto sign :
         {FollowerDriftSign::Statement, FollowerDriftSign::Proof}) {
      const double x_bar = 0.6;
      opg::FollowerDynamics dyn;
      dyn.regimes = {FollowerRegime{0.0, x_bar, sign}};
      CoefficientParams cp;
      cp.k = 0.0;
      cp.w_i1 = 0.8;
      cp.t = 1.0;
      dyn.cps = {cp};
      const auto path = opg::simulate_followers(dyn, opg::zero_policy(),
                                                {x_bar}, grid, zero_noise);
      const double sgn = sign == FollowerDriftSign::Statement ? 1.0 : -1.0;
      const double reference = oracle::rk4(
          [&](double s, double x) {
            return sgn * x_bar + opg::xi_hat(s, cp) * (x - x_bar);
          },
          x_bar, 1.0, 4000);
      CHECK(std::abs(path.opinions[0].back() - reference) <= 2.0 * grid.ds());
    }
  }
}

TEST_CASE("closed form with A = 0 reduces to K X0 plus the Brownian path") {
  opg::SystemMatrices sm;
  sm.A = Eigen::MatrixXd::Zero(2, 2);
  sm.K_hat = Eigen::MatrixXd::Zero(2, 2);
  sm.K_hat(1, 0) = 2.0;
  sm.Sigma_hat = Eigen::MatrixXd::Identity(2, 2);
  TimeGrid grid(1.0, 64);
  const auto noise = NoisePaths::generate(9, 0, 2, grid);
  const auto traj = opg::closed_form_linear(sm, Eigen::Vector2d(0.5, 0.0),
                                            grid, noise);
  const auto B0 = noise.path(0);
  const auto B1 = noise.path(1);
  for (int k = 0; k <= grid.steps; ++k) {
    CHECK(traj[k](0) == doctest::Approx(B0[k]).epsilon(1e-14));
    CHECK(traj[k](1) == doctest::Approx(1.0 + B1[k]).epsilon(1e-14));
  }
}

TEST_CASE("closed form exponential part matches the eigendecomposition") {
  opg::SystemMatrices sm;
  sm.A.resize(2, 2);
  sm.A << -0.4, 0.3, 0.1, -0.8;  // diagonalizable
  sm.K_hat = Eigen::MatrixXd::Identity(2, 2);
  sm.Sigma_hat = Eigen::MatrixXd::Zero(2, 1);
  TimeGrid grid(1.0, 16);
  const auto noise = NoisePaths::zero(1, grid);
  const Eigen::Vector2d X0(1.0, -0.5);
  const auto traj = opg::closed_form_linear(sm, X0, grid, noise);

  Eigen::EigenSolver<Eigen::Matrix2d> eigen(sm.A);
  const auto V = eigen.eigenvectors();
  const auto D = eigen.eigenvalues();
  for (int k = 0; k <= grid.steps; ++k) {
    const double s = grid.s(k);
    Eigen::Vector2cd scaled = V.inverse() * X0.cast<std::complex<double>>();
    scaled(0) *= std::exp(D(0) * s);
    scaled(1) *= std::exp(D(1) * s);
    const Eigen::Vector2cd expected = V * scaled;
    CHECK(traj[k](0) == doctest::Approx(expected(0).real()).epsilon(1e-10));
    CHECK(traj[k](1) == doctest::Approx(expected(1).real()).epsilon(1e-10));
  }
}

TEST_CASE("scalar closed form equals a hand evaluation") {
  opg::SystemMatrices sm;
  sm.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  sm.K_hat = Eigen::MatrixXd::Constant(1, 1, 1.0);
  sm.Sigma_hat = Eigen::MatrixXd::Constant(1, 1, 1.0);
  TimeGrid grid(1.0, 128);
  const auto noise = NoisePaths::generate(21, 0, 1, grid);
  const auto traj = opg::closed_form_linear(
      sm, Eigen::VectorXd::Constant(1, 0.7), grid, noise);

  const auto B = noise.path(0);
  const double ds = grid.ds();
  double integral = 0.0;
  for (int k = 0; k <= grid.steps; ++k) {
    const double s = grid.s(k);
    const double expected =
        std::exp(-s) * (0.7 + std::exp(s) * B[k] + integral);
    CHECK(traj[k](0) == doctest::Approx(expected).epsilon(1e-12));
    integral += std::exp(s) * (-1.0) * B[k] * ds;
  }
}

TEST_CASE("gap bound") {
  auto dyn = canonical_fc(0.05);
  TimeGrid grid(1.0, 800);
  auto c1 = [&](double s) { return opg::gamma(s, dyn.cp); };

  SUBCASE("identical agents, identical noise: zero gap") {
    const auto noise = NoisePaths::generate(5, 0, 1, grid).select({0, 0});
    const auto path = opg::simulate_full_consensus(dyn, opg::zero_policy(),
                                                   {0.4, 0.4}, grid, noise);
    const auto report = opg::opinion_gap_bound_check(path, 0, 1, c1, 0.05);
    CHECK(report.pass);
    CHECK(report.max_lhs == 0.0);
  }

  SUBCASE("deterministic pair") {
    auto flat = canonical_fc(0.0);
    const auto noise = NoisePaths::zero(2, grid);
    const auto path = opg::simulate_full_consensus(flat, opg::zero_policy(),
                                                   {0.2, 0.9}, grid, noise);
    const auto report = opg::opinion_gap_bound_check(path, 0, 1, c1, 0.0);
    CHECK(report.pass);
    CHECK(report.rhs_noise == 0.0);
    CHECK(report.lhs_final <= report.rhs);
  }

  SUBCASE("random seeded pairs") {
    for (uint64_t replica = 0; replica < 25; ++replica) {
      const auto noise = NoisePaths::generate(1234, replica, 2, grid);
      const auto path = opg::simulate_full_consensus(dyn, opg::zero_policy(),
                                                     {0.3, 0.7}, grid, noise);
      const auto report = opg::opinion_gap_bound_check(path, 0, 1, c1, 0.05);
      CHECK(report.pass);
    }
  }

  SUBCASE("agent index out of range raises") {
    const auto noise = NoisePaths::generate(5, 0, 2, grid);
    const auto path = opg::simulate_full_consensus(dyn, opg::zero_policy(),
                                                   {0.4, 0.6}, grid, noise);
    CHECK_THROWS_AS(opg::opinion_gap_bound_check(path, 0, 5, c1, 0.05),
                    opg::Error);
  }
}
