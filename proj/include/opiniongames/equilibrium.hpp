#pragma once

#include <variant>
#include <vector>

#include "opiniongames/coefficients.hpp"
#include "opiniongames/cubic.hpp"
#include "opiniongames/errors.hpp"

namespace opg {

/// Which sign the w_i1 * x_bar1 term carries in the follower drift. The two
/// variants disagree between the source's statement and derivation; Statement
/// is the default, Proof is kept for sensitivity checks.
enum class FollowerDriftSign { Statement, Proof };

struct FullConsensusRegime {
  double sigma = 0.0;  // diffusion constant; path diffusion is sqrt(2 sigma)
};

struct LeaderRegime {
  double sigma1 = 0.0;
  std::vector<double> x_tilde;  // opinions the leader assigns to agents 2..n
};

struct FollowerRegime {
  double sigma = 0.0;
  double x_bar1 = 0.0;  // leader's fixed optimal opinion
  FollowerDriftSign drift_sign = FollowerDriftSign::Statement;
};

using GameRegime =
    std::variant<FullConsensusRegime, LeaderRegime, FollowerRegime>;

/// One agent's evaluation point. mean_opt is the mean-field aggregate the
/// drift references: mean of the optimal profile (full consensus, self
/// included) or mean of the assigned opinions (leader); unused by followers,
/// whose reference is the regime's x_bar1.
struct GameState {
  double s = 0.0;
  double x_i = 0.0;
  double x_j = 0.0;
  double x0_i = 0.0;
  double mean_opt = 0.0;
  double u_i = 0.0;
  LambdaBundle lambda;
};

/// f and its partials at the state, plus the u-free collectors A1, A2 of f_x
/// and f_xx and the shared C products, so the cubics can be assembled without
/// re-deriving anything. f_u = u - C1 and f_xu = -C3 hold exactly.
struct DerivBundle {
  double f = 0.0;
  double f_x = 0.0;
  double f_xx = 0.0;
  double f_u = 0.0;
  double f_xu = 0.0;
  double A1 = 0.0;  // f_x  + C3 u
  double A2 = 0.0;  // f_xx + C2 u
  double C1 = 0.0;  // s b   lambda h
  double C2 = 0.0;  // (sb)^3 lambda h
  double C3 = 0.0;  // (sb)^2 lambda h
};

/// Regime-specific pieces of the common affine drift D = c0(s) + c1(s) x - u
/// and of the quadratic cost: disagreement weight, stubbornness weight and
/// the diffusion constant entering f.
struct DriftTerms {
  double weight_disagree = 0.0;  // n w | n w_bar | w_i1
  double weight_stubborn = 0.0;  // k   | k_1     | k_i
  double sigma = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
  double c0_s = 0.0;  // d c0 / ds
  double c1_s = 0.0;  // d c1 / ds
};

DriftTerms drift_terms(const GameRegime& regime, const GameState& st,
                       const CoefficientParams& cp);

/// Exact partials of f at the state. Guaranteed to satisfy the finite
/// difference fidelity contract; throws on degenerate multiplier, h overflow
/// or s outside [0, t].
DerivBundle f_derivatives(const GameRegime& regime, const GameState& st,
                          const HParams& hp, const CoefficientParams& cp);

/// Stationarity condition f_u (f_xx)^2 = 2 f_x f_xu expanded in powers of u.
/// Throws ErrorKind::DegenerateCubic at s = 0 (all C factors vanish); the
/// caller falls back to the u = 0 limit of the quadratic penalty.
CubicPoly control_cubic(const GameRegime& regime, const GameState& st,
                        const HParams& hp, const CoefficientParams& cp);

/// |f_u (f_xx)^2 - 2 f_x f_xu| at the state with control u.
double stationarity_residual(const GameRegime& regime, const GameState& st,
                             const HParams& hp, const CoefficientParams& cp,
                             double u);

/// Feedback Nash control: the real root of the control cubic with minimal
/// stationarity residual; ties broken by the smaller cost integrand (smaller
/// |u|). At s = 0 returns the quadratic-penalty limit 0. Throws
/// ErrorKind::StationarityFailure carrying the best residual when no root is
/// acceptable.
double feedback_control(const GameRegime& regime, const GameState& st,
                        const HParams& hp, const CoefficientParams& cp);

/// Cubic in the opinion x from the linearized (h -> e + s b x) stationarity
/// equation of the mixed s,x derivative. Degenerate at s = 0.
CubicPoly opinion_cubic(const GameRegime& regime, const GameState& st,
                        const HParams& hp, const CoefficientParams& cp);

/// Residual of the opinion equation before linearization (exact h), used to
/// rank the cubic's roots for the non-leader regimes.
double opinion_residual(const GameRegime& regime, const GameState& st,
                        const HParams& hp, const CoefficientParams& cp,
                        double x);

/// Root selection: leaders take the maximum real root; everyone else the root
/// minimizing the exact-h opinion residual.
double select_opinion_root(const GameRegime& regime, const RootSet& roots,
                           const GameState& st, const HParams& hp,
                           const CoefficientParams& cp);

/// Optimal opinion for the regime at the state (uses st.u_i as the control
/// entering the cubic's coefficients).
double optimal_opinion(const GameRegime& regime, const GameState& st,
                       const HParams& hp, const CoefficientParams& cp);

struct MeanFieldAgent {
  double x0 = 0.0;
  MultiplierModel multiplier;
};

struct MeanFieldResult {
  std::vector<double> x_star;
  std::vector<double> control;  // feedback control at the converged state
  int iterations = 0;
  double residual = 0.0;  // last max profile change
};

/// Damped fixed-point iteration (alpha = 0.5) of the full-consensus profile:
/// every agent's optimum depends on the mean of all optima. Evaluates each
/// agent at solve time s0 with x_j = profile mean and u = feedback control.
/// Throws ErrorKind::NonConvergence (message carries the residual) after
/// max_iter sweeps.
MeanFieldResult mean_field_fixed_point(const std::vector<MeanFieldAgent>& agents,
                                       const FullConsensusRegime& regime,
                                       const HParams& hp,
                                       const CoefficientParams& cp, double s0,
                                       double tol, int max_iter,
                                       const std::vector<double>* initial = nullptr,
                                       double damping = 0.5);

}  // namespace opg
