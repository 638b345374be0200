#pragma once

#include <vector>

#include "opiniongames/errors.hpp"

namespace opg {

/// Regime constants shared by the closed-form time coefficients.
/// lambda1 = k + n*w, lambda1_hat = k1 + n*w_bar, lambda_tilde = k + w_i1
/// must be positive wherever the corresponding coefficient is evaluated.
struct CoefficientParams {
  double k = 0.0;      // own stubbornness
  double w = 0.0;      // symmetric influence weight
  double w_bar = 0.0;  // leader's assigned weight
  double k_1 = 0.0;    // leader stubbornness
  double w_i1 = 0.0;   // follower-to-leader weight
  int n = 2;           // agent count
  double t = 1.0;      // horizon

  double lambda1() const { return k + n * w; }
  double lambda1_hat() const { return k_1 + n * w_bar; }
  double lambda_tilde() const { return k + w_i1; }
};

/// Exponent parameters of the auxiliary function h(s,x) = exp(s*b*x + d).
/// e is derived from d (e = 1 + d), never configured independently.
struct HParams {
  double b = 0.5;
  double d = 0.1;
  double e() const { return 1.0 + d; }
};

/// Lagrange-multiplier trajectory: polynomial in s of degree <= 4 with exact
/// analytic derivatives. Default (single coefficient 1) is the constant model.
struct MultiplierModel {
  std::vector<double> coeffs{1.0};  // lambda(s) = sum coeffs[j] s^j
};

struct LambdaBundle {
  double value = 1.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Consensus pull of the full-consensus drift:
///   gamma(s) = k/l1 + (n w/l1) cosh(sqrt(l1)(t-s)) / cosh(sqrt(l1) t).
/// Domain error outside [0,t]; l1 = k + n w must be positive.
double gamma(double s, const CoefficientParams& p);
double gamma_prime(double s, const CoefficientParams& p);

/// Leader analogue with (k1, n w_bar).
double gamma_hat(double s, const CoefficientParams& p);
double gamma_hat_prime(double s, const CoefficientParams& p);

/// Follower pull toward the leader:
///   xi_hat(s) = w_i1 cosh(sqrt(lt)(t-s)) / (lt cosh(sqrt(lt) t)), lt = k + w_i1.
double xi_hat(double s, const CoefficientParams& p);
double xi_hat_prime(double s, const CoefficientParams& p);

/// h(s,x) = exp(s b x + d); throws ErrorKind::Overflow with the offending
/// exponent when it would not be representable.
double h_exact(double s, double x, const HParams& hp);

/// First-order surrogate e + s b x used by the opinion-side derivations.
double h_approx(double s, double x, const HParams& hp);

/// Polynomial value and exact first/second derivatives at s.
/// Throws ErrorKind::DegenerateMultiplier when |lambda(s)| <= 1e-12.
LambdaBundle multiplier_eval(const MultiplierModel& m, double s);

}  // namespace opg
