#include "opiniongames/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace opg {

namespace {

// Accepts (and clamps) grid points that land a few ulps outside [0, t].
double checked_time(double s, double t, const char* who) {
  const double slack = 4.0 * t * std::numeric_limits<double>::epsilon();
  if (!(s >= -slack && s <= t + slack)) {
    std::ostringstream msg;
    msg << who << ": s=" << s << " outside [0," << t << "]";
    fail(ErrorKind::Domain, msg.str());
  }
  return std::min(std::max(s, 0.0), t);
}

void check_rate(double rate, const char* name) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    std::ostringstream msg;
    msg << name << " must be positive and finite, got " << rate;
    fail(ErrorKind::Domain, msg.str());
  }
}

// cosh(a)/cosh(c) for 0 <= a <= c in exp-difference form, so large arguments
// never overflow: e^{a-c} (1+e^{-2a}) / (1+e^{-2c}).
double cosh_ratio(double a, double c) {
  return std::exp(a - c) * (1.0 + std::exp(-2.0 * a)) /
         (1.0 + std::exp(-2.0 * c));
}

// sinh(a)/cosh(c), same treatment.
double sinh_cosh_ratio(double a, double c) {
  return std::exp(a - c) * (1.0 - std::exp(-2.0 * a)) /
         (1.0 + std::exp(-2.0 * c));
}

// k/l + (nw/l) cosh(sqrt(l)(t-s))/cosh(sqrt(l) t), shared by all three pulls.
double pull(double s, double t, double own, double cross, double l) {
  const double root = std::sqrt(l);
  return own / l + (cross / l) * cosh_ratio(root * (t - s), root * t);
}

double pull_prime(double s, double t, double cross, double l) {
  const double root = std::sqrt(l);
  return -(cross / root) * sinh_cosh_ratio(root * (t - s), root * t);
}

}  // namespace

double gamma(double s, const CoefficientParams& p) {
  s = checked_time(s, p.t, "gamma");
  check_rate(p.lambda1(), "lambda1 = k + n w");
  return pull(s, p.t, p.k, p.n * p.w, p.lambda1());
}

double gamma_prime(double s, const CoefficientParams& p) {
  s = checked_time(s, p.t, "gamma_prime");
  check_rate(p.lambda1(), "lambda1 = k + n w");
  return pull_prime(s, p.t, p.n * p.w, p.lambda1());
}

double gamma_hat(double s, const CoefficientParams& p) {
  s = checked_time(s, p.t, "gamma_hat");
  check_rate(p.lambda1_hat(), "lambda1_hat = k1 + n w_bar");
  return pull(s, p.t, p.k_1, p.n * p.w_bar, p.lambda1_hat());
}

double gamma_hat_prime(double s, const CoefficientParams& p) {
  s = checked_time(s, p.t, "gamma_hat_prime");
  check_rate(p.lambda1_hat(), "lambda1_hat = k1 + n w_bar");
  return pull_prime(s, p.t, p.n * p.w_bar, p.lambda1_hat());
}

double xi_hat(double s, const CoefficientParams& p) {
  s = checked_time(s, p.t, "xi_hat");
  check_rate(p.lambda_tilde(), "lambda_tilde = k + w_i1");
  const double lt = p.lambda_tilde();
  const double root = std::sqrt(lt);
  return (p.w_i1 / lt) * cosh_ratio(root * (p.t - s), root * p.t);
}

double xi_hat_prime(double s, const CoefficientParams& p) {
  s = checked_time(s, p.t, "xi_hat_prime");
  check_rate(p.lambda_tilde(), "lambda_tilde = k + w_i1");
  const double lt = p.lambda_tilde();
  const double root = std::sqrt(lt);
  return -(p.w_i1 / root) * sinh_cosh_ratio(root * (p.t - s), root * p.t);
}

double h_exact(double s, double x, const HParams& hp) {
  const double arg = s * hp.b * x + hp.d;
  if (!(arg < 700.0)) {
    std::ostringstream msg;
    msg << "h_exact overflow: exponent " << arg << " exceeds 700 "
        << "(s=" << s << ", x=" << x << ", b=" << hp.b << ", d=" << hp.d << ")";
    fail(ErrorKind::Overflow, msg.str());
  }
  return std::exp(arg);
}

double h_approx(double s, double x, const HParams& hp) {
  return hp.e() + s * hp.b * x;
}

LambdaBundle multiplier_eval(const MultiplierModel& m, double s) {
  LambdaBundle out{0.0, 0.0, 0.0};
  // Horner from the top coefficient; derivatives carried along.
  for (auto it = m.coeffs.rbegin(); it != m.coeffs.rend(); ++it) {
    out.d2 = out.d2 * s + 2.0 * out.d1;
    out.d1 = out.d1 * s + out.value;
    out.value = out.value * s + *it;
  }
  if (std::abs(out.value) <= 1e-12) {
    std::ostringstream msg;
    msg << "degenerate multiplier: |lambda(" << s << ")| = "
        << std::abs(out.value) << " <= 1e-12";
    fail(ErrorKind::DegenerateMultiplier, msg.str());
  }
  return out;
}

}  // namespace opg
