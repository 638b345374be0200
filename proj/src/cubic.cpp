#include "opiniongames/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace opg {

double CubicPoly::max_abs_coeff() const {
  return std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
}

namespace {

// Newton steps in extended precision against the original cubic, kept only
// while they shrink the residual. Skipped near repeated roots where the
// derivative underflows the scale of the coefficients.
double polish(const CubicPoly& p, double x0) {
  const long double c3 = p.c3;
  const long double c2 = p.c2;
  const long double c1 = p.c1;
  const long double c0 = p.c0;
  const auto eval = [&](long double x) {
    return ((c3 * x + c2) * x + c1) * x + c0;
  };
  const auto deriv = [&](long double x) {
    return (3.0L * c3 * x + 2.0L * c2) * x + c1;
  };
  const long double scale = std::max(1.0, p.max_abs_coeff());
  long double x = x0;
  for (int pass = 0; pass < 3; ++pass) {
    const long double r = eval(x);
    const long double d = deriv(x);
    if (fabsl(d) <= 1e-12L * scale) break;
    const long double next = x - r / d;
    if (!std::isfinite(static_cast<double>(next)) ||
        fabsl(eval(next)) >= fabsl(r)) {
      break;
    }
    x = next;
  }
  return static_cast<double>(x);
}

}  // namespace

RootSet solve_cubic_real(const CubicPoly& poly) {
  if (poly.c3 == 0.0 || !std::isfinite(poly.c3)) {
    std::ostringstream msg;
    msg << "degenerate cubic: leading coefficient " << poly.c3
        << "; use the linear/quadratic fallback of the calling operation";
    fail(ErrorKind::DegenerateCubic, msg.str());
  }

  // Shifted-variable intermediates: with x = p + y the cubic becomes
  // y^3 - 3(r - p^2) y - 2q = 0 and the discriminant is q^2 + (r - p^2)^3.
  const double a = poly.c2 / poly.c3;
  const double b = poly.c1 / poly.c3;
  const double c = poly.c0 / poly.c3;
  const double p = -a / 3.0;
  const double r = b / 3.0;
  const double q = p * p * p + (a * b - 3.0 * c) / 6.0;
  const double m = p * p - r;  // positive over the three-real branch
  const double disc = q * q - m * m * m;

  RootSet out;
  out.discriminant = disc;
  if (disc > 0.0) {
    out.branch = CubicBranch::OneReal;
    const double s = std::sqrt(disc);
    const double root = p + std::cbrt(q + s) + std::cbrt(q - s);
    out.roots.push_back(polish(poly, root));
  } else {
    // Three real roots (repeated when disc == 0): trigonometric form keeps
    // everything real instead of passing through complex cube roots.
    out.branch = CubicBranch::ThreeReal;
    if (m <= 0.0) {
      // disc <= 0 and m <= 0 force q = m = 0: a triple root at p.
      out.roots.assign(3, p);
    } else {
      const double sm = std::sqrt(m);
      const double cosarg = std::clamp(q / (m * sm), -1.0, 1.0);
      const double theta = std::acos(cosarg) / 3.0;
      constexpr double two_pi_third = 2.0943951023931953;
      for (int k = 0; k < 3; ++k) {
        const double y = 2.0 * sm * std::cos(theta - two_pi_third * k);
        out.roots.push_back(polish(poly, p + y));
      }
    }
    std::sort(out.roots.begin(), out.roots.end());
  }
  return out;
}

}  // namespace opg
