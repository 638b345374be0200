#pragma once

#include <vector>

#include "opiniongames/errors.hpp"

namespace opg {

/// c3 x^3 + c2 x^2 + c1 x + c0.
struct CubicPoly {
  double c3 = 0.0;
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  double eval(double x) const { return ((c3 * x + c2) * x + c1) * x + c0; }
  double deriv(double x) const { return (3.0 * c3 * x + 2.0 * c2) * x + c1; }
  double max_abs_coeff() const;
};

enum class CubicBranch { OneReal, ThreeReal };

struct RootSet {
  std::vector<double> roots;  // ascending; duplicates kept for multiplicity
  double discriminant = 0.0;  // q^2 + (r - p^2)^3 of the shifted form
  CubicBranch branch = CubicBranch::OneReal;
};

/// All real roots of p. Positive discriminant takes the radical branch; a
/// non-positive one (three real roots, possibly repeated) is solved by the
/// trigonometric method so the arithmetic never leaves the reals. Roots are
/// Newton-polished against the original coefficients.
/// Throws ErrorKind::DegenerateCubic when c3 == 0.
RootSet solve_cubic_real(const CubicPoly& p);

}  // namespace opg
