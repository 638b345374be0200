#include <doctest.h>

#include <algorithm>
#include <random>

#include "opiniongames/cubic.hpp"
#include "oracles.hpp"

using opg::CubicBranch;
using opg::CubicPoly;

TEST_CASE("factored cubic") {
  // (x-1)(x-2)(x-3)
  const auto rs = opg::solve_cubic_real({1.0, -6.0, 11.0, -6.0});
  REQUIRE(rs.roots.size() == 3);
  CHECK(rs.branch == CubicBranch::ThreeReal);
  CHECK(rs.roots[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rs.roots[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rs.roots[2] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("single real root") {
  const auto rs = opg::solve_cubic_real({1.0, 0.0, 0.0, -1.0});
  REQUIRE(rs.roots.size() == 1);
  CHECK(rs.branch == CubicBranch::OneReal);
  CHECK(rs.roots[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rs.discriminant > 0.0);
}

TEST_CASE("triple root") {
  // (x-2)^3 = x^3 - 6x^2 + 12x - 8
  const auto rs = opg::solve_cubic_real({1.0, -6.0, 12.0, -8.0});
  REQUIRE(rs.roots.size() == 3);
  for (double r : rs.roots) CHECK(r == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("degenerate leading coefficient") {
  CHECK_THROWS_AS(opg::solve_cubic_real({0.0, 1.0, 1.0, 1.0}), opg::Error);
}

TEST_CASE("random cubics back-substitute and match the companion oracle") {
  std::mt19937_64 rng(2024);
  auto uni = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  for (int trial = 0; trial < 300; ++trial) {
    CubicPoly p;
    do {
      p.c3 = uni(-10, 10);
    } while (std::abs(p.c3) <= 0.1);
    p.c2 = uni(-10, 10);
    p.c1 = uni(-10, 10);
    p.c0 = uni(-10, 10);

    const auto rs = opg::solve_cubic_real(p);
    const double scale = std::max(1.0, p.max_abs_coeff());
    for (double r : rs.roots) {
      CHECK(std::abs(p.eval(r)) <= 1e-8 * scale);
    }

    const auto expected = oracle::companion_real_roots(p);
    REQUIRE(rs.roots.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(rs.roots[i] ==
            doctest::Approx(expected[i]).epsilon(1e-7).scale(1.0));
    }
  }
}

TEST_CASE("three-real branch flags casus irreducibilis") {
  // Roots -1, 0, 1: x^3 - x, discriminant negative.
  const auto rs = opg::solve_cubic_real({1.0, 0.0, -1.0, 0.0});
  CHECK(rs.branch == CubicBranch::ThreeReal);
  CHECK(rs.discriminant < 0.0);
  REQUIRE(rs.roots.size() == 3);
  CHECK(rs.roots[0] == doctest::Approx(-1.0));
  CHECK(rs.roots[1] == doctest::Approx(0.0));
  CHECK(rs.roots[2] == doctest::Approx(1.0));
}
