#include <doctest.h>

#include <cmath>
#include <random>

#include "opiniongames/spectral.hpp"

using opg::PDECoefficients;
using opg::SpatialGrid;
using opg::WaveField;

namespace {

const SpatialGrid kWide{-12.0, 13.0, 2048};

double max_rel_diff(const std::vector<std::complex<double>>& a,
                    const std::vector<std::complex<double>>& b) {
  double scale = 0.0;
  for (const auto& v : a) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("wick right-hand side") {
  opg::DerivBundle db;
  db.f = 0.8;
  db.f_x = 0.0;
  db.f_xx = 1.3;
  CHECK(opg::wick_rhs(db) == doctest::Approx(-0.8));

  db.f_x = 2.0;
  db.f_xx = 2.0;
  db.f = 1.0;
  CHECK(opg::wick_rhs(db) == doctest::Approx(0.0));

  db.f_xx = 1e-14;
  CHECK_THROWS_AS(opg::wick_rhs(db), opg::Error);
}

TEST_CASE("wick value recomputes from the equilibrium bundle") {
  opg::CoefficientParams cp;
  cp.k = 1.0;
  cp.w = 0.5;
  cp.n = 3;
  cp.t = 1.0;
  opg::HParams hp{0.5, 0.1};
  opg::GameRegime regime = opg::FullConsensusRegime{0.1};
  opg::GameState st;
  st.s = 0.5;
  st.x_i = 0.4;
  st.x_j = 0.6;
  st.x0_i = 0.5;
  st.mean_opt = 0.5;
  st.u_i = 0.2;
  st.lambda = opg::multiplier_eval(opg::MultiplierModel{}, st.s);
  const auto db = opg::f_derivatives(regime, st, hp, cp);
  const double direct = db.f_x * db.f_x / (db.f_xx * db.f_xx) - db.f;
  CHECK(opg::wick_rhs(db) == direct);
}

TEST_CASE("transition wave") {
  const auto I = WaveField::gaussian(kWide, 0.5, 0.7);
  std::vector<double> v(kWide.n_x);
  for (int j = 0; j < kWide.n_x; ++j) {
    const double x = kWide.x(j);
    v[j] = -x * x;
  }

  const auto same = opg::transition_wave(I, v, 0.0);
  CHECK(max_rel_diff(same.values, I.values) == 0.0);

  const auto flat = opg::transition_wave(
      I, std::vector<double>(kWide.n_x, 0.0), 0.7);
  CHECK(max_rel_diff(flat.values, I.values) == 0.0);

  const auto evolved = opg::transition_wave(I, v, 0.5);
  CHECK(evolved.time == doctest::Approx(0.5));
  for (int j = 0; j < kWide.n_x; j += 37) {
    const long double x = kWide.x(j);
    const long double expected =
        std::exp(-0.5L * ((x - 0.5L) / 0.7L) * ((x - 0.5L) / 0.7L)) *
        std::exp(0.5L * (-x * x));
    CHECK(evolved.values[j].real() ==
          doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(
      opg::transition_wave(I, std::vector<double>(kWide.n_x, 2000.0), 1.0),
      opg::Error);
}

TEST_CASE("fourier identity when every coefficient vanishes") {
  const auto I = WaveField::gaussian(kWide, 0.5, 0.5);
  const auto coeffs = PDECoefficients::constant(0.0, 0.0, 0.0, kWide);
  const auto psi = opg::solve_diffusion_fourier(coeffs, I, 0.8);
  CHECK(max_rel_diff(psi.values, I.values) < 1e-12);
}

TEST_CASE("heat kernel variance law") {
  const double sigma0 = 0.5;
  const auto I = WaveField::gaussian(kWide, 0.5, sigma0);
  const auto coeffs = PDECoefficients::constant(0.0, 0.0, 1.0, kWide);
  for (double s : {0.1, 0.25, 0.5, 1.0}) {
    const auto psi = opg::solve_diffusion_fourier(coeffs, I, s);
    const auto m = opg::field_moments(psi);
    const double expected = sigma0 * sigma0 + 2.0 * s;
    CHECK(std::abs(m.variance - expected) <= 1e-3 * expected);
    CHECK(m.mean == doctest::Approx(0.5).epsilon(1e-6));
  }
}

TEST_CASE("pure transport translates the field") {
  const auto I = WaveField::gaussian(kWide, 0.5, 0.5);
  const auto coeffs = PDECoefficients::constant(0.0, 1.0, 0.0, kWide);
  const double s = 0.75;
  const auto psi = opg::solve_diffusion_fourier(coeffs, I, s);
  // dPsi/ds = z dPsi/dx moves the profile to x0 - z s; locate the peak by
  // cross-correlation against shifted copies of the input.
  double best_shift = 0.0;
  double best_score = -1.0;
  for (int shift = -kWide.n_x / 4; shift <= kWide.n_x / 4; ++shift) {
    double score = 0.0;
    for (int j = 0; j < kWide.n_x; ++j) {
      const int src = (j + shift + kWide.n_x) % kWide.n_x;
      score += psi.values[j].real() * I.values[src].real();
    }
    if (score > best_score) {
      best_score = score;
      best_shift = -shift * kWide.dx();
    }
  }
  CHECK(best_shift == doctest::Approx(-s).epsilon(0.02));
  const auto m = opg::field_moments(psi);
  CHECK(m.mean == doctest::Approx(0.5 - s).epsilon(1e-4));
}

TEST_CASE("diffusion with w = z = 0 reduces to the pointwise evolution") {
  const auto I = WaveField::gaussian(kWide, 0.5, 0.5);
  const double v = -0.35;
  const auto coeffs = PDECoefficients::constant(v, 0.0, 0.0, kWide);
  const auto spectral = opg::solve_diffusion_fourier(coeffs, I, 0.6);
  const auto pointwise =
      opg::transition_wave(I, std::vector<double>(kWide.n_x, v), 0.6);
  CHECK(max_rel_diff(spectral.values, pointwise.values) < 1e-12);
}

TEST_CASE("transform round trip on random fields") {
  std::mt19937_64 rng(5150);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> field(1024);
  for (auto& v : field) v = {normal(rng), normal(rng)};
  const auto back = opg::fft_inverse(opg::fft_forward(field));
  CHECK(max_rel_diff(back, field) < 1e-12);
}

TEST_CASE("semigroup property") {
  const auto I = WaveField::gaussian(kWide, 0.5, 0.6);
  const auto coeffs = PDECoefficients::constant(0.3, 0.7, 0.5, kWide);
  const double s1 = 0.4;
  const double s2 = 0.35;
  const auto direct = opg::solve_diffusion_fourier(coeffs, I, s1 + s2);
  const auto first = opg::solve_diffusion_fourier(coeffs, I, s1);
  const auto chained = opg::solve_diffusion_fourier(coeffs, first, s2);
  CHECK(max_rel_diff(direct.values, chained.values) < 1e-10);
  CHECK(chained.time == doctest::Approx(direct.time));
}

TEST_CASE("pde residual decays at second order in the time spacing") {
  // Refine within one fixed window so both residuals weight the same
  // stretch of the evolution.
  const auto I = WaveField::gaussian(kWide, 0.5, 0.6);
  const auto coeffs = PDECoefficients::constant(0.2, 0.4, 0.8, kWide);
  const double window = 0.16;
  auto residual_with = [&](int slices) {
    const double dt = window / (slices - 1);
    std::vector<WaveField> series;
    for (int k = 0; k < slices; ++k) {
      series.push_back(opg::solve_diffusion_fourier(coeffs, I, k * dt));
    }
    return opg::schrodinger_residual(series, coeffs);
  };
  const double coarse = residual_with(5);   // dt = 0.04
  const double fine = residual_with(9);     // dt = 0.02
  const double finer = residual_with(17);   // dt = 0.01
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.2));
  CHECK(fine / finer == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("zero series has zero residual") {
  WaveField zero;
  zero.grid = kWide;
  zero.values.assign(kWide.n_x, 0.0);
  std::vector<WaveField> series;
  for (int k = 0; k < 3; ++k) {
    WaveField f = zero;
    f.time = 0.1 * k;
    series.push_back(f);
  }
  const auto coeffs = PDECoefficients::constant(0.2, 0.4, 0.8, kWide);
  CHECK(opg::schrodinger_residual(series, coeffs) == 0.0);
}

TEST_CASE("reduced-equation series leaves only time truncation") {
  // For dPsi/ds = v Psi the pointwise solution is exact; the residual is the
  // central-difference truncation of exp(s v), of size dt^2 v^3 / 6 * |Psi|.
  const double v = -0.5;
  const auto I = WaveField::gaussian(kWide, 0.5, 0.6);
  const auto coeffs = PDECoefficients::constant(v, 0.0, 0.0, kWide);
  const std::vector<double> vfield(kWide.n_x, v);
  const double dt = 0.02;
  std::vector<WaveField> series;
  for (int k = 0; k <= 4; ++k) {
    series.push_back(opg::transition_wave(I, vfield, k * dt));
  }
  const double res = opg::schrodinger_residual(series, coeffs);
  CHECK(res < dt * dt * std::abs(v * v * v));
}

TEST_CASE("residual rejects short or inconsistent series") {
  const auto coeffs = PDECoefficients::constant(0.2, 0.4, 0.8, kWide);
  const auto I = WaveField::gaussian(kWide, 0.5, 0.6);
  std::vector<WaveField> two = {I, I};
  CHECK_THROWS_AS(opg::schrodinger_residual(two, coeffs), opg::Error);

  std::vector<WaveField> jittered;
  for (double t : {0.0, 0.1, 0.25}) {  // nonuniform spacing
    WaveField f = I;
    f.time = t;
    jittered.push_back(f);
  }
  CHECK_THROWS_AS(opg::schrodinger_residual(jittered, coeffs), opg::Error);

  std::vector<WaveField> mixed;
  for (double t : {0.0, 0.1, 0.2}) {
    WaveField f = I;
    f.time = t;
    mixed.push_back(f);
  }
  mixed[1].grid.x_min -= 1.0;
  CHECK_THROWS_AS(opg::schrodinger_residual(mixed, coeffs), opg::Error);
}

TEST_CASE("boundary decay is enforced") {
  const SpatialGrid narrow{-1.0, 1.5, 256};
  const auto I = WaveField::gaussian(narrow, 0.5, 0.5);  // fat tails at edges
  const auto coeffs = PDECoefficients::constant(0.0, 0.0, 1.0, narrow);
  CHECK_THROWS_AS(opg::solve_diffusion_fourier(coeffs, I, 0.5), opg::Error);
}

TEST_CASE("grid must be a power of two") {
  SpatialGrid bad{-4.0, 5.0, 1000};
  const auto I = WaveField::gaussian(bad, 0.5, 0.5);
  const auto coeffs = PDECoefficients::constant(0.0, 0.0, 1.0, bad);
  CHECK_THROWS_AS(opg::solve_diffusion_fourier(coeffs, I, 0.5), opg::Error);
}

TEST_CASE("spatially varying coefficients are rejected by the spectral route") {
  const auto I = WaveField::gaussian(kWide, 0.5, 0.5);
  auto coeffs = PDECoefficients::constant(0.0, 0.0, 1.0, kWide);
  coeffs.w[3] = 2.0;
  CHECK_THROWS_AS(opg::solve_diffusion_fourier(coeffs, I, 0.5), opg::Error);
}
