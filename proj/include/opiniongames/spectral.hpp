#pragma once

#include <complex>
#include <vector>

#include "opiniongames/equilibrium.hpp"
#include "opiniongames/errors.hpp"

namespace opg {

/// Uniform periodic 1-D grid over [x_min, x_max): n_x points, power of two.
struct SpatialGrid {
  double x_min = -4.0;
  double x_max = 5.0;
  int n_x = 1024;

  double dx() const { return (x_max - x_min) / n_x; }
  double x(int j) const { return x_min + j * dx(); }
  /// Angular frequency of FFT bin m (negative in the upper half).
  double xi(int m) const;
};

bool is_power_of_two(int v);

struct WaveField {
  SpatialGrid grid;
  std::vector<std::complex<double>> values;
  double time = 0.0;

  static WaveField gaussian(const SpatialGrid& grid, double center,
                            double sigma0, double amplitude = 1.0);
};

/// Spatially sampled coefficients of the generalized diffusion equation
///   dPsi/ds = v Psi + z dPsi/dx + w d2Psi/dx2,  w >= 0.
struct PDECoefficients {
  std::vector<double> v;
  std::vector<double> z;
  std::vector<double> w;

  static PDECoefficients constant(double v, double z, double w,
                                  const SpatialGrid& grid);
};

/// v = f_x^2 / f_xx^2 - f. Throws ErrorKind::SingularCurvature for |f_xx|
/// below 1e-12.
double wick_rhs(const DerivBundle& db);

/// Pointwise evolution Psi = I * exp(s v(x)) for the transport-free equation.
WaveField transition_wave(const WaveField& I, const std::vector<double>& v,
                          double s);

std::vector<std::complex<double>> fft_forward(
    const std::vector<std::complex<double>>& in);
std::vector<std::complex<double>> fft_inverse(
    const std::vector<std::complex<double>>& in);

/// Spectral solution for spatially constant v, z, w:
///   Psi_hat(xi) = I_hat(xi) exp(-s [w xi^2 - i z xi - v]).
/// Preconditions: coefficients constant on the grid, |I| < 1e-10 at both grid
/// ends (ErrorKind::BoundaryDecay otherwise).
WaveField solve_diffusion_fourier(const PDECoefficients& coeffs,
                                  const WaveField& I, double s);

/// Discrete residual || dPsi/ds - v Psi - z Psi_x - w Psi_xx ||_RMS over the
/// interior time slices, with central differences in s and spectral
/// derivatives in x. Requires >= 3 uniformly spaced slices on one grid.
double schrodinger_residual(const std::vector<WaveField>& series,
                            const PDECoefficients& coeffs);

/// Mean and variance of |Psi| treated as an (unnormalized) density.
struct FieldMoments {
  double mass = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};
FieldMoments field_moments(const WaveField& field);

}  // namespace opg
