#include "opiniongames/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

namespace opg {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

double SpatialGrid::xi(int m) const {
  const int folded = m <= n_x / 2 ? m : m - n_x;
  return 2.0 * std::numbers::pi * folded / (x_max - x_min);
}

WaveField WaveField::gaussian(const SpatialGrid& grid, double center,
                              double sigma0, double amplitude) {
  WaveField f;
  f.grid = grid;
  f.values.resize(grid.n_x);
  for (int j = 0; j < grid.n_x; ++j) {
    const double z = (grid.x(j) - center) / sigma0;
    f.values[j] = amplitude * std::exp(-0.5 * z * z);
  }
  return f;
}

PDECoefficients PDECoefficients::constant(double v, double z, double w,
                                          const SpatialGrid& grid) {
  PDECoefficients c;
  c.v.assign(grid.n_x, v);
  c.z.assign(grid.n_x, z);
  c.w.assign(grid.n_x, w);
  return c;
}

double wick_rhs(const DerivBundle& db) {
  if (std::abs(db.f_xx) < 1e-12) {
    std::ostringstream msg;
    msg << "singular curvature: |f_xx| = " << std::abs(db.f_xx) << " < 1e-12";
    fail(ErrorKind::SingularCurvature, msg.str());
  }
  return db.f_x * db.f_x / (db.f_xx * db.f_xx) - db.f;
}

namespace {

void check_grid(const SpatialGrid& grid) {
  if (!is_power_of_two(grid.n_x)) {
    std::ostringstream msg;
    msg << "grid size n_x=" << grid.n_x << " must be a power of two";
    fail(ErrorKind::GridMismatch, msg.str());
  }
  if (!(grid.x_max > grid.x_min)) {
    fail(ErrorKind::GridMismatch, "grid: x_max must exceed x_min");
  }
}

bool same_grid(const SpatialGrid& a, const SpatialGrid& b) {
  return a.n_x == b.n_x && a.x_min == b.x_min && a.x_max == b.x_max;
}

// FFTW planning is not thread-safe; execution is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::complex<double>> run_fft(
    const std::vector<std::complex<double>>& in, int direction) {
  const int n = static_cast<int>(in.size());
  std::vector<std::complex<double>> out(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_1d(
        n,
        reinterpret_cast<fftw_complex*>(
            const_cast<std::complex<double>*>(in.data())),
        reinterpret_cast<fftw_complex*>(out.data()), direction,
        FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> fft_forward(
    const std::vector<std::complex<double>>& in) {
  return run_fft(in, FFTW_FORWARD);
}

std::vector<std::complex<double>> fft_inverse(
    const std::vector<std::complex<double>>& in) {
  auto out = run_fft(in, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(in.size());
  for (auto& v : out) v *= scale;
  return out;
}

WaveField transition_wave(const WaveField& I, const std::vector<double>& v,
                          double s) {
  check_grid(I.grid);
  if (v.size() != I.values.size()) {
    fail(ErrorKind::GridMismatch, "transition_wave: v sampled on another grid");
  }
  WaveField out;
  out.grid = I.grid;
  out.time = I.time + s;
  out.values.resize(I.values.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double arg = s * v[j];
    if (!(arg < 700.0)) {
      std::ostringstream msg;
      msg << "transition_wave overflow: s*v = " << arg << " at grid index "
          << j;
      fail(ErrorKind::Overflow, msg.str());
    }
    out.values[j] = I.values[j] * std::exp(arg);
  }
  return out;
}

WaveField solve_diffusion_fourier(const PDECoefficients& coeffs,
                                  const WaveField& I, double s) {
  check_grid(I.grid);
  const std::size_t n = I.values.size();
  if (coeffs.v.size() != n || coeffs.z.size() != n || coeffs.w.size() != n) {
    fail(ErrorKind::GridMismatch, "diffusion: coefficient grids disagree");
  }
  auto require_constant = [&](const std::vector<double>& c, const char* name) {
    for (double val : c) {
      if (val != c.front()) {
        std::ostringstream msg;
        msg << "diffusion: coefficient " << name
            << " is not spatially constant; the spectral route only covers "
               "the separable case";
        fail(ErrorKind::Domain, msg.str());
      }
    }
    return c.front();
  };
  const double v = require_constant(coeffs.v, "v");
  const double z = require_constant(coeffs.z, "z");
  const double w = require_constant(coeffs.w, "w");
  if (w < 0.0) fail(ErrorKind::Domain, "diffusion: w must be >= 0");

  const double edge =
      std::max(std::abs(I.values.front()), std::abs(I.values.back()));
  if (edge >= 1e-10) {
    std::ostringstream msg;
    msg << "diffusion: field magnitude " << edge
        << " at the grid boundary; periodic transform would alias";
    fail(ErrorKind::BoundaryDecay, msg.str());
  }

  auto spectrum = fft_forward(I.values);
  for (std::size_t m = 0; m < n; ++m) {
    const double xi = I.grid.xi(static_cast<int>(m));
    const std::complex<double> rate(w * xi * xi - v, -z * xi);
    spectrum[m] *= std::exp(-s * rate);
  }
  WaveField out;
  out.grid = I.grid;
  out.time = I.time + s;
  out.values = fft_inverse(spectrum);
  return out;
}

double schrodinger_residual(const std::vector<WaveField>& series,
                            const PDECoefficients& coeffs) {
  if (series.size() < 3) {
    fail(ErrorKind::GridMismatch, "residual: need at least 3 time slices");
  }
  const SpatialGrid& grid = series.front().grid;
  check_grid(grid);
  const std::size_t n = series.front().values.size();
  if (coeffs.v.size() != n || coeffs.z.size() != n || coeffs.w.size() != n) {
    fail(ErrorKind::GridMismatch, "residual: coefficient grids disagree");
  }
  const double dt = series[1].time - series[0].time;
  for (std::size_t k = 0; k + 1 < series.size(); ++k) {
    if (!same_grid(series[k].grid, grid) || series[k].values.size() != n) {
      fail(ErrorKind::GridMismatch, "residual: inconsistent field grids");
    }
    const double step = series[k + 1].time - series[k].time;
    if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      fail(ErrorKind::GridMismatch, "residual: time slices not uniform");
    }
  }

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 1; k + 1 < series.size(); ++k) {
    auto spectrum = fft_forward(series[k].values);
    auto d1 = spectrum;
    auto d2 = spectrum;
    for (std::size_t m = 0; m < n; ++m) {
      const double xi = grid.xi(static_cast<int>(m));
      d1[m] *= std::complex<double>(0.0, xi);
      d2[m] *= -xi * xi;
    }
    const auto psi_x = fft_inverse(d1);
    const auto psi_xx = fft_inverse(d2);
    for (std::size_t j = 0; j < n; ++j) {
      const std::complex<double> dpsi_ds =
          (series[k + 1].values[j] - series[k - 1].values[j]) / (2.0 * dt);
      const std::complex<double> r = dpsi_ds - coeffs.v[j] * series[k].values[j] -
                                     coeffs.z[j] * psi_x[j] -
                                     coeffs.w[j] * psi_xx[j];
      sum += std::norm(r);
      ++count;
    }
  }
  return std::sqrt(sum / static_cast<double>(count));
}

FieldMoments field_moments(const WaveField& field) {
  FieldMoments m;
  const double dx = field.grid.dx();
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t j = 0; j < field.values.size(); ++j) {
    const double w = std::abs(field.values[j]) * dx;
    const double x = field.grid.x(static_cast<int>(j));
    m.mass += w;
    m1 += w * x;
    m2 += w * x * x;
  }
  if (m.mass > 0.0) {
    m.mean = m1 / m.mass;
    m.variance = m2 / m.mass - m.mean * m.mean;
  }
  return m;
}

}  // namespace opg
