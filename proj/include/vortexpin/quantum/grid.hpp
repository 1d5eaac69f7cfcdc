#pragma once

// Periodic 2D grids for wave functions, with FFT-based derivatives.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vortexpin/core.hpp"
#include "vortexpin/quantum/gaussian.hpp"

namespace vortexpin {

// values[i * ny + j] sits at x_i = cx - ex + 2 ex i / nx, y_j likewise.
struct WaveFunctionGrid {
  std::size_t nx = 0, ny = 0;
  double extent_x = 0.0, extent_y = 0.0;  // half-widths
  double center_x = 0.0, center_y = 0.0;
  std::vector<cplx> values;
  double norm = 0.0;

  WaveFunctionGrid() = default;
  WaveFunctionGrid(std::size_t nx_, std::size_t ny_, double ex, double ey, double cx = 0.0, double cy = 0.0)
      : nx(nx_), ny(ny_), extent_x(ex), extent_y(ey), center_x(cx), center_y(cy), values(nx_ * ny_, 0.0) {
    if (nx < 4 || ny < 4) throw validation_error("grid needs at least 4 points per axis");
    if (!(ex > 0.0) || !(ey > 0.0)) throw validation_error("grid extent must be positive");
  }

  double dx() const { return 2.0 * extent_x / double(nx); }
  double dy() const { return 2.0 * extent_y / double(ny); }
  double x(std::size_t i) const { return center_x - extent_x + dx() * double(i); }
  double y(std::size_t j) const { return center_y - extent_y + dy() * double(j); }
  cplx& at(std::size_t i, std::size_t j) { return values[i * ny + j]; }
  const cplx& at(std::size_t i, std::size_t j) const { return values[i * ny + j]; }

  double compute_norm() const {
    double s = 0.0;
    for (const auto& v : values) s += std::norm(v);
    return s * dx() * dy();
  }
  void update_norm() { norm = compute_norm(); }

  WaveFunctionGrid like() const {
    WaveFunctionGrid g = *this;
    std::fill(g.values.begin(), g.values.end(), cplx(0.0));
    g.norm = 0.0;
    return g;
  }
};

inline WaveFunctionGrid sample_grid(const std::function<cplx(double, double)>& f, std::size_t nx, std::size_t ny,
                                    double ex, double ey, double cx = 0.0, double cy = 0.0) {
  WaveFunctionGrid g(nx, ny, ex, ey, cx, cy);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) g.at(i, j) = f(g.x(i), g.y(j));
  g.update_norm();
  return g;
}

inline cplx inner(const WaveFunctionGrid& a, const WaveFunctionGrid& b) {
  cplx s = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) s += std::conj(a.values[k]) * b.values[k];
  return s * a.dx() * a.dy();
}

inline double l2_norm(const WaveFunctionGrid& a) { return std::sqrt(a.compute_norm()); }

inline double l2_distance(const WaveFunctionGrid& a, const WaveFunctionGrid& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) s += std::norm(a.values[k] - b.values[k]);
  return std::sqrt(s * a.dx() * a.dy());
}

inline std::array<double, 2> centroid(const WaveFunctionGrid& g) {
  double s = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      const double p = std::norm(g.at(i, j));
      s += p;
      sx += p * g.x(i);
      sy += p * g.y(j);
    }
  return {sx / s, sy / s};
}

// FFTW plans bound to one grid shape. The 2D transform runs as contiguous
// row transforms around a blocked transpose, so the spectrum is stored with
// the ky index slowest: spec[jy * nx + ix]. Plans use FFTW_ESTIMATE, which
// keeps results reproducible from run to run. Not copyable; plan creation is
// not thread-safe, so build these outside parallel regions.
class SpectralOps {
 public:
  SpectralOps(std::size_t nx, std::size_t ny, double dx, double dy) : nx_(nx), ny_(ny), kx_(nx), ky_(ny) {
    a_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nx * ny));
    b_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nx * ny));
    if (!a_ || !b_) throw numerical_error("fftw_malloc failed");
    const int nyi = int(ny), nxi = int(nx);
    // along y for each x row of the natural layout, and along x after the transpose
    fy_ = fftw_plan_many_dft(1, &nyi, nxi, a_, nullptr, 1, nyi, a_, nullptr, 1, nyi, FFTW_FORWARD, FFTW_ESTIMATE);
    iy_ = fftw_plan_many_dft(1, &nyi, nxi, a_, nullptr, 1, nyi, a_, nullptr, 1, nyi, FFTW_BACKWARD, FFTW_ESTIMATE);
    fx_ = fftw_plan_many_dft(1, &nxi, nyi, b_, nullptr, 1, nxi, b_, nullptr, 1, nxi, FFTW_FORWARD, FFTW_ESTIMATE);
    ix_ = fftw_plan_many_dft(1, &nxi, nyi, b_, nullptr, 1, nxi, b_, nullptr, 1, nxi, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (std::size_t i = 0; i < nx; ++i) kx_[i] = wavenumber(i, nx, dx);
    for (std::size_t j = 0; j < ny; ++j) ky_[j] = wavenumber(j, ny, dy);
  }
  explicit SpectralOps(const WaveFunctionGrid& g) : SpectralOps(g.nx, g.ny, g.dx(), g.dy()) {}
  SpectralOps(const SpectralOps&) = delete;
  SpectralOps& operator=(const SpectralOps&) = delete;
  ~SpectralOps() {
    for (auto p : {fy_, iy_, fx_, ix_}) fftw_destroy_plan(p);
    fftw_free(a_);
    fftw_free(b_);
  }

  const std::vector<double>& kx() const { return kx_; }
  const std::vector<double>& ky() const { return ky_; }

  void forward(const std::vector<cplx>& in, std::vector<cplx>& out) {
    cplx* a = reinterpret_cast<cplx*>(a_);
    std::copy(in.begin(), in.end(), a);
    fftw_execute(fy_);
    transpose(a, reinterpret_cast<cplx*>(b_), nx_, ny_);
    fftw_execute(fx_);
    const cplx* b = reinterpret_cast<cplx*>(b_);
    out.assign(b, b + nx_ * ny_);
  }

  // out = IFFT(mult(kx, ky) * spec), normalized.
  template <class Mult>
  void inverse_with(const std::vector<cplx>& spec, Mult&& mult, std::vector<cplx>& out) {
    cplx* b = reinterpret_cast<cplx*>(b_);
    const double s = 1.0 / double(nx_ * ny_);
    for (std::size_t j = 0; j < ny_; ++j)
      for (std::size_t i = 0; i < nx_; ++i) b[j * nx_ + i] = spec[j * nx_ + i] * (s * mult(kx_[i], ky_[j]));
    fftw_execute(ix_);
    cplx* a = reinterpret_cast<cplx*>(a_);
    transpose(b, a, ny_, nx_);
    fftw_execute(iy_);
    out.assign(a, a + nx_ * ny_);
  }

  // v <- IFFT_y(mult(i, ky) * FFT_y(v)) with the x index kept in real space.
  template <class Mult>
  void filter_y(std::vector<cplx>& v, Mult&& mult) {
    cplx* a = reinterpret_cast<cplx*>(a_);
    std::copy(v.begin(), v.end(), a);
    fftw_execute(fy_);
    const double s = 1.0 / double(ny_);
    for (std::size_t i = 0; i < nx_; ++i)
      for (std::size_t j = 0; j < ny_; ++j) a[i * ny_ + j] *= s * mult(i, ky_[j]);
    fftw_execute(iy_);
    std::copy(a, a + nx_ * ny_, v.begin());
  }

  // v <- IFFT_x(mult(kx, j) * FFT_x(v)) with the y index kept in real space.
  template <class Mult>
  void filter_x(std::vector<cplx>& v, Mult&& mult) {
    cplx* b = reinterpret_cast<cplx*>(b_);
    transpose(v.data(), b, nx_, ny_);
    fftw_execute(fx_);
    const double s = 1.0 / double(nx_);
    for (std::size_t j = 0; j < ny_; ++j)
      for (std::size_t i = 0; i < nx_; ++i) b[j * nx_ + i] *= s * mult(kx_[i], j);
    fftw_execute(ix_);
    transpose(b, v.data(), ny_, nx_);
  }

  // Spectral gradient, Nyquist modes dropped.
  void gradient(const std::vector<cplx>& f, std::vector<cplx>& fx, std::vector<cplx>& fy) {
    forward(f, spec_);
    inverse_with(spec_, [](double k, double) { return kI * k; }, fx);
    inverse_with(spec_, [](double, double k) { return kI * k; }, fy);
  }

 private:
  static double wavenumber(std::size_t i, std::size_t n, double d) {
    const long m = long(i) <= long(n) / 2 ? long(i) : long(i) - long(n);
    if (2 * i == n) return 0.0;
    return 2.0 * kPi * double(m) / (double(n) * d);
  }

  // dst[c * rows + r] = src[r * cols + c], in cache-sized tiles
  static void transpose(const cplx* src, cplx* dst, std::size_t rows, std::size_t cols) {
    constexpr std::size_t B = 32;
    for (std::size_t r0 = 0; r0 < rows; r0 += B)
      for (std::size_t c0 = 0; c0 < cols; c0 += B) {
        const std::size_t r1 = std::min(rows, r0 + B), c1 = std::min(cols, c0 + B);
        for (std::size_t r = r0; r < r1; ++r)
          for (std::size_t c = c0; c < c1; ++c) dst[c * rows + r] = src[r * cols + c];
      }
  }

  std::size_t nx_, ny_;
  fftw_complex *a_ = nullptr, *b_ = nullptr;
  fftw_plan fy_ = nullptr, iy_ = nullptr, fx_ = nullptr, ix_ = nullptr;
  std::vector<double> kx_, ky_;
  std::vector<cplx> spec_;
};

// op applied to a sampled wave function by spectral differentiation.
inline WaveFunctionGrid apply_operator(const LinearOperator& op, const WaveFunctionGrid& psi, SpectralOps& ops,
                                       double hbar = 1.0) {
  std::vector<cplx> fx, fy;
  ops.gradient(psi.values, fx, fy);
  WaveFunctionGrid out = psi.like();
  const cplx mih = -kI * hbar;
  for (std::size_t i = 0; i < psi.nx; ++i)
    for (std::size_t j = 0; j < psi.ny; ++j) {
      const std::size_t k = i * psi.ny + j;
      out.values[k] = op.c[0] * psi.x(i) * psi.values[k] + op.c[1] * psi.y(j) * psi.values[k] +
                      op.c[2] * mih * fx[k] + op.c[3] * mih * fy[k];
    }
  out.update_norm();
  return out;
}

// Default half-width: 8 widths of the narrower Gaussian axis.
inline double default_extent(const GaussianState& g) { return 8.0 / std::sqrt(std::min(g.q_x, g.q_y)); }

inline WaveFunctionGrid sample_state(const GaussianState& g, std::size_t n, double extent = 0.0) {
  if (extent <= 0.0) extent = default_extent(g);
  return sample_grid([&](double x, double y) { return g(x, y); }, n, n, extent, extent);
}

struct AnnihilationReport {
  double grid_residual = 0.0;    // max over +- of |a psi| / |psi|
  double coefficient_residual = 0.0;  // max |x, y coefficients| of a G
  double points_per_width = 0.0;
};

// Both ladder operators applied to the ground Gaussian, on the grid and as
// coefficient identities.
inline AnnihilationReport annihilation_residual(const GaussianState& g, const ModeData& md, std::size_t n = 256,
                                                double extent = 0.0) {
  if (extent <= 0.0) extent = default_extent(g);
  AnnihilationReport r;
  const double width = 1.0 / std::sqrt(std::min(g.q_x, g.q_y));
  r.points_per_width = width / (2.0 * extent / double(n));
  if (r.points_per_width < 16.0 - 1e-9)
    throw validation_error("annihilation_residual: under-resolved grid (" + fmt17(r.points_per_width) +
                           " points per width, need 16)");
  const auto ops = ladder_operators(md, g.hbar);
  const WaveFunctionGrid psi = sample_state(g, n, extent);
  SpectralOps sp(psi);
  const double np = l2_norm(psi);
  for (const auto& op : ops) {
    r.grid_residual = std::max(r.grid_residual, l2_norm(apply_operator(op, psi, sp, g.hbar)) / np);
    const auto e = gaussian_image(op, g);
    // the coefficients carry units of sqrt(m Omega / hbar) / length
    r.coefficient_residual = std::max({r.coefficient_residual, std::abs(e[0]), std::abs(e[1])});
  }
  return r;
}

// Text snapshot: one header line, then "i,j,re,im" rows.
inline std::string snapshot_text(const WaveFunctionGrid& g, double t) {
  std::string out = "# nx=" + std::to_string(g.nx) + " ny=" + std::to_string(g.ny) + " extent=" + fmt17(g.extent_x) +
                    "," + fmt17(g.extent_y) + " center=" + fmt17(g.center_x) + "," + fmt17(g.center_y) +
                    " t=" + fmt17(t) + "\n";
  out += "i,j,re,im\n";
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      const cplx v = g.at(i, j);
      out += std::to_string(i) + "," + std::to_string(j) + "," + fmt17(v.real()) + "," + fmt17(v.imag()) + "\n";
    }
  return out;
}

}  // namespace vortexpin
