#pragma once

// Wave-packet transport for quadratic Hamiltonians: classical paths with their
// action, displaced solutions built on them, and a Cayley (Crank-Nicolson)
// grid propagator used as the independent check.
//
// H = 1/2 a^{ij} p_i p_j + 1/2 b_ij x^i x^j + c_i^j x^i p_j - f_i x^i + g^i p_i
// with the diagonal of c symmetrized as (x p + p x)/2.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "vortexpin/core.hpp"
#include "vortexpin/field_kit.hpp"
#include "vortexpin/mode_analysis.hpp"
#include "vortexpin/ode.hpp"
#include "vortexpin/quantum/gaussian.hpp"
#include "vortexpin/quantum/grid.hpp"

namespace vortexpin {

using Mat2 = std::array<std::array<double, 2>, 2>;
using Vec2 = std::array<double, 2>;

struct QuadraticCoefficients {
  Mat2 a{}, b{}, c{};  // c[i][j] multiplies x^i p_j
  Vec2 f{}, g{};
};

struct QuadraticHamiltonian {
  std::function<QuadraticCoefficients(double)> at;

  QuadraticCoefficients operator()(double t) const {
    QuadraticCoefficients q = at(t);
    if (q.a[0][1] != q.a[1][0] || q.b[0][1] != q.b[1][0])
      throw validation_error("quadratic Hamiltonian: a and b must be symmetric");
    return q;
  }
};

inline QuadraticHamiltonian constant_hamiltonian(const QuadraticCoefficients& q) {
  return {[q](double) { return q; }};
}

// ------------------------------------------------------------ classical path

struct PathSample {
  double t = 0.0;
  Vec2 xi{}, pi{};
  double S = 0.0;
  Vec2 dxi{}, dpi{};
  double dS = 0.0;
};

namespace detail {

inline void quadratic_flow(const QuadraticCoefficients& q, const Vec2& x, const Vec2& p, Vec2& dx, Vec2& dp,
                           double& dS) {
  for (int k = 0; k < 2; ++k) {
    dx[k] = q.g[k];
    dp[k] = q.f[k];
    for (int j = 0; j < 2; ++j) {
      dx[k] += q.a[k][j] * p[j] + q.c[j][k] * x[j];
      dp[k] += -q.b[k][j] * x[j] - q.c[k][j] * p[j];
    }
  }
  dS = 0.0;
  for (int i = 0; i < 2; ++i) {
    dS += q.g[i] * p[i];
    for (int j = 0; j < 2; ++j) dS += 0.5 * q.a[i][j] * p[i] * p[j] - 0.5 * q.b[i][j] * x[i] * x[j];
  }
}

}  // namespace detail

// Classical path with the action S(t) = int (1/2 a pi pi - 1/2 b xi xi + g pi) dt,
// sampled on a uniform grid and interpolated by cubic Hermite segments.
class ClassicalPath {
 public:
  std::vector<PathSample> samples;

  PathSample at(double t) const {
    if (samples.size() < 2) throw validation_error("classical path has fewer than two samples");
    const double t0 = samples.front().t, t1 = samples.back().t;
    const double eps = 1e-12 * std::max(1.0, std::fabs(t1));
    if (t < std::min(t0, t1) - eps || t > std::max(t0, t1) + eps)
      throw validation_error("time " + fmt17(t) + " outside the sampled classical path");
    const double h = (t1 - t0) / double(samples.size() - 1);
    std::size_t k = std::size_t(std::clamp((t - t0) / h, 0.0, double(samples.size() - 2)));
    const PathSample &A = samples[k], &B = samples[k + 1];
    const double s = (t - A.t) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    auto herm = [&](double a, double da, double b, double db) { return h00 * a + h10 * h * da + h01 * b + h11 * h * db; };
    PathSample r;
    r.t = t;
    for (int i = 0; i < 2; ++i) {
      r.xi[i] = herm(A.xi[i], A.dxi[i], B.xi[i], B.dxi[i]);
      r.pi[i] = herm(A.pi[i], A.dpi[i], B.pi[i], B.dpi[i]);
    }
    r.S = herm(A.S, A.dS, B.S, B.dS);
    return r;
  }
};

inline ClassicalPath classical_path_quadratic(const QuadraticHamiltonian& qh, const Vec2& xi0, const Vec2& pi0,
                                              std::array<double, 2> t_span, std::size_t n_samples,
                                              IntegratorConfig icfg = {1e-12, 1e-14}) {
  if (n_samples < 2) throw validation_error("classical path needs at least two samples");
  Dopri5<5> ode(icfg);
  auto rhs = [&](double t, const std::array<double, 5>& y, std::array<double, 5>& d) {
    Vec2 dx, dp;
    detail::quadratic_flow(qh(t), {y[0], y[1]}, {y[2], y[3]}, dx, dp, d[4]);
    d[0] = dx[0];
    d[1] = dx[1];
    d[2] = dp[0];
    d[3] = dp[1];
  };
  std::vector<double> grid(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    grid[i] = t_span[0] + (t_span[1] - t_span[0]) * double(i) / double(n_samples - 1);
  grid.back() = t_span[1];
  ClassicalPath path;
  ode.integrate(rhs, t_span[0], {xi0[0], xi0[1], pi0[0], pi0[1], 0.0}, grid,
                [&](double t, const std::array<double, 5>& y) {
                  PathSample s;
                  s.t = t;
                  s.xi = {y[0], y[1]};
                  s.pi = {y[2], y[3]};
                  s.S = y[4];
                  detail::quadratic_flow(qh(t), s.xi, s.pi, s.dxi, s.dpi, s.dS);
                  path.samples.push_back(s);
                });
  return path;
}

// psi(r, t) = exp(-i S / hbar) exp(i pi . r / hbar) psi0(r - xi, t)
inline cplx displaced_solution(const std::function<cplx(double, double, double)>& psi0, const ClassicalPath& path,
                               double x, double y, double t, double hbar = 1.0) {
  const PathSample s = path.at(t);
  const double ph = (-s.S + s.pi[0] * x + s.pi[1] * y) / hbar;
  return std::exp(kI * ph) * psi0(x - s.xi[0], y - s.xi[1], t);
}

// Displaced solution built on a gridded undriven solution; the space shift
// is applied spectrally.
inline WaveFunctionGrid displaced_grid(const WaveFunctionGrid& psi0, const PathSample& s, SpectralOps& ops,
                                       double hbar = 1.0) {
  std::vector<cplx> spec, shifted;
  ops.forward(psi0.values, spec);
  ops.inverse_with(spec, [&](double kx, double ky) { return std::exp(-kI * (kx * s.xi[0] + ky * s.xi[1])); },
                   shifted);
  WaveFunctionGrid out = psi0.like();
  for (std::size_t i = 0; i < psi0.nx; ++i)
    for (std::size_t j = 0; j < psi0.ny; ++j) {
      const double ph = (-s.S + s.pi[0] * psi0.x(i) + s.pi[1] * psi0.y(j)) / hbar;
      out.at(i, j) = std::exp(kI * ph) * shifted[i * psi0.ny + j];
    }
  out.update_norm();
  return out;
}

// ----------------------------------------------------------- grid propagator

struct PropagationReport {
  std::size_t steps = 0;
  std::size_t solver_iterations = 0;
  double max_norm_drift = 0.0;  // relative
};

// Crank-Nicolson step (1 + i dt H / 2 hbar) psi' = (1 - i dt H / 2 hbar) psi with
// H at the midpoint, solved by conjugate gradients on the normal equations.
class CayleyPropagator {
 public:
  CayleyPropagator(const QuadraticHamiltonian& qh, const WaveFunctionGrid& shape, double hbar = 1.0,
                   double cg_tol = 1e-13)
      : qh_(qh), ops_(shape), nx_(shape.nx), ny_(shape.ny), hbar_(hbar), tol_(cg_tol), xs_(nx_), ys_(ny_) {
    for (std::size_t i = 0; i < nx_; ++i) xs_[i] = shape.x(i);
    for (std::size_t j = 0; j < ny_; ++j) ys_[j] = shape.y(j);
  }

  SpectralOps& spectral() { return ops_; }

  // out = H(t) in
  void apply_h(const QuadraticCoefficients& q, const std::vector<cplx>& in, std::vector<cplx>& out) {
    const double hb = hbar_;
    ops_.forward(in, spec_);
    ops_.inverse_with(
        spec_,
        [&](double kx, double ky) {
          return 0.5 * hb * hb * (q.a[0][0] * kx * kx + 2.0 * q.a[0][1] * kx * ky + q.a[1][1] * ky * ky) +
                 hb * (q.g[0] * kx + q.g[1] * ky);
        },
        out);
    const bool offd = q.c[0][1] != 0.0 || q.c[1][0] != 0.0;
    const bool diag = q.c[0][0] != 0.0 || q.c[1][1] != 0.0;
    if (offd || diag) {
      ops_.inverse_with(spec_, [](double kx, double) { return kx; }, px_);  // -i d/dx in units of hbar
      ops_.inverse_with(spec_, [](double, double ky) { return ky; }, py_);
    }
    for (std::size_t i = 0; i < nx_; ++i) {
      const double x = xs_[i];
      for (std::size_t j = 0; j < ny_; ++j) {
        const double y = ys_[j];
        const std::size_t k = i * ny_ + j;
        double v = 0.5 * (q.b[0][0] * x * x + 2.0 * q.b[0][1] * x * y + q.b[1][1] * y * y) - q.f[0] * x - q.f[1] * y;
        cplx acc = out[k] + v * in[k];
        if (offd) acc += hb * (q.c[0][1] * x * py_[k] + q.c[1][0] * y * px_[k]);
        if (diag) acc += 0.5 * hb * (q.c[0][0] * x * px_[k] + q.c[1][1] * y * py_[k]);
        out[k] = acc;
      }
    }
    if (diag) {
      // the p x halves of the symmetrized diagonal terms
      tmp_.resize(in.size());
      for (int axis = 0; axis < 2; ++axis) {
        const double cd = q.c[axis][axis];
        if (cd == 0.0) continue;
        for (std::size_t i = 0; i < nx_; ++i)
          for (std::size_t j = 0; j < ny_; ++j) tmp_[i * ny_ + j] = (axis == 0 ? xs_[i] : ys_[j]) * in[i * ny_ + j];
        ops_.forward(tmp_, spec2_);
        ops_.inverse_with(spec2_, [axis](double kx, double ky) { return axis == 0 ? kx : ky; }, tmp2_);
        for (std::size_t k = 0; k < in.size(); ++k) out[k] += 0.5 * hb * cd * tmp2_[k];
      }
    }
  }

  // Strang-split step: every factor is the Cayley transform of one piece of
  // H, diagonal in real space, in Fourier space, or in a mixed (x, k_y) or
  // (k_x, y) representation. Needs a zero diagonal in c.
  void split_step(std::vector<cplx>& psi, double t, double dt) {
    const QuadraticCoefficients q = qh_(t + 0.5 * dt);
    if (q.c[0][0] != 0.0 || q.c[1][1] != 0.0)
      throw validation_error("split Cayley step needs a zero diagonal in c (use the full Cayley scheme)");
    const double hb = hbar_;
    auto cay = [](double tau_h) { return (1.0 - kI * tau_h) / (1.0 + kI * tau_h); };
    const double half = 0.25 * dt / hb, full = 0.5 * dt / hb;
    auto potential = [&] {
      for (std::size_t i = 0; i < nx_; ++i) {
        const double x = xs_[i];
        for (std::size_t j = 0; j < ny_; ++j) {
          const double y = ys_[j];
          const double v =
              0.5 * (q.b[0][0] * x * x + 2.0 * q.b[0][1] * x * y + q.b[1][1] * y * y) - q.f[0] * x - q.f[1] * y;
          psi[i * ny_ + j] *= cay(half * v);
        }
      }
    };
    auto cross = [&](bool forward) {
      // c_01 x p_y is diagonal in (x, k_y), c_10 y p_x in (k_x, y)
      auto xy = [&] {
        if (q.c[0][1] != 0.0)
          ops_.filter_y(psi, [&](std::size_t i, double ky) { return cay(half * hb * q.c[0][1] * xs_[i] * ky); });
      };
      auto yx = [&] {
        if (q.c[1][0] != 0.0)
          ops_.filter_x(psi, [&](double kx, std::size_t j) { return cay(half * hb * q.c[1][0] * ys_[j] * kx); });
      };
      if (forward) {
        xy();
        yx();
      } else {
        yx();
        xy();
      }
    };
    potential();
    cross(true);
    ops_.forward(psi, spec_);
    ops_.inverse_with(
        spec_,
        [&](double kx, double ky) {
          const double k = 0.5 * hb * hb * (q.a[0][0] * kx * kx + 2.0 * q.a[0][1] * kx * ky + q.a[1][1] * ky * ky) +
                           hb * (q.g[0] * kx + q.g[1] * ky);
          return cay(full * k);
        },
        psi);
    cross(false);
    potential();
  }

  // One step from t to t + dt, in place. Returns solver iterations.
  std::size_t step(std::vector<cplx>& psi, double t, double dt) {
    const QuadraticCoefficients q = qh_(t + 0.5 * dt);
    const double tau = 0.5 * dt / hbar_;
    const std::size_t n = psi.size();
    auto A = [&](const std::vector<cplx>& v, std::vector<cplx>& out, double sign) {
      apply_h(q, v, hv_);
      out.resize(n);
      for (std::size_t k = 0; k < n; ++k) out[k] = v[k] + sign * kI * tau * hv_[k];
    };
    std::vector<cplx> b, x(n), r(n), z, p, w;
    A(psi, b, -1.0);
    // Explicit guess psi' ~ (1 - 2 i tau H) psi = 2 b - psi.
    for (std::size_t k = 0; k < n; ++k) x[k] = 2.0 * b[k] - psi[k];
    A(x, w, 1.0);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - w[k];
    A(r, z, -1.0);
    p = z;
    double bn = 0.0, zz = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      bn += std::norm(b[k]);
      zz += std::norm(z[k]);
    }
    const double stop = tol_ * tol_ * bn;
    std::size_t it = 0;
    for (; it < 500; ++it) {
      double rr = 0.0;
      for (std::size_t k = 0; k < n; ++k) rr += std::norm(r[k]);
      if (rr <= stop) break;
      A(p, w, 1.0);
      double ww = 0.0;
      for (std::size_t k = 0; k < n; ++k) ww += std::norm(w[k]);
      const double alpha = zz / ww;
      for (std::size_t k = 0; k < n; ++k) {
        x[k] += alpha * p[k];
        r[k] -= alpha * w[k];
      }
      A(r, z, -1.0);
      double zz1 = 0.0;
      for (std::size_t k = 0; k < n; ++k) zz1 += std::norm(z[k]);
      const double beta = zz1 / zz;
      zz = zz1;
      for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    if (it == 500) throw numerical_error("Cayley step: conjugate gradients did not converge");
    psi.swap(x);
    return it;
  }

 private:
  QuadraticHamiltonian qh_;
  SpectralOps ops_;
  std::size_t nx_, ny_;
  double hbar_, tol_;
  std::vector<double> xs_, ys_;
  std::vector<cplx> spec_, spec2_, px_, py_, tmp_, tmp2_, hv_;
};

enum class CayleyScheme {
  Midpoint,    // one Cayley step per dt, second order
  TripleJump,  // symmetric composition of three Cayley steps, fourth order
  SplitTripleJump,  // the same composition of Strang-split Cayley steps, no linear solves
};

// Propagates psi over t_span with fixed dt (the last step is shortened to hit
// t_span[1]). The observer sees the state after every step.
inline WaveFunctionGrid grid_propagate(
    const QuadraticHamiltonian& qh, const WaveFunctionGrid& psi_init, std::array<double, 2> t_span, double dt,
    double hbar = 1.0, PropagationReport* report = nullptr,
    const std::function<void(double, const WaveFunctionGrid&)>& observer = nullptr,
    CayleyScheme scheme = CayleyScheme::SplitTripleJump) {
  if (!(dt > 0.0)) throw validation_error("grid_propagate: dt must be positive");
  CayleyPropagator prop(qh, psi_init, hbar);
  WaveFunctionGrid psi = psi_init;
  const double n0 = psi.compute_norm();
  PropagationReport rep;
  const double T = t_span[1] - t_span[0];
  const std::size_t nsteps = std::size_t(std::ceil(T / dt - 1e-9));
  const double cr = std::cbrt(2.0);
  const double g1 = 1.0 / (2.0 - cr), g2 = -cr / (2.0 - cr);
  for (std::size_t s = 0; s < nsteps; ++s) {
    const double t = t_span[0] + dt * double(s);
    const double h = (s + 1 == nsteps) ? t_span[1] - t : dt;
    if (scheme == CayleyScheme::Midpoint) {
      rep.solver_iterations += prop.step(psi.values, t, h);
    } else if (scheme == CayleyScheme::SplitTripleJump) {
      prop.split_step(psi.values, t, g1 * h);
      prop.split_step(psi.values, t + g1 * h, g2 * h);
      prop.split_step(psi.values, t + (g1 + g2) * h, g1 * h);
    } else {
      rep.solver_iterations += prop.step(psi.values, t, g1 * h);
      rep.solver_iterations += prop.step(psi.values, t + g1 * h, g2 * h);
      rep.solver_iterations += prop.step(psi.values, t + (g1 + g2) * h, g1 * h);
    }
    ++rep.steps;
    const double drift = std::fabs(psi.compute_norm() - n0) / n0;
    rep.max_norm_drift = std::max(rep.max_norm_drift, drift);
    if (drift > 1e-6) throw numerical_error("grid_propagate: norm drift " + fmt17(drift) + " exceeds 1e-6");
    if (observer) {
      psi.update_norm();
      observer(t + h, psi);
    }
  }
  psi.update_norm();
  if (report) *report = rep;
  return psi;
}

// ----------------------------------------------------- rotating vortex drive

// Rotating-frame Hamiltonian of the static vortex in the form shared with the
// classical normal-mode analysis.
inline QuadraticHamiltonian rotating_frame_hamiltonian(double mu, double nu, double Omega, double mass = 1.0) {
  const double w0 = mu * Omega, wc = nu * Omega;
  QuadraticCoefficients q;
  q.a = {{{1.0 / mass, 0.0}, {0.0, 1.0 / mass}}};
  q.b = {{{mass * (w0 * w0 / 4.0 - wc * Omega), 0.0}, {0.0, mass * (w0 * w0 / 4.0 + wc * Omega)}}};
  const double w = (Omega + w0) / 2.0;
  q.c = {{{0.0, -w}, {w, 0.0}}};
  return constant_hamiltonian(q);
}

// Nonrelativistic lab-frame Hamiltonian of a superposed vortex field: the
// wave's electric field from its scalar potential (no retardation, z = 0),
// the axial field in the symmetric gauge. Field strengths are accelerations.
inline QuadraticHamiltonian lab_frame_hamiltonian(const FieldConfig& cfg, double mass = 1.0) {
  if (cfg.kind != FieldKind::SuperposedVortex && cfg.kind != FieldKind::ModelVortex)
    throw validation_error("lab-frame Hamiltonian needs a model or superposed vortex field");
  const double A = cfg.amplitude_B * cfg.omega, s = cfg.sigma, w0 = cfg.b0;
  const auto terms = cfg.terms;
  const double omega = cfg.omega;
  return {[=](double t) {
    QuadraticCoefficients q;
    const double th = s * omega * t;
    const double kxx = s * A * std::cos(th), kxy = s * A * std::sin(th);
    q.a = {{{1.0 / mass, 0.0}, {0.0, 1.0 / mass}}};
    q.b = {{{mass * (w0 * w0 / 4.0 - kxx), -mass * kxy}, {-mass * kxy, mass * (w0 * w0 / 4.0 + kxx)}}};
    q.c = {{{0.0, -w0 / 2.0}, {w0 / 2.0, 0.0}}};
    cplx e = 0.0;
    for (const auto& k : terms) e += cplx(k.x, k.y) * std::exp(-kI * s * k.omega * t);
    q.f = {-mass * s * A * e.real(), mass * s * A * e.imag()};
    return q;
  }};
}

// Canonical momentum for the symmetric gauge: pi = m v + m omega_0 / 2 (-y, x).
inline Vec2 canonical_momentum(const Vec2& r, const Vec2& v, double omega_0, double mass = 1.0) {
  return {mass * (v[0] - 0.5 * omega_0 * r[1]), mass * (v[1] + 0.5 * omega_0 * r[0])};
}

// Ground Gaussian seen from the lab: the rotating-frame state carried around
// at omega/2, with its energy phase (spin term excluded).
struct LabGaussian {
  GaussianState g;
  double omega = 1.0;
  double energy = 0.0;
  double hbar = 1.0;

  cplx operator()(double x, double y, double t) const {
    const double ph = 0.5 * omega * t;
    const double c = std::cos(ph), s = std::sin(ph);
    return std::exp(-kI * energy * t / hbar) * g(x * c + y * s, y * c - x * s);
  }
};

inline LabGaussian lab_gaussian(const FieldConfig& cfg, double mass = 1.0, double hbar = 1.0) {
  if (cfg.sigma != 1) throw validation_error("lab Gaussian is built for helicity +1 (use the xy-swap image)");
  const double mu = cfg.b0 / cfg.omega, nu = cfg.amplitude_B / cfg.omega;
  LabGaussian L;
  L.g = gaussian_params(mu, nu, mass * cfg.omega / hbar, hbar);
  L.omega = cfg.omega;
  L.hbar = hbar;
  const ModeData md = mode_data(mu, nu, cfg.omega, mass);
  L.energy = hbar * md.Op() * 0.5 - md.minus_sign() * hbar * md.Om() * 0.5;
  return L;
}

}  // namespace vortexpin
