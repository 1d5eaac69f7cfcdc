#pragma once

// Normal-mode structure of the transverse motion in the frame rotating at
// Omega/2: characteristic frequencies, stability, and classical mode
// amplitudes. All frequencies are measured in units of Omega through
// mu = omega_0/Omega and nu = omega_c/Omega.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <thread>
#include <vector>

#include "vortexpin/core.hpp"

namespace vortexpin {

enum class Stability { Stable, Marginal, Unstable };

inline const char* stability_name(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Marginal: return "marginal";
    case Stability::Unstable: return "unstable";
  }
  return "?";
}

struct FrequencySet {
  double omega = 1.0;
  double omega_c = 0.0;
  double omega_0 = 0.0;
  double calE = 1.0;
  double Omega = 1.0;
  double mu = 0.0;
  double nu = 0.0;
  double c = 1.0;
  double mass = 1.0;
};

inline double lightfront_energy(const Vec3& v, double c = 1.0) {
  const double v2 = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / (c * c);
  if (!(v2 < 1.0)) throw validation_error("lightfront_energy: |v| must be below c");
  return (1.0 - v[2] / c) / std::sqrt(1.0 - v2);
}

// Frequencies from absolute cyclotron frequencies and the light-front energy.
inline FrequencySet make_frequencies(double omega, double omega_c, double omega_0, double calE, double c = 1.0,
                                     double mass = 1.0) {
  if (!(omega > 0.0) || !(calE > 0.0)) throw validation_error("omega and light-front energy must be positive");
  FrequencySet f;
  f.omega = omega;
  f.omega_c = omega_c;
  f.omega_0 = omega_0;
  f.calE = calE;
  f.Omega = omega * calE;
  f.mu = omega_0 / f.Omega;
  f.nu = omega_c / f.Omega;
  f.c = c;
  f.mass = mass;
  return f;
}

// Frequencies from (mu, nu) at a given Omega.
inline FrequencySet frequencies_from_mu_nu(double mu, double nu, double omega, double calE, double c = 1.0,
                                           double mass = 1.0) {
  const double Om = omega * calE;
  return make_frequencies(omega, nu * Om, mu * Om, calE, c, mass);
}

inline std::array<cplx, 2> characteristic_frequencies(double mu, double nu) {
  const double R = std::sqrt(nu * nu + mu * mu * (1.0 + mu) * (1.0 + mu) / 4.0);
  const double base = (1.0 + mu) * (1.0 + mu) + mu * mu;
  const cplx rp = 0.5 * std::sqrt(cplx(base + 4.0 * R, 0.0));
  const cplx rm = 0.5 * std::sqrt(cplx(base - 4.0 * R, 0.0));
  return {rp, rm};
}

inline constexpr double kMarginalTol = 1e-12;

inline Stability classify_stability(double mu, double nu) {
  const double half = 0.5 + mu;
  if (half == 0.0) return nu == 0.0 ? Stability::Marginal : Stability::Unstable;
  const double d = 0.5 * std::fabs(half) - std::fabs(nu);
  if (std::fabs(d) <= kMarginalTol) return Stability::Marginal;
  return d > 0.0 ? Stability::Stable : Stability::Unstable;
}

// 4x4 generator of i dX/dt = X M for X = (alpha, beta, p_alpha, p_beta).
inline Eigen::Matrix4cd mode_matrix(const FrequencySet& f) {
  const double a = f.omega_0 * f.omega_0 / 4.0;
  const double b = f.Omega * f.omega_c;
  const double w = (f.Omega + f.omega_0) / 2.0;
  const double m = f.mass;
  Eigen::Matrix4cd M = Eigen::Matrix4cd::Zero();
  M(0, 1) = -kI * w;
  M(0, 2) = -kI * m * (a - b);
  M(1, 0) = kI * w;
  M(1, 3) = -kI * m * (a + b);
  M(2, 0) = kI / m;
  M(2, 3) = -kI * w;
  M(3, 1) = kI / m;
  M(3, 2) = kI * w;
  return M;
}

inline Eigen::Vector4cd mode_matrix_eigenvalues(const FrequencySet& f) {
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(mode_matrix(f), false);
  return es.eigenvalues();
}

// Stability read off the eigenvalues of the mode matrix: stable iff all four
// are real (imaginary parts below tol relative to Omega).
inline bool mode_matrix_bounded(const FrequencySet& f, double tol = 1e-7) {
  const auto ev = mode_matrix_eigenvalues(f);
  for (int i = 0; i < 4; ++i)
    if (std::fabs(ev[i].imag()) > tol * f.Omega) return false;
  return true;
}

struct ModeData {
  double mu = 0.0, nu = 0.0, Omega = 1.0, mass = 1.0;
  cplx r_plus, r_minus;
  cplx Omega_plus, Omega_minus;
  double s_plus = 0.0, s_minus = 0.0;
  double t_pp = 0.0, t_pm = 0.0, t_mp = 0.0, t_mm = 0.0;
  double eps = 1.0;
  double kappa_plus = std::numeric_limits<double>::quiet_NaN();
  double kappa_minus = std::numeric_limits<double>::quiet_NaN();
  double N_plus = std::numeric_limits<double>::quiet_NaN();
  double N_minus = std::numeric_limits<double>::quiet_NaN();
  Stability stability = Stability::Unstable;
  bool trojan = false;

  double rp() const { return r_plus.real(); }
  double rm() const { return r_minus.real(); }
  double Op() const { return Omega_plus.real(); }
  double Om() const { return Omega_minus.real(); }
  // Sign in front of the minus mode in the diagonal Hamiltonian.
  double minus_sign() const { return sgn_nonneg(0.5 + mu); }
};

inline constexpr double kDegenerateMuTol = 1e-9;

inline ModeData mode_data(double mu, double nu, double Omega = 1.0, double mass = 1.0) {
  if (std::fabs(1.0 + mu) <= kDegenerateMuTol)
    throw validation_error("DegenerateMu: |1+mu| <= 1e-9, use the uncoupled-oscillator modes");
  ModeData md;
  md.mu = mu;
  md.nu = nu;
  md.Omega = Omega;
  md.mass = mass;
  const auto r = characteristic_frequencies(mu, nu);
  md.r_plus = r[0];
  md.r_minus = r[1];
  md.Omega_plus = Omega * r[0];
  md.Omega_minus = Omega * r[1];
  const double R = std::sqrt(nu * nu + mu * mu * (1.0 + mu) * (1.0 + mu) / 4.0);
  md.s_plus = R + nu;
  md.s_minus = R - nu;
  const double q = (1.0 + mu) * (1.0 + mu);
  md.t_pp = std::sqrt(q + 2.0 * md.s_plus);
  md.t_pm = std::sqrt(q + 2.0 * md.s_minus);
  md.t_mp = std::sqrt(std::fabs(q - 2.0 * md.s_plus));
  md.t_mm = std::sqrt(std::fabs(q - 2.0 * md.s_minus));
  md.eps = sgn_nonneg(1.0 + mu);
  md.stability = classify_stability(mu, nu);
  md.trojan = 0.5 + mu > 0.0;
  if (md.stability == Stability::Stable) {
    const double rp = md.rp(), rm = md.rm();
    md.kappa_plus = (rp * rp + 0.25 + mu / 2.0 + nu) / ((1.0 + mu) * rp);
    md.kappa_minus = (rm * rm + 0.25 + mu / 2.0 - nu) / ((1.0 + mu) * rm);
    md.N_plus = 4.0 * mass * Omega * rp * (md.s_plus + md.s_minus);
    md.N_minus = 4.0 * mass * Omega * rm * (md.s_plus + md.s_minus);
  }
  return md;
}

struct UncoupledModes {
  double omega_alpha = 0.0;
  double omega_beta = 0.0;
  bool bounded = false;
};

// At mu = -1 the rotating-frame equations decouple into two oscillators.
inline UncoupledModes uncoupled_modes(double nu, double Omega) {
  UncoupledModes u;
  const double ka = 0.25 - nu, kb = 0.25 + nu;
  u.bounded = ka > 0.0 && kb > 0.0;
  u.omega_alpha = Omega * std::sqrt(std::fabs(ka));
  u.omega_beta = Omega * std::sqrt(std::fabs(kb));
  return u;
}

struct TransverseState {
  double alpha = 0.0, beta = 0.0, p_alpha = 0.0, p_beta = 0.0;
};

inline double hamiltonian_value(const TransverseState& s, const FrequencySet& f) {
  const double a = f.omega_0 * f.omega_0 / 4.0;
  const double b = f.Omega * f.omega_c;
  const double w = (f.Omega + f.omega_0) / 2.0;
  const double m = f.mass;
  return (s.p_alpha * s.p_alpha + s.p_beta * s.p_beta) / (2.0 * m) +
         m * ((a - b) * s.alpha * s.alpha + (a + b) * s.beta * s.beta) / 2.0 -
         w * (s.alpha * s.p_beta - s.beta * s.p_alpha);
}

// Linear coefficients of a_+ and a_- on (alpha, beta, p_alpha, p_beta).
inline std::array<std::array<cplx, 4>, 2> mode_amplitude_coefficients(const ModeData& md) {
  if (md.stability != Stability::Stable) throw validation_error("mode amplitudes need a stable regime");
  const double mO = md.mass * md.Omega / (1.0 + md.mu);
  const double np = 1.0 / std::sqrt(md.N_plus), nm = 1.0 / std::sqrt(md.N_minus);
  std::array<std::array<cplx, 4>, 2> c{};
  c[0][0] = np * md.t_pp * (-mO * md.s_minus);
  c[0][1] = np * (-kI * md.eps * md.t_pm * mO * md.s_plus);
  c[0][2] = np * (-kI * md.eps * md.t_pm);
  c[0][3] = np * md.t_pp;
  c[1][0] = nm * md.t_mm * (mO * md.s_plus);
  c[1][1] = nm * (kI * md.eps * md.t_mp * (-mO * md.s_minus));
  c[1][2] = nm * (kI * md.eps * md.t_mp);
  c[1][3] = nm * md.t_mm;
  return c;
}

inline std::array<cplx, 2> mode_amplitudes(const TransverseState& s, const ModeData& md) {
  const auto c = mode_amplitude_coefficients(md);
  const std::array<double, 4> x{s.alpha, s.beta, s.p_alpha, s.p_beta};
  std::array<cplx, 2> a{};
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 4; ++i) a[k] += c[k][i] * x[i];
  return a;
}

// Poisson bracket {F, G} of two linear forms with coefficient rows on
// (alpha, beta, p_alpha, p_beta).
inline cplx poisson_bracket(const std::array<cplx, 4>& F, const std::array<cplx, 4>& G) {
  return F[0] * G[2] - F[2] * G[0] + F[1] * G[3] - F[3] * G[1];
}

// ------------------------------------------------------------- stability map

struct StabilityCell {
  double mu = 0.0, nu = 0.0;
  Stability cls = Stability::Unstable;
  cplx r_plus, r_minus;
};

// Row-major raster over (mu index, nu index), filled in parallel with a
// deterministic layout.
inline std::vector<StabilityCell> stability_map(std::array<double, 2> mu_range, std::array<double, 2> nu_range,
                                                std::size_t resolution, unsigned threads = 0) {
  if (resolution < 2) throw validation_error("stability_map: resolution must be >= 2");
  std::vector<StabilityCell> cells(resolution * resolution);
  const double dmu = (mu_range[1] - mu_range[0]) / double(resolution - 1);
  const double dnu = (nu_range[1] - nu_range[0]) / double(resolution - 1);
  auto fill_rows = [&](std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i < i1; ++i) {
      const double mu = mu_range[0] + dmu * double(i);
      for (std::size_t j = 0; j < resolution; ++j) {
        const double nu = nu_range[0] + dnu * double(j);
        StabilityCell& c = cells[i * resolution + j];
        c.mu = mu;
        c.nu = nu;
        c.cls = classify_stability(mu, nu);
        const auto r = characteristic_frequencies(mu, nu);
        c.r_plus = r[0];
        c.r_minus = r[1];
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = unsigned(std::min<std::size_t>(threads, resolution));
  if (threads <= 1) {
    fill_rows(0, resolution);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (resolution + threads - 1) / threads;
    for (unsigned k = 0; k < threads; ++k) {
      const std::size_t a = k * chunk, b = std::min(resolution, a + chunk);
      if (a < b) pool.emplace_back(fill_rows, a, b);
    }
    for (auto& th : pool) th.join();
  }
  return cells;
}

struct StabilityCrossCheck {
  std::size_t stable = 0, marginal = 0, unstable = 0;
  std::size_t disagreements = 0;  // eigenvalue reality of the mode matrix vs the inequality
};

// Marginal cells count as bounded. The frequencies are taken at Omega = 1.
inline StabilityCrossCheck cross_check_stability(const std::vector<StabilityCell>& cells) {
  StabilityCrossCheck r;
  for (const auto& c : cells) {
    switch (c.cls) {
      case Stability::Stable: ++r.stable; break;
      case Stability::Marginal: ++r.marginal; break;
      case Stability::Unstable: ++r.unstable; break;
    }
    const bool bounded = mode_matrix_bounded(frequencies_from_mu_nu(c.mu, c.nu, 1.0, 1.0));
    if (bounded != (c.cls != Stability::Unstable)) ++r.disagreements;
  }
  return r;
}

}  // namespace vortexpin
