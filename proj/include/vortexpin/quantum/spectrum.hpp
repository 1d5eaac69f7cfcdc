#pragma once

// Transverse Landau-type levels in the rotating frame and the relativistic
// energies that solve the self-consistency with Omega = (E - p_z c) omega / m c^2.

#include <cmath>
#include <limits>

#include "vortexpin/core.hpp"
#include "vortexpin/mode_analysis.hpp"

namespace vortexpin {

struct LevelSpec {
  int n_plus = 0, n_minus = 0;
  int spin = 1;
  double p_z = 0.0;
};

inline void check_level(const LevelSpec& l) {
  if (l.n_plus < 0 || l.n_minus < 0) throw validation_error("level indices must be non-negative");
  if (l.spin != 1 && l.spin != -1) throw validation_error("spin must be +1 or -1");
}

// Ladder part of the transverse energy, zero-point terms included.
inline double orbital_energy(int n_plus, int n_minus, const ModeData& md, double hbar = 1.0) {
  if (md.stability == Stability::Unstable) throw validation_error("transverse energy needs a stable regime");
  return hbar * md.Op() * (n_plus + 0.5) - md.minus_sign() * hbar * md.Om() * (n_minus + 0.5);
}

inline double spin_shift(const ModeData& md, double hbar = 1.0) {
  const double omega_0 = md.mu * md.Omega;
  return hbar * (omega_0 / 2.0 + md.Omega / 4.0);
}

// md must carry the physical Omega. Marginal points with real frequencies
// (for example zero fields, where Omega_+ = Omega_- = Omega/2) are allowed.
inline double transverse_energy(const LevelSpec& level, const ModeData& md, double hbar = 1.0) {
  check_level(level);
  return orbital_energy(level.n_plus, level.n_minus, md, hbar) - spin_shift(md, hbar) * level.spin;
}

struct RelativisticInputs {
  double omega = 1.0, omega_c = 0.0, omega_0 = 0.0;
  double mass = 1.0, c = 1.0, hbar = 1.0;
};

struct LevelSolution {
  double E = 0.0;
  double E_perp = 0.0;
  double Omega = 0.0;
  int iterations = 0;
};

namespace detail {

inline bool level_residual(const LevelSpec& level, const RelativisticInputs& in, double E, double& F, double& Eperp,
                           double& Omega) {
  const double mc2 = in.mass * in.c * in.c;
  Omega = (E - level.p_z * in.c) * in.omega / mc2;
  if (!(Omega > 0.0)) return false;
  const double mu = in.omega_0 / Omega, nu = in.omega_c / Omega;
  if (std::fabs(1.0 + mu) <= kDegenerateMuTol) return false;
  if (classify_stability(mu, nu) == Stability::Unstable) return false;
  const ModeData md = mode_data(mu, nu, Omega, in.mass);
  Eperp = transverse_energy(level, md, in.hbar);
  const double pc = level.p_z * in.c;
  F = E * E - mc2 * mc2 - pc * pc - 2.0 * mc2 * Eperp;
  return std::isfinite(F);
}

}  // namespace detail

// Bracketed root of E^2 - m^2c^4 - p_z^2c^2 = 2 m c^2 E_perp(Omega(E)); the
// bracket is scanned outward from the free energy, then bisection narrows it
// and secant steps polish the root.
inline LevelSolution solve_relativistic_level(const LevelSpec& level, const RelativisticInputs& in,
                                              double rel_tol = 1e-12) {
  check_level(level);
  if (!(in.mass > 0.0) || !(in.omega > 0.0) || !(in.c > 0.0)) throw validation_error("bad relativistic inputs");
  const double mc2 = in.mass * in.c * in.c;
  const double Efree = std::hypot(mc2, level.p_z * in.c);
  const double scale = in.hbar * (in.omega + std::fabs(in.omega_0) + std::fabs(in.omega_c)) *
                       (level.n_plus + level.n_minus + 2.0);
  // Scan outward in both directions from Efree for the nearest sign change.
  const int kSteps = 4000;
  const double h = 4.0 * scale / kSteps;
  double lo = 0, hi = 0, Flo = 0, Fhi = 0;
  bool found = false;
  double Fa, Ep, Om;
  for (int k = 0; k < kSteps && !found; ++k) {
    for (int dir : {1, -1}) {
      const double a = Efree + dir * h * k, b = Efree + dir * h * (k + 1);
      double Fb;
      if (!detail::level_residual(level, in, a, Fa, Ep, Om) || !detail::level_residual(level, in, b, Fb, Ep, Om))
        continue;
      if (Fa == 0.0) {
        lo = hi = a;
        Flo = Fhi = 0.0;
        found = true;
        break;
      }
      if ((Fa < 0.0) != (Fb < 0.0)) {
        lo = std::min(a, b);
        hi = std::max(a, b);
        Flo = a < b ? Fa : Fb;
        Fhi = a < b ? Fb : Fa;
        found = true;
        break;
      }
    }
  }
  if (!found) throw numerical_error("solve_relativistic_level: no sign change in bracket");
  LevelSolution sol;
  int it = 0;
  while (hi - lo > rel_tol * std::fabs(hi) && it < 200) {
    // secant proposal, bisection when it leaves the bracket or stalls
    double m = (Fhi != Flo) ? hi - Fhi * (hi - lo) / (Fhi - Flo) : 0.5 * (lo + hi);
    if (!(m > lo && m < hi) || it % 3 == 2) m = 0.5 * (lo + hi);
    double Fm;
    if (!detail::level_residual(level, in, m, Fm, Ep, Om))
      throw numerical_error("solve_relativistic_level: unstable (mu, nu) inside the bracket");
    if (Fm == 0.0) {
      lo = hi = m;
      break;
    }
    if ((Fm < 0.0) == (Flo < 0.0)) {
      lo = m;
      Flo = Fm;
    } else {
      hi = m;
      Fhi = Fm;
    }
    ++it;
  }
  sol.E = 0.5 * (lo + hi);
  double F;
  if (!detail::level_residual(level, in, sol.E, F, sol.E_perp, sol.Omega))
    throw numerical_error("solve_relativistic_level: unstable (mu, nu) at the root");
  sol.iterations = it;
  return sol;
}

}  // namespace vortexpin
