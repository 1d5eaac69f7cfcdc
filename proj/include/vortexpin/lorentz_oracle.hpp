#pragma once

// Direct numerical integration of the relativistic Lorentz equations in proper
// time, used as the independent check of the closed forms and as the engine
// for moving-vortex transport.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vortexpin/core.hpp"
#include "vortexpin/field_kit.hpp"
#include "vortexpin/ode.hpp"
#include "vortexpin/trajectory_engine.hpp"

namespace vortexpin {

struct WorldlineState {
  double theta = 0.0, xi = 0.0, eta = 0.0, zeta = 0.0;
  double u0 = 1.0, ux = 0.0, uy = 0.0, uz = 0.0;

  static WorldlineState from_velocity(const Vec3& r, const Vec3& v, double t = 0.0) {
    const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if (!(v2 < 1.0)) throw validation_error("initial speed must be below c");
    const double g = 1.0 / std::sqrt(1.0 - v2);
    return {t, r[0], r[1], r[2], g, g * v[0], g * v[1], g * v[2]};
  }

  std::array<double, 8> pack() const { return {theta, xi, eta, zeta, u0, ux, uy, uz}; }
  static WorldlineState unpack(const std::array<double, 8>& s) {
    return {s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]};
  }
  double norm_defect() const { return u0 * u0 - ux * ux - uy * uy - uz * uz - 1.0; }
};

// Whether the field depends on t - z only with the null-field structure that
// conserves the light-front energy and the second constant of motion.
inline bool lightfront_invariants_hold(FieldKind k) {
  return k == FieldKind::ModelVortex || k == FieldKind::SuperposedVortex;
}

inline TrajectoryRow row_from_state(double tau, const WorldlineState& s) {
  TrajectoryRow r;
  r.tau = tau;
  r.t = s.theta;
  r.x = s.xi;
  r.y = s.eta;
  r.z = s.zeta;
  r.ux = s.ux;
  r.uy = s.uy;
  r.uz = s.uz;
  r.u0 = s.u0;
  r.lf_energy = s.u0 - s.uz;
  r.const2 = s.uz - (s.ux * s.ux + s.uy * s.uy) / (2.0 * r.lf_energy);
  return r;
}

inline std::vector<double> uniform_grid(double a, double b, std::size_t n) {
  if (n < 2) throw validation_error("need at least two samples");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * double(i) / double(n - 1);
  g.back() = b;
  return g;
}

// Integration state: the eight world-line components followed by the
// light-front pair s = theta - zeta and w = u0 - uz. Carrying s and w
// separately keeps the wave phase accurate when theta and zeta grow large.
using LorentzState = std::array<double, 10>;

inline LorentzState lorentz_state(const WorldlineState& w) {
  return {w.theta, w.xi, w.eta, w.zeta, w.u0, w.ux, w.uy, w.uz, w.theta - w.zeta, w.u0 - w.uz};
}

inline WorldlineState worldline(const LorentzState& s) {
  return {s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7]};
}

// du^mu/dtau = F^{mu nu} u_nu with c = 1 and e/m folded into the field. With
// `null_phase` the field is evaluated through t - z = s only, which is exact
// for fields depending on t - z (model and superposed vortices).
template <class Sampler>
void lorentz_rhs(const Sampler& field, const LorentzState& s, LorentzState& d, bool null_phase = false) {
  const FieldSample f = null_phase ? field(Vec3{s[1], s[2], 0.0}, s[8]) : field(Vec3{s[1], s[2], s[3]}, s[0]);
  const double u0 = s[4], ux = s[5], uy = s[6], uz = s[7], w = s[9];
  const auto& E = f.e;
  const auto& B = f.b;
  d[0] = u0;
  d[1] = ux;
  d[2] = uy;
  d[3] = uz;
  d[4] = E[0] * ux + E[1] * uy + E[2] * uz;
  d[7] = E[2] * u0 + ux * B[1] - uy * B[0];
  // Transverse and light-front rows are regrouped around w so that the
  // null-field parts cancel exactly instead of between two huge terms.
  d[5] = E[0] * w + uz * (E[0] - B[1]) + uy * B[2];
  d[6] = E[1] * w + uz * (E[1] + B[0]) - ux * B[2];
  d[8] = w;
  d[9] = ux * (E[0] - B[1]) + uy * (E[1] + B[0]) - E[2] * w;
}

template <class Sampler>
TrajectorySeries integrate_lorentz(const Sampler& field, const WorldlineState& init, std::array<double, 2> tau_span,
                                   const IntegratorConfig& icfg, std::size_t n_samples, bool null_phase = false) {
  if (std::fabs(init.norm_defect()) > 1e-10)
    throw validation_error("initial four-velocity violates normalization by " + fmt17(init.norm_defect()));
  Dopri5<10> ode(icfg);
  TrajectorySeries out;
  out.provenance = Provenance::ODE;
  out.method = "dopri5";
  const auto grid = uniform_grid(tau_span[0], tau_span[1], n_samples);
  out.rows.reserve(grid.size());
  ode.integrate([&](double, const LorentzState& s, LorentzState& d) { lorentz_rhs(field, s, d, null_phase); },
                tau_span[0], lorentz_state(init), grid,
                [&](double tau, const LorentzState& s) { out.rows.push_back(row_from_state(tau, worldline(s))); });
  return out;
}

inline TrajectorySeries integrate_lorentz(const FieldConfig& cfg, const WorldlineState& init,
                                          std::array<double, 2> tau_span, const IntegratorConfig& icfg,
                                          std::size_t n_samples) {
  FieldSampler s(cfg);
  const bool lf = lightfront_invariants_hold(cfg.kind);
  auto series = integrate_lorentz(s, init, tau_span, icfg, n_samples, lf);
  series.invariants_applicable = lf;
  return series;
}

struct InvariantReport {
  bool applicable = true;
  double lf_energy_drift = 0.0;  // max |E_i - E_0| / E_0
  double const2_drift = 0.0;     // max |c2_i - c2_0| (units of c)
  double norm_drift = 0.0;       // max |u0^2 - u^2 - 1| / u0^2
};

inline InvariantReport invariant_report(const TrajectorySeries& s) {
  InvariantReport r;
  r.applicable = s.invariants_applicable;
  if (s.rows.empty()) return r;
  const auto& f = s.rows.front();
  for (const auto& row : s.rows) {
    const double c = s.c;
    const double u2 = (row.ux * row.ux + row.uy * row.uy + row.uz * row.uz) / (c * c);
    r.norm_drift = std::max(r.norm_drift, std::fabs(row.u0 * row.u0 - u2 - 1.0) / (row.u0 * row.u0));
    if (r.applicable) {
      r.lf_energy_drift = std::max(r.lf_energy_drift, std::fabs(row.lf_energy - f.lf_energy) / std::fabs(f.lf_energy));
      r.const2_drift = std::max(r.const2_drift, std::fabs(row.const2 - f.const2) / c);
    }
  }
  if (!r.applicable) {
    r.lf_energy_drift = std::numeric_limits<double>::quiet_NaN();
    r.const2_drift = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

// Least-squares slope of log(transverse distance) against tau over the window.
inline double growth_rate(const TrajectorySeries& s, std::array<double, 2> window) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (const auto& r : s.rows) {
    if (r.tau < window[0] || r.tau > window[1]) continue;
    const double d = std::hypot(r.x, r.y);
    if (!(d > 0.0)) throw numerical_error("growth_rate: non-positive transverse distance at tau=" + fmt17(r.tau));
    const double ly = std::log(d);
    sx += r.tau;
    sy += ly;
    sxx += r.tau * r.tau;
    sxy += r.tau * ly;
    ++n;
  }
  if (n < 2) throw validation_error("growth_rate: fewer than two samples in the fit window");
  const double den = double(n) * sxx - sx * sx;
  return (double(n) * sxy - sx * sy) / den;
}

struct VortexPathRow {
  double tau = 0.0, t = 0.0, x_v = 0.0, y_v = 0.0;
};

inline std::string vortex_path_csv(const std::vector<VortexPathRow>& rows) {
  std::string out = "tau,t,x_v,y_v\n";
  for (const auto& r : rows)
    out += fmt17(r.tau) + "," + fmt17(r.t) + "," + fmt17(r.x_v) + "," + fmt17(r.y_v) + "\n";
  return out;
}

struct TransportResult {
  TrajectorySeries series;
  std::vector<VortexPathRow> vortex;
  double max_distance = 0.0;  // particle to vortex, in the plane z = zeta(tau)
};

inline TransportResult transport_run(const FieldConfig& cfg, const WorldlineState& init, double duration,
                                     const IntegratorConfig& icfg, std::size_t n_samples) {
  if (cfg.kind != FieldKind::BoostedVortex && cfg.kind != FieldKind::SuperposedVortex)
    throw validation_error("transport_run needs a boosted or superposed vortex field");
  FieldSampler field(cfg);
  TransportResult res;
  const bool lf = lightfront_invariants_hold(cfg.kind);
  res.series = integrate_lorentz(field, init, {0.0, duration}, icfg, n_samples, lf);
  res.series.invariants_applicable = lf;
  for (const auto& r : res.series.rows) {
    const auto v = field.vortex_at(r.t, r.z);
    res.vortex.push_back({r.tau, r.t, v[0], v[1]});
    res.max_distance = std::max(res.max_distance, std::hypot(r.x - v[0], r.y - v[1]));
  }
  return res;
}

// ----------------------------------------------------------- Newtonian limit

struct NewtonRow {
  double t = 0.0, x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;
};

// Nonrelativistic motion in the plane z = 0: the wave contributes its electric
// field without retardation, the axial field acts through v x B0.
template <class Sampler>
std::vector<NewtonRow> integrate_newton(const Sampler& field, double b0, std::array<double, 2> xy0,
                                        std::array<double, 2> v0, std::array<double, 2> t_span,
                                        const IntegratorConfig& icfg, std::size_t n_samples) {
  Dopri5<4> ode(icfg);
  std::vector<NewtonRow> rows;
  const auto grid = uniform_grid(t_span[0], t_span[1], n_samples);
  ode.integrate(
      [&](double t, const std::array<double, 4>& s, std::array<double, 4>& d) {
        const FieldSample f = field(Vec3{s[0], s[1], 0.0}, t);
        d[0] = s[2];
        d[1] = s[3];
        d[2] = f.e[0] + s[3] * b0;
        d[3] = f.e[1] - s[2] * b0;
      },
      t_span[0], {xy0[0], xy0[1], v0[0], v0[1]}, grid,
      [&](double t, const std::array<double, 4>& s) { rows.push_back({t, s[0], s[1], s[2], s[3]}); });
  return rows;
}

}  // namespace vortexpin
