#pragma once

// Closed-form world-lines in the model vortex plus a constant axial field.
// Proper time tau is the primary parameter; lab time follows from
// t = calE*tau + zeta/c with the origin fixed by theta(0) - zeta(0)/c = 0.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vortexpin/core.hpp"
#include "vortexpin/mode_analysis.hpp"

namespace vortexpin {

enum class Provenance { Analytic, ODE };

struct TrajectoryRow {
  double tau = 0.0, t = 0.0;
  double x = 0.0, y = 0.0, z = 0.0;
  double ux = 0.0, uy = 0.0, uz = 0.0;
  double lf_energy = 0.0, const2 = 0.0;
  double u0 = 0.0;  // time component of the four-velocity (not written to CSV)
};

struct TrajectorySeries {
  std::vector<TrajectoryRow> rows;
  Provenance provenance = Provenance::Analytic;
  double c = 1.0;
  bool invariants_applicable = true;
  std::string method;  // how the longitudinal part was obtained, or the ODE name
};

inline const char* kTrajectoryCsvHeader = "tau,t,x,y,z,ux,uy,uz,lf_energy,const2";

inline std::string trajectory_csv(const TrajectorySeries& s) {
  std::string out = std::string(kTrajectoryCsvHeader) + "\n";
  for (const auto& r : s.rows) {
    const double v[] = {r.tau, r.t, r.x, r.y, r.z, r.ux, r.uy, r.uz, r.lf_energy, r.const2};
    for (int i = 0; i < 10; ++i) {
      if (i) out += ',';
      out += fmt17(v[i]);
    }
    out += '\n';
  }
  return out;
}

struct Initials {
  Vec3 position{};
  Vec3 velocity{};  // lab velocity, in the same units as c
};

struct TrajectoryCoefficients {
  double A = 0.0, B = 0.0, C = 0.0, D = 0.0;
  double zeta0 = 0.0;
  double calE = 1.0;
  ModeData md;
  FrequencySet freq;
};

inline TrajectoryCoefficients trajectory_coefficients(double xi0, double eta0, double dxi0, double deta0,
                                                      const ModeData& md, const FrequencySet& freq) {
  if (md.stability != Stability::Stable) throw validation_error("trajectory_coefficients: regime is not stable");
  const double rp = md.rp(), rm = md.rm(), kp = md.kappa_plus, km = md.kappa_minus;
  const double d1 = rp - rm * km * kp;
  const double d2 = rm - rp * km * kp;
  if (std::fabs(d1) < 1e-12 || std::fabs(d2) < 1e-12)
    throw numerical_error("DegenerateDenominator: r+ - r- k- k+ = " + fmt17(d1) + ", r- - r+ k- k+ = " + fmt17(d2));
  const double Om = freq.Omega;
  TrajectoryCoefficients c;
  c.A = ((0.5 - km * rm) * eta0 + dxi0 / Om) / d1;
  c.B = ((kp / 2.0 - rp) * eta0 + kp * dxi0 / Om) / d1;
  c.C = ((0.5 - kp * rp) * xi0 - deta0 / Om) / d2;
  c.D = ((km / 2.0 - rm) * xi0 - km * deta0 / Om) / d2;
  c.calE = freq.calE;
  c.md = md;
  c.freq = freq;
  return c;
}

// Complex transverse position Z = xi + i eta.
inline cplx transverse_complex(double tau, const TrajectoryCoefficients& k) {
  const double Om = k.freq.Omega, Op = k.md.Op(), Omn = k.md.Om();
  const double kp = k.md.kappa_plus, km = k.md.kappa_minus;
  const double sp = std::sin(Op * tau), cp = std::cos(Op * tau);
  const double sm = std::sin(Omn * tau), cm = std::cos(Omn * tau);
  const cplx G = cplx(k.A, k.D * kp) * sp - cplx(k.B * km, k.C) * sm + cplx(-k.D, k.A * kp) * cp +
                 cplx(k.C * km, -k.B) * cm;
  return std::exp(kI * (0.5 * Om * tau)) * G;
}

inline std::pair<double, double> transverse_position(double tau, const TrajectoryCoefficients& k) {
  const cplx z = transverse_complex(tau, k);
  return {z.real(), z.imag()};
}

// dZ/dtau.
inline cplx transverse_velocity(double tau, const TrajectoryCoefficients& k) {
  const double Om = k.freq.Omega, Op = k.md.Op(), Omn = k.md.Om();
  const double kp = k.md.kappa_plus, km = k.md.kappa_minus;
  const double sp = std::sin(Op * tau), cp = std::cos(Op * tau);
  const double sm = std::sin(Omn * tau), cm = std::cos(Omn * tau);
  const cplx G = cplx(k.A, k.D * kp) * sp - cplx(k.B * km, k.C) * sm + cplx(-k.D, k.A * kp) * cp +
                 cplx(k.C * km, -k.B) * cm;
  const cplx dG = Op * (cplx(k.A, k.D * kp) * cp - cplx(-k.D, k.A * kp) * sp) -
                  Omn * (cplx(k.B * km, k.C) * cm + cplx(k.C * km, -k.B) * sm);
  return std::exp(kI * (0.5 * Om * tau)) * (kI * (0.5 * Om) * G + dG);
}

inline constexpr double kResonanceTol = 1e-12;

namespace detail {

struct ZetaTerms {
  double uniform = 0.0;  // coefficient of tau
  double p2 = 0.0, p3 = 0.0, p4 = 0.0, p5 = 0.0;
  double Op = 0.0, Omn = 0.0, Opp = 0.0, Omm = 0.0;
};

inline ZetaTerms zeta_terms(const TrajectoryCoefficients& k) {
  const double c = k.freq.c, E = k.calE, Om = k.freq.Omega;
  const double Op = k.md.Op(), Omn = k.md.Om(), kp = k.md.kappa_plus, km = k.md.kappa_minus;
  const double A = k.A, B = k.B, C = k.C, D = k.D;
  ZetaTerms z;
  z.Op = Op;
  z.Omn = Omn;
  z.Opp = Op + Omn;
  z.Omm = Op - Omn;
  const double amp = (A * A + D * D) * ((Om * Om + 4.0 * Op * Op) * (1.0 + kp * kp) - 8.0 * Om * Op * kp) +
                     (B * B + C * C) * ((Om * Om + 4.0 * Omn * Omn) * (1.0 + km * km) - 8.0 * Om * Omn * km);
  z.uniform = 0.5 * c * (1.0 / E - E + amp / (8.0 * c * c * E));
  z.p2 = (1.0 - kp * kp) * (Om * Om - 4.0 * Op * Op) / (32.0 * c * E * Op);
  z.p3 = (1.0 - km * km) * (Om * Om - 4.0 * Omn * Omn) / (32.0 * c * E * Omn);
  z.p4 = ((kp - km) * (Om * Om - 4.0 * Op * Omn) + 2.0 * (kp * km - 1.0) * Om * z.Omm) / (8.0 * c * E * z.Opp);
  z.p5 = ((kp + km) * (Om * Om + 4.0 * Op * Omn) - 2.0 * (kp * km + 1.0) * Om * z.Opp) / (8.0 * c * E * z.Omm);
  return z;
}

}  // namespace detail

inline bool longitudinal_resonant(const ModeData& md, double tol = kResonanceTol) {
  const double Om = md.Omega;
  return std::fabs(md.Op()) < tol * Om || std::fabs(md.Om()) < tol * Om ||
         std::fabs(md.Op() - md.Om()) < tol * Om || std::fabs(md.Op() + md.Om()) < tol * Om;
}

// Closed-form longitudinal position.
inline double longitudinal_position(double tau, const TrajectoryCoefficients& k) {
  if (longitudinal_resonant(k.md))
    throw numerical_error("ResonantDenominator: Omega-, Omega+ - Omega- or Omega+ vanishes");
  const auto z = detail::zeta_terms(k);
  const double A = k.A, B = k.B, C = k.C, D = k.D;
  double r = z.uniform * tau;
  r += z.p2 * ((D * D - A * A) * std::sin(2.0 * z.Op * tau) - 2.0 * A * D * (1.0 - std::cos(2.0 * z.Op * tau)));
  r += z.p3 * ((B * B - C * C) * std::sin(2.0 * z.Omn * tau) + 2.0 * B * C * (1.0 - std::cos(2.0 * z.Omn * tau)));
  r += z.p4 * ((C * D - A * B) * std::sin(z.Opp * tau) - (A * C + B * D) * (1.0 - std::cos(z.Opp * tau)));
  r -= z.p5 * ((C * D + A * B) * std::sin(z.Omm * tau) - (A * C - B * D) * (1.0 - std::cos(z.Omm * tau)));
  return r + k.zeta0;
}

// d zeta / d tau, term by term from the closed form.
inline double longitudinal_velocity(double tau, const TrajectoryCoefficients& k) {
  const auto z = detail::zeta_terms(k);
  const double A = k.A, B = k.B, C = k.C, D = k.D;
  double r = z.uniform;
  r += z.p2 * 2.0 * z.Op * ((D * D - A * A) * std::cos(2.0 * z.Op * tau) - 2.0 * A * D * std::sin(2.0 * z.Op * tau));
  r += z.p3 * 2.0 * z.Omn * ((B * B - C * C) * std::cos(2.0 * z.Omn * tau) + 2.0 * B * C * std::sin(2.0 * z.Omn * tau));
  r += z.p4 * z.Opp * ((C * D - A * B) * std::cos(z.Opp * tau) - (A * C + B * D) * std::sin(z.Opp * tau));
  r -= z.p5 * z.Omm * ((C * D + A * B) * std::cos(z.Omm * tau) - (A * C - B * D) * std::sin(z.Omm * tau));
  return r;
}

// Uniform drift rate of zeta.
inline double longitudinal_drift_rate(const TrajectoryCoefficients& k) { return detail::zeta_terms(k).uniform; }

// zeta(tau1) - zeta(tau0) by adaptive Gauss-Kronrod quadrature of
// c(1/E - E)/2 + |dZ/dtau|^2/(2 c E), split into unit-period pieces.
template <class Velocity>
double longitudinal_quadrature(const Velocity& zdot, double calE, double c, double Omega, double tau0, double tau1) {
  using boost::math::quadrature::gauss_kronrod;
  const double drift = 0.5 * c * (1.0 / calE - calE);
  auto f = [&](double s) { return std::norm(zdot(s)) / (2.0 * c * calE); };
  const double piece = 0.5 * kPi / std::max(Omega, 1e-12);
  const int n = std::max(1, int(std::ceil(std::fabs(tau1 - tau0) / piece)));
  const double h = (tau1 - tau0) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = tau0 + i * h;
    sum += gauss_kronrod<double, 31>::integrate(f, a, a + h, 12, 1e-14);
  }
  return drift * (tau1 - tau0) + sum;
}

// ------------------------------------------------------------ full evaluator

// Evaluates the world-line for given initials, choosing closed form when
// possible and falling back to uncoupled modes (|1+mu| tiny) or quadrature
// (near-resonant longitudinal denominators).
class AnalyticTrajectory {
 public:
  AnalyticTrajectory(const Initials& ini, double omega, double omega_c, double omega_0, double c = 1.0)
      : ini_(ini), c_(c) {
    const Vec3& v = ini.velocity;
    const double v2 = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / (c * c);
    if (!(v2 < 1.0)) throw validation_error("initial speed must be below c");
    const double gamma = 1.0 / std::sqrt(1.0 - v2);
    u0_ = {gamma * v[0], gamma * v[1], gamma * v[2]};
    freq_ = make_frequencies(omega, omega_c, omega_0, lightfront_energy(v, c), c);
    if (std::fabs(1.0 + freq_.mu) <= kDegenerateMuTol) {
      uncoupled_ = true;
      um_ = uncoupled_modes(freq_.nu, freq_.Omega);
      if (!um_.bounded) throw validation_error("trajectory requires a stable regime");
      method_ = "uncoupled_quadrature";
    } else {
      const ModeData md = mode_data(freq_.mu, freq_.nu, freq_.Omega);
      if (md.stability != Stability::Stable) throw validation_error("trajectory requires a stable regime");
      k_ = trajectory_coefficients(ini.position[0], ini.position[1], u0_[0], u0_[1], md, freq_);
      k_.zeta0 = ini.position[2];
      quadrature_ = longitudinal_resonant(md, 1e-6);
      method_ = quadrature_ ? "closed_form_quadrature" : "closed_form";
    }
  }

  const FrequencySet& frequencies() const { return freq_; }
  const TrajectoryCoefficients& coefficients() const { return k_; }
  const std::string& method() const { return method_; }
  bool uses_quadrature() const { return quadrature_ || uncoupled_; }

  cplx position(double tau) const {
    if (!uncoupled_) return transverse_complex(tau, k_);
    const auto [a, b, da, db] = rotating_state(tau);
    return cplx(a, b) * std::exp(kI * (0.5 * freq_.Omega * tau));
  }

  cplx velocity(double tau) const {
    if (!uncoupled_) return transverse_velocity(tau, k_);
    const auto [a, b, da, db] = rotating_state(tau);
    return (cplx(da, db) + kI * (0.5 * freq_.Omega) * cplx(a, b)) * std::exp(kI * (0.5 * freq_.Omega * tau));
  }

  double zeta_velocity(double tau) const {
    if (!uses_quadrature()) return longitudinal_velocity(tau, k_);
    return 0.5 * c_ * (1.0 / freq_.calE - freq_.calE) + std::norm(velocity(tau)) / (2.0 * c_ * freq_.calE);
  }

  double zeta(double tau) const {
    if (!uses_quadrature()) return longitudinal_position(tau, k_);
    return ini_.position[2] + longitudinal_quadrature([this](double s) { return velocity(s); }, freq_.calE, c_,
                                                     freq_.Omega, 0.0, tau);
  }

  // Uniformly sampled series on [0, tau_max].
  TrajectorySeries sample(double tau_max, std::size_t n) const {
    if (n < 2) throw validation_error("sample_trajectory: need at least two samples");
    if (!(tau_max > 0.0)) throw validation_error("sample_trajectory: tau_max must be positive");
    TrajectorySeries s;
    s.provenance = Provenance::Analytic;
    s.c = c_;
    s.method = method_;
    s.rows.reserve(n);
    double zq = ini_.position[2], prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double tau = tau_max * double(i) / double(n - 1);
      double z;
      if (uses_quadrature()) {
        zq += longitudinal_quadrature([this](double q) { return velocity(q); }, freq_.calE, c_, freq_.Omega, prev,
                                      tau) ;
        prev = tau;
        z = zq;
      } else {
        z = zeta(tau);
      }
      s.rows.push_back(make_row(tau, z));
    }
    return s;
  }

  TrajectoryRow make_row(double tau, double z) const {
    TrajectoryRow r;
    const cplx p = position(tau), v = velocity(tau);
    r.tau = tau;
    r.x = p.real();
    r.y = p.imag();
    r.z = z;
    r.ux = v.real();
    r.uy = v.imag();
    r.uz = zeta_velocity(tau);
    r.t = freq_.calE * tau + z / c_;
    const double u2 = (r.ux * r.ux + r.uy * r.uy + r.uz * r.uz) / (c_ * c_);
    r.u0 = std::sqrt(1.0 + u2);
    r.lf_energy = r.u0 - r.uz / c_;
    r.const2 = r.uz - (r.ux * r.ux + r.uy * r.uy) / (2.0 * c_ * freq_.calE);
    return r;
  }

 private:
  std::array<double, 4> rotating_state(double tau) const {
    const double Om = freq_.Omega;
    const double a0 = ini_.position[0], b0 = ini_.position[1];
    // Rotating-frame initial velocity: d(alpha + i beta)/dtau = Zdot - i Omega/2 Z.
    const cplx dv = cplx(u0_[0], u0_[1]) - kI * (0.5 * Om) * cplx(a0, b0);
    const double wa = um_.omega_alpha, wb = um_.omega_beta;
    const double ca = std::cos(wa * tau), sa = std::sin(wa * tau);
    const double cb = std::cos(wb * tau), sb = std::sin(wb * tau);
    return {a0 * ca + dv.real() / wa * sa, b0 * cb + dv.imag() / wb * sb, -a0 * wa * sa + dv.real() * ca,
            -b0 * wb * sb + dv.imag() * cb};
  }

  Initials ini_;
  double c_ = 1.0;
  Vec3 u0_{};
  FrequencySet freq_;
  TrajectoryCoefficients k_;
  UncoupledModes um_;
  bool uncoupled_ = false;
  bool quadrature_ = false;
  std::string method_;
};

// Swaps x and y; pairs the sigma -> -sigma, omega_0 -> -omega_0 scenario with
// the original one.
inline TrajectorySeries symmetry_image(TrajectorySeries s) {
  for (auto& r : s.rows) {
    std::swap(r.x, r.y);
    std::swap(r.ux, r.uy);
  }
  return s;
}

inline Initials swap_xy(Initials ini) {
  std::swap(ini.position[0], ini.position[1]);
  std::swap(ini.velocity[0], ini.velocity[1]);
  return ini;
}

// Analytic series for helicity sigma; sigma = -1 is mapped onto sigma = +1 in
// the reversed axial field.
inline TrajectorySeries sample_trajectory(const Initials& ini, int sigma, double omega, double omega_c, double omega_0,
                                          double tau_max, std::size_t n, double c = 1.0) {
  if (sigma == 1) return AnalyticTrajectory(ini, omega, omega_c, omega_0, c).sample(tau_max, n);
  if (sigma != -1) throw validation_error("sigma must be +1 or -1");
  return symmetry_image(AnalyticTrajectory(swap_xy(ini), omega, omega_c, -omega_0, c).sample(tau_max, n));
}

// Newtonian limit: calE = 1, Omega = omega, tau = t and z = z0 + v_z t.
inline TrajectorySeries nonrelativistic_trajectory(const Initials& ini, double omega, double omega_c, double omega_0,
                                                   double t_max, std::size_t n) {
  if (n < 2 || !(t_max > 0.0)) throw validation_error("nonrelativistic_trajectory: bad sampling");
  const double mu = omega_0 / omega, nu = omega_c / omega;
  if (std::fabs(1.0 + mu) <= kDegenerateMuTol || classify_stability(mu, nu) != Stability::Stable)
    throw validation_error("nonrelativistic_trajectory requires a stable regime with 1+mu != 0");
  const FrequencySet f = make_frequencies(omega, omega_c, omega_0, 1.0);
  const ModeData md = mode_data(mu, nu, omega);
  const auto k = trajectory_coefficients(ini.position[0], ini.position[1], ini.velocity[0], ini.velocity[1], md, f);
  TrajectorySeries s;
  s.provenance = Provenance::Analytic;
  s.method = "nonrelativistic";
  s.c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t_max * double(i) / double(n - 1);
    const cplx p = transverse_complex(t, k), v = transverse_velocity(t, k);
    TrajectoryRow r;
    r.tau = t;
    r.t = t;
    r.x = p.real();
    r.y = p.imag();
    r.z = ini.position[2] + ini.velocity[2] * t;
    r.ux = v.real();
    r.uy = v.imag();
    r.uz = ini.velocity[2];
    r.u0 = 1.0;
    r.lf_energy = 1.0;
    r.const2 = ini.velocity[2];
    s.rows.push_back(r);
  }
  return s;
}

// Monotone (Fritsch-Carlson) cubic resampling of a series onto a uniform
// lab-time grid.
inline TrajectorySeries resample_lab_time(const TrajectorySeries& s, std::size_t n) {
  const auto& R = s.rows;
  if (R.size() < 2 || n < 2) throw validation_error("resample_lab_time: need at least two rows");
  for (std::size_t i = 1; i < R.size(); ++i)
    if (!(R[i].t > R[i - 1].t)) throw validation_error("resample_lab_time: lab time not increasing");
  const std::size_t m = R.size();
  std::vector<double> T(m);
  for (std::size_t i = 0; i < m; ++i) T[i] = R[i].t;
  auto pchip = [&](auto get, double t) {
    std::size_t i = std::min<std::size_t>(m - 2, std::upper_bound(T.begin(), T.end(), t) - T.begin() - 1);
    auto slope = [&](std::size_t j) {
      auto d = [&](std::size_t a) { return (get(R[a + 1]) - get(R[a])) / (T[a + 1] - T[a]); };
      if (j == 0) return d(0);
      if (j == m - 1) return d(m - 2);
      const double d0 = d(j - 1), d1 = d(j);
      if (d0 * d1 <= 0.0) return 0.0;
      const double h0 = T[j] - T[j - 1], h1 = T[j + 1] - T[j];
      const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
      return (w1 + w2) / (w1 / d0 + w2 / d1);
    };
    const double h = T[i + 1] - T[i], u = (t - T[i]) / h;
    const double y0 = get(R[i]), y1 = get(R[i + 1]), m0 = slope(i) * h, m1 = slope(i + 1) * h;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
  };
  TrajectorySeries out = s;
  out.rows.clear();
  for (std::size_t k = 0; k < n; ++k) {
    const double t = T.front() + (T.back() - T.front()) * double(k) / double(n - 1);
    TrajectoryRow r;
    r.t = t;
    r.tau = pchip([](const TrajectoryRow& q) { return q.tau; }, t);
    r.x = pchip([](const TrajectoryRow& q) { return q.x; }, t);
    r.y = pchip([](const TrajectoryRow& q) { return q.y; }, t);
    r.z = pchip([](const TrajectoryRow& q) { return q.z; }, t);
    r.ux = pchip([](const TrajectoryRow& q) { return q.ux; }, t);
    r.uy = pchip([](const TrajectoryRow& q) { return q.uy; }, t);
    r.uz = pchip([](const TrajectoryRow& q) { return q.uz; }, t);
    r.u0 = pchip([](const TrajectoryRow& q) { return q.u0; }, t);
    r.lf_energy = pchip([](const TrajectoryRow& q) { return q.lf_energy; }, t);
    r.const2 = pchip([](const TrajectoryRow& q) { return q.const2; }, t);
    out.rows.push_back(r);
  }
  return out;
}

}  // namespace vortexpin
