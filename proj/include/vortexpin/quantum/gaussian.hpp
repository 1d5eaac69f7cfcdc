#pragma once

// Rotating-frame Gaussian states annihilated by both ladder operators, and the
// polynomial x Gaussian excited states obtained with the creation operators.
// Lengths are measured in the same units as the classical coordinates; q_x,
// q_y and q carry the factor m Omega / hbar.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "vortexpin/core.hpp"
#include "vortexpin/mode_analysis.hpp"

namespace vortexpin {

// Dense bivariate polynomial, coef[i][j] multiplies x^i y^j.
class Poly {
 public:
  Poly() : coef_(1, std::vector<cplx>(1, 1.0)) {}
  explicit Poly(std::size_t degree) : coef_(degree + 1, std::vector<cplx>(degree + 1, 0.0)) {}

  std::size_t size() const { return coef_.size(); }
  cplx& at(std::size_t i, std::size_t j) { return coef_[i][j]; }
  const cplx& at(std::size_t i, std::size_t j) const { return coef_[i][j]; }

  // Highest total degree with a nonzero coefficient.
  int degree() const {
    int d = -1;
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j)
        if (coef_[i][j] != 0.0) d = std::max(d, int(i + j));
    return d;
  }

  cplx operator()(double x, double y) const {
    // Horner in x of Horner-in-y rows.
    cplx acc = 0.0;
    for (std::size_t i = size(); i-- > 0;) {
      cplx row = 0.0;
      for (std::size_t j = size(); j-- > 0;) row = row * y + coef_[i][j];
      acc = acc * x + row;
    }
    return acc;
  }

 private:
  std::vector<std::vector<cplx>> coef_;
};

struct GaussianState {
  double mu = 0.0, nu = 0.0;
  double scale = 1.0;  // m Omega / hbar
  double hbar = 1.0;
  double q_x = 0.0, q_y = 0.0, q = 0.0;
  double varpi = 0.0;
  double u = 0.0;
  Poly poly;
  int n_plus = 0, n_minus = 0;

  // psi = poly(x, y) exp(-q_x x^2/2 - q_y y^2/2 - i q x y)
  cplx operator()(double x, double y) const {
    return poly(x, y) * std::exp(cplx(-0.5 * q_x * x * x - 0.5 * q_y * y * y, -q * x * y));
  }

  // Norm squared of the bare Gaussian: pi / sqrt(q_x q_y).
  double ground_norm2() const { return kPi / std::sqrt(q_x * q_y); }
};

namespace detail {

// Explicit closed form (units of m Omega / hbar), free of 1/nu^2, so it also
// covers the small-|nu| branch.
inline std::array<double, 3> gaussian_explicit(double mu, double nu, double u) {
  const double q = 2.0 * nu * (1.0 + mu) / (1.0 + 2.0 * mu + u);
  const double qx2 = q * q + (1.0 + mu) * q + mu * mu / 4.0 - nu;
  const double qy2 = q * q - (1.0 + mu) * q + mu * mu / 4.0 + nu;
  return {std::sqrt(std::max(qx2, 0.0)), std::sqrt(std::max(qy2, 0.0)), q};
}

}  // namespace detail

inline double gaussian_discriminant(double mu, double nu) {
  const double d = (1.0 + 2.0 * mu) * (1.0 + 2.0 * mu) - 16.0 * nu * nu;
  return sgn_nonneg(0.5 + mu) * std::sqrt(std::max(d, 0.0));
}

// Ground-state widths from the explicit form, cross-checked against the
// varpi form built on the mode tensors.
inline GaussianState gaussian_params(double mu, double nu, double scale = 1.0, double hbar = 1.0) {
  if (classify_stability(mu, nu) != Stability::Stable)
    throw validation_error("gaussian_params: Unstable regime at mu=" + fmt17(mu) + " nu=" + fmt17(nu));
  if (!(scale > 0.0)) throw validation_error("gaussian_params: scale must be positive");
  const ModeData md = mode_data(mu, nu);
  GaussianState g;
  g.mu = mu;
  g.nu = nu;
  g.scale = scale;
  g.hbar = hbar;
  g.u = gaussian_discriminant(mu, nu);
  const auto ex = detail::gaussian_explicit(mu, nu, g.u);
  g.varpi = 1.0 / (std::fabs(1.0 + mu) * (md.t_pp * md.t_mp + md.t_pm * md.t_mm));
  const double wx = g.varpi * (md.s_plus + md.s_minus) * md.t_pp * md.t_mm;
  const double wy = g.varpi * (md.s_plus + md.s_minus) * md.t_pm * md.t_mp;
  const double wq = md.eps * g.varpi * (md.s_plus * md.t_pm * md.t_mm - md.s_minus * md.t_pp * md.t_mp);
  const double ref = std::max({std::fabs(wx), std::fabs(wy), std::fabs(wq)});
  const double diff = std::max({std::fabs(ex[0] - wx), std::fabs(ex[1] - wy), std::fabs(ex[2] - wq)});
  if (diff > 1e-10 * ref)
    throw numerical_error("gaussian_params: explicit and varpi forms disagree by " + fmt17(diff / ref));
  if (!(wx > 0.0) || !(wy > 0.0)) throw numerical_error("gaussian_params: non-normalizable Gaussian");
  g.q_x = scale * wx;
  g.q_y = scale * wy;
  g.q = scale * wq;
  g.varpi *= scale;
  return g;
}

// Residuals of the four linear relations fixing (q_x, q_y, q), in units of
// the right-hand sides.
inline std::array<double, 4> eq_system_residuals(const GaussianState& g, const ModeData& md) {
  const double a = std::fabs(1.0 + md.mu), b = 1.0 + md.mu, S = g.scale;
  const double qx = g.q_x / S, qy = g.q_y / S, q = g.q / S;
  const std::array<double, 4> lhs{qx * a * md.t_pm - q * b * md.t_pp, qy * a * md.t_pp + q * b * md.t_pm,
                                  qx * a * md.t_mp + q * b * md.t_mm, qy * a * md.t_mm - q * b * md.t_mp};
  const std::array<double, 4> rhs{md.s_minus * md.t_pp, md.s_plus * md.t_pm, md.s_plus * md.t_mm,
                                  md.s_minus * md.t_mp};
  std::array<double, 4> r{};
  for (int i = 0; i < 4; ++i) r[i] = std::fabs(lhs[i] - rhs[i]) / std::max(1.0, std::fabs(rhs[i]));
  return r;
}

// Linear operator c_x x + c_y y + c_px p_x + c_py p_y with p = -i hbar grad.
struct LinearOperator {
  std::array<cplx, 4> c{};

  LinearOperator adjoint() const { return {{std::conj(c[0]), std::conj(c[1]), std::conj(c[2]), std::conj(c[3])}}; }
};

// Quantum ladder operators: the classical amplitude forms divided by
// sqrt(hbar). Index 0 is a_+, index 1 is a_-.
inline std::array<LinearOperator, 2> ladder_operators(const ModeData& md, double hbar = 1.0) {
  const auto cc = mode_amplitude_coefficients(md);
  std::array<LinearOperator, 2> ops;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 4; ++i) ops[k].c[i] = cc[k][i] / std::sqrt(hbar);
  return ops;
}

// Coefficients of x and y left after applying op to the bare Gaussian of g;
// both vanish for an annihilator of g.
inline std::array<cplx, 2> gaussian_image(const LinearOperator& op, const GaussianState& g) {
  // p_j G = i hbar (Q r)_j G with Q = [[q_x, i q], [i q, q_y]].
  const cplx ih = kI * g.hbar;
  const cplx ex = op.c[0] + ih * (op.c[2] * g.q_x + op.c[3] * kI * g.q);
  const cplx ey = op.c[1] + ih * (op.c[2] * kI * g.q + op.c[3] * g.q_y);
  return {ex, ey};
}

// Applies op to poly x Gaussian and returns the new polynomial prefactor.
inline Poly apply_linear(const LinearOperator& op, const Poly& P, const GaussianState& g) {
  const std::size_t n = P.size();
  Poly R(n);  // degree grows by one
  const cplx ih = kI * g.hbar;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const cplx a = P.at(i, j);
      if (a == 0.0) continue;
      // position part and the Gaussian's gradient term
      R.at(i + 1, j) += a * (op.c[0] + ih * (op.c[2] * g.q_x + op.c[3] * kI * g.q));
      R.at(i, j + 1) += a * (op.c[1] + ih * (op.c[2] * kI * g.q + op.c[3] * g.q_y));
      // -i hbar d/dx, d/dy of the polynomial
      if (i > 0) R.at(i - 1, j) += -ih * op.c[2] * double(i) * a;
      if (j > 0) R.at(i, j - 1) += -ih * op.c[3] * double(j) * a;
    }
  }
  return R;
}

// (a_+^dag)^m (a_-^dag)^n psi_0 / sqrt(m! n!), same norm as the ground state.
inline GaussianState excited_state(const GaussianState& ground, const ModeData& md, int m, int n) {
  if (m < 0 || n < 0) throw validation_error("excited_state: indices must be non-negative");
  const auto ops = ladder_operators(md, ground.hbar);
  const LinearOperator up = ops[0].adjoint(), um = ops[1].adjoint();
  GaussianState g = ground;
  g.poly = Poly();
  for (int k = 0; k < n; ++k) g.poly = apply_linear(um, g.poly, g);
  for (int k = 0; k < m; ++k) g.poly = apply_linear(up, g.poly, g);
  double fact = 1.0;
  for (int k = 2; k <= m; ++k) fact *= k;
  for (int k = 2; k <= n; ++k) fact *= k;
  const double s = 1.0 / std::sqrt(fact);
  for (std::size_t i = 0; i < g.poly.size(); ++i)
    for (std::size_t j = 0; j < g.poly.size(); ++j) g.poly.at(i, j) *= s;
  g.n_plus = m;
  g.n_minus = n;
  return g;
}

}  // namespace vortexpin
