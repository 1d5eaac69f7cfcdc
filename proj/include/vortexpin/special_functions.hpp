#pragma once

#include <cmath>
#include <complex>

#include "vortexpin/core.hpp"

namespace vortexpin {

// Hyper-dual number a + b e1 + c e2 + d e1e2 with e1^2 = e2^2 = 0.
// Seeding e1 along u and e2 along v gives u^T H v in the e1e2 part exactly.
template <class T>
struct HyperDual {
  T a{}, b{}, c{}, d{};

  HyperDual() = default;
  HyperDual(T v) : a(v) {}  // NOLINT(google-explicit-constructor)
  HyperDual(T a_, T b_, T c_, T d_) : a(a_), b(b_), c(c_), d(d_) {}

  template <class U>
  explicit HyperDual(const HyperDual<U>& o) : a(o.a), b(o.b), c(o.c), d(o.d) {}

  HyperDual& operator+=(const HyperDual& o) {
    a += o.a; b += o.b; c += o.c; d += o.d;
    return *this;
  }
  HyperDual& operator-=(const HyperDual& o) {
    a -= o.a; b -= o.b; c -= o.c; d -= o.d;
    return *this;
  }
  HyperDual& operator*=(const HyperDual& o) { return *this = *this * o; }

  friend HyperDual operator+(HyperDual x, const HyperDual& y) { return x += y; }
  friend HyperDual operator-(HyperDual x, const HyperDual& y) { return x -= y; }
  friend HyperDual operator-(const HyperDual& x) { return {-x.a, -x.b, -x.c, -x.d}; }
  friend HyperDual operator*(const HyperDual& x, const HyperDual& y) {
    return {x.a * y.a, x.a * y.b + x.b * y.a, x.a * y.c + x.c * y.a,
            x.a * y.d + x.b * y.c + x.c * y.b + x.d * y.a};
  }
  friend HyperDual operator/(const HyperDual& x, const HyperDual& y) {
    return x * apply(y, T(1) / y.a, -T(1) / (y.a * y.a), T(2) / (y.a * y.a * y.a));
  }

  // f(x) given f, f', f'' at x.a.
  static HyperDual apply(const HyperDual& x, T f0, T f1, T f2) {
    return {f0, f1 * x.b, f1 * x.c, f1 * x.d + f2 * x.b * x.c};
  }
};

template <class T>
HyperDual<T> exp(const HyperDual<T>& x) {
  using std::exp;
  const T e = exp(x.a);
  return HyperDual<T>::apply(x, e, e, e);
}

inline cplx hd_value(const cplx& v) { return v; }
template <class T>
T hd_value(const HyperDual<T>& v) { return v.a; }

template <class T>
T ipow(const T& x, int n) {
  T r(1.0);
  for (int k = 0; k < n; ++k) r = r * x;
  return r;
}

// Generalized Laguerre polynomial L_n^m(z) by the three-term recurrence; works
// for complex and hyper-dual arguments.
template <class T>
T laguerre(int n, int m, const T& z) {
  T prev(1.0);
  if (n == 0) return prev;
  T cur = T(1.0 + m) - z;
  for (int k = 1; k < n; ++k) {
    T next = (T(2.0 * k + 1.0 + m) - z) * cur - T(double(k + m)) * prev;
    next = next * T(1.0 / (k + 1));
    prev = cur;
    cur = next;
  }
  return cur;
}

// z^{-nu} J_nu(z), regular at the origin.
inline double bessel_j_scaled(int nu, double z) {
  const double az = std::fabs(z);
  if (az < 4.0) {
    const double h2 = 0.25 * z * z;
    double term = 1.0 / std::tgamma(nu + 1.0) / std::pow(2.0, nu);
    double sum = term;
    for (int k = 1; k < 60; ++k) {
      term *= -h2 / (k * double(k + nu));
      sum += term;
      if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
    }
    return sum;
  }
  return std::cyl_bessel_j(double(nu), az) / std::pow(az, nu);
}

inline double bessel_j(int m, double x) {
  if (m < 0) return (m % 2 ? -1.0 : 1.0) * bessel_j(-m, x);
  if (x < 0) return (m % 2 ? -1.0 : 1.0) * std::cyl_bessel_j(double(m), -x);
  return std::cyl_bessel_j(double(m), x);
}

}  // namespace vortexpin
