#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace vortexpin {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

enum class ErrorKind {
  Validation,  // bad input, maps to CLI exit code 2
  Numerical,   // integrator or solver failure, exit code 3
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& what) { return {ErrorKind::Validation, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorKind::Numerical, what}; }

// Shortest round-trip formatting is not needed; 17 significant digits is.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double sgn_nonneg(double v) { return v >= 0.0 ? 1.0 : -1.0; }

inline double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace vortexpin
