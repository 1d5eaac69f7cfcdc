#pragma once

// Dormand-Prince 5(4) with the standard 4th-order dense output, adaptive
// step control (PI controller) and integration in either direction.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "vortexpin/core.hpp"

namespace vortexpin {

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  bool dense_output = true;
  std::size_t max_steps = 50'000'000;
};

inline void validate(const IntegratorConfig& c) {
  if (!(c.rtol > 0.0) || !(c.atol > 0.0)) throw validation_error("rtol and atol must be positive");
  if (!(c.max_step > 0.0)) throw validation_error("max_step must be positive");
}

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

template <std::size_t N>
class Dopri5 {
 public:
  using State = std::array<double, N>;

  explicit Dopri5(IntegratorConfig cfg = {}) : cfg_(cfg) { validate(cfg_); }

  const OdeStats& stats() const { return stats_; }

  // Integrates y' = f(t, y) from t0 to the last entry of `outputs` (which must
  // be monotone in the direction of integration) and calls
  // observer(t_out, y_out) at every output time, using dense output between
  // steps. Returns the final state.
  template <class Rhs, class Observer>
  State integrate(Rhs&& f, double t0, State y0, const std::vector<double>& outputs, Observer&& observer) {
    stats_ = {};
    if (outputs.empty()) return y0;
    const double tend = outputs.back();
    const double dir = tend >= t0 ? 1.0 : -1.0;
    std::size_t next = 0;
    while (next < outputs.size() && dir * (outputs[next] - t0) <= 0.0) {
      observer(outputs[next], y0);
      ++next;
    }
    if (next == outputs.size()) return y0;

    double t = t0;
    State y = y0, k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
    f(t, y, k1);
    ++stats_.evaluations;
    double h = dir * initial_step(f, t, y, k1, std::fabs(tend - t0));
    double facold = 1e-4;
    bool last_rejected = false;

    while (next < outputs.size()) {
      if (stats_.accepted + stats_.rejected >= cfg_.max_steps)
        throw numerical_error("integrator exceeded max_steps at t=" + fmt17(t));
      if (std::fabs(h) > cfg_.max_step) h = dir * cfg_.max_step;
      // Stretch the step slightly rather than leave a sliver before tend.
      if (dir * (t + 1.01 * h - tend) > 0.0) h = tend - t;
      if (std::fabs(h) <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t)))
        throw numerical_error("step size underflow at t=" + fmt17(t));

      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
      f(t + c2 * h, ytmp, k2);
      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      f(t + c3 * h, ytmp, k3);
      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      f(t + c4 * h, ytmp, k4);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      f(t + c5 * h, ytmp, k5);
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      f(t + h, ytmp, k6);
      for (std::size_t i = 0; i < N; ++i)
        ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      f(t + h, ynew, k7);
      stats_.evaluations += 6;

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sk = cfg_.atol + cfg_.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
        err += (yerr[i] / sk) * (yerr[i] / sk);
      }
      err = std::sqrt(err / double(N));
      if (!std::isfinite(err)) {
        h *= 0.1;
        last_rejected = true;
        ++stats_.rejected;
        continue;
      }

      const double fac11 = std::pow(err, kExpo1);
      if (err <= 1.0) {
        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
        double hnew = h / fac;
        if (last_rejected) hnew = dir * std::min(std::fabs(hnew), std::fabs(h));
        facold = std::max(err, 1e-4);
        ++stats_.accepted;

        // Dense output coefficients for this step.
        std::array<State, 5> rc;
        for (std::size_t i = 0; i < N; ++i) {
          const double ydiff = ynew[i] - y[i];
          const double bspl = h * k1[i] - ydiff;
          rc[0][i] = y[i];
          rc[1][i] = ydiff;
          rc[2][i] = bspl;
          rc[3][i] = ydiff - h * k7[i] - bspl;
          rc[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        const double tnew = t + h;
        while (next < outputs.size() && dir * (outputs[next] - tnew) <= 0.0) {
          const double th = (outputs[next] - t) / h;
          const double th1 = 1.0 - th;
          State yo;
          for (std::size_t i = 0; i < N; ++i)
            yo[i] = rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
          if (outputs[next] == tnew) yo = ynew;
          observer(outputs[next], yo);
          ++next;
        }
        t = tnew;
        y = ynew;
        k1 = k7;
        h = hnew;
        last_rejected = false;
      } else {
        h /= std::min(1.0 / kFacMin, fac11 / kSafe);
        last_rejected = true;
        ++stats_.rejected;
      }
    }
    return y;
  }

 private:
  template <class Rhs>
  double initial_step(Rhs& f, double t, const State& y, const State& k1, double span) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = cfg_.atol + cfg_.rtol * std::fabs(y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min({h, cfg_.max_step, span});
    State y1, k2;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h * k1[i];
    f(t + h, y1, k2);
    ++stats_.evaluations;
    double der2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = cfg_.atol + cfg_.rtol * std::fabs(y[i]);
      der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::fabs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::fabs(h) * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * std::fabs(h), h1, cfg_.max_step, span});
  }

  IntegratorConfig cfg_;
  OdeStats stats_;

  static constexpr double kBeta = 0.04;
  static constexpr double kExpo1 = 0.2 - kBeta * 0.75;
  static constexpr double kSafe = 0.9;
  static constexpr double kFacMin = 0.2;
  static constexpr double kFacMax = 10.0;

  static constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
  static constexpr double a21 = 0.2;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                          a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

}  // namespace vortexpin
