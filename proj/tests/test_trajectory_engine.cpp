#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "vortexpin/lorentz_oracle.hpp"
#include "vortexpin/trajectory_engine.hpp"

using namespace vortexpin;

namespace {

AnalyticTrajectory analytic(const vptest::Scenario& s, const Initials& ini, double c = 1.0) {
  return AnalyticTrajectory(ini, s.omega, s.omega_c, s.omega_0, c);
}

TrajectorySeries ode(const vptest::Scenario& s, const Initials& ini, double tau_max, std::size_t n,
                     double rtol = 1e-12) {
  IntegratorConfig ic;
  ic.rtol = rtol;
  ic.atol = 1e-14;
  // The closed form fixes the lab-time origin by theta(0) = zeta(0) / c.
  return integrate_lorentz(s.field, WorldlineState::from_velocity(ini.position, ini.velocity, ini.position[2]),
                           {0.0, tau_max}, ic, n);
}

double max_deviation(const TrajectorySeries& a, const TrajectorySeries& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto &p = a.rows[i], &q = b.rows[i];
    d = std::max(d, std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.z - q.z) * (p.z - q.z)));
  }
  return d;
}

}  // namespace

TEST(TrajectoryCoefficients, ZeroInitialsGiveZero) {
  const auto md = mode_data(0.075, 0.1);
  const auto k = trajectory_coefficients(0, 0, 0, 0, md, make_frequencies(1.0, 0.1, 0.075, 1.0));
  EXPECT_EQ(k.A, 0.0);
  EXPECT_EQ(k.B, 0.0);
  EXPECT_EQ(k.C, 0.0);
  EXPECT_EQ(k.D, 0.0);
}

TEST(TrajectoryCoefficients, UnstableRejected) {
  const auto md = mode_data(-0.5, 0.075);
  EXPECT_THROW(trajectory_coefficients(1, 0, 0, 0, md, make_frequencies(1.0, 0.075, -0.5, 1.0)), Error);
}

// Position and velocity at tau = 0 reproduce the initial data.
TEST(TrajectoryCoefficients, RoundTrip) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int k = 0; k < 200; ++k) {
    const auto p = vptest::random_stable(rng);
    const double Om = 0.8;
    const auto f = frequencies_from_mu_nu(p.mu, p.nu, Om, 1.0);
    const auto md = mode_data(p.mu, p.nu, Om);
    const double x0 = g(rng), y0 = g(rng), vx = g(rng), vy = g(rng);
    const auto c = trajectory_coefficients(x0, y0, vx, vy, md, f);
    const cplx z = transverse_complex(0.0, c), v = transverse_velocity(0.0, c);
    const double scale = std::max({1.0, std::fabs(x0), std::fabs(y0), std::fabs(vx), std::fabs(vy)});
    EXPECT_NEAR(z.real(), x0, 1e-12 * scale);
    EXPECT_NEAR(z.imag(), y0, 1e-12 * scale);
    EXPECT_NEAR(v.real(), vx, 1e-12 * scale);
    EXPECT_NEAR(v.imag(), vy, 1e-12 * scale);
  }
}

// The closed-form velocity is the derivative of the closed-form position.
TEST(Transverse, VelocityIsDerivative) {
  const auto md = mode_data(0.3, -0.15, 0.9);
  const auto c = trajectory_coefficients(1.2, -0.4, 0.3, 0.1, md, frequencies_from_mu_nu(0.3, -0.15, 0.9, 1.0));
  for (double tau : {0.0, 3.7, 41.0}) {
    const double h = 1e-4;
    const cplx fd = (transverse_complex(tau + h, c) - transverse_complex(tau - h, c)) / (2 * h);
    EXPECT_LT(std::abs(fd - transverse_velocity(tau, c)), 1e-8);
    const double zfd = (longitudinal_position(tau + h, c) - longitudinal_position(tau - h, c)) / (2 * h);
    EXPECT_NEAR(zfd, longitudinal_velocity(tau, c), 1e-8);
  }
}

TEST(Pinning, ZeroOffsetStaysOnAxis) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const auto p = vptest::random_stable(rng);
    const auto s = vptest::scenario(p.mu, p.nu, {0, 0, 0.3});
    const auto series = analytic(s, {{0, 0, 1.5}, {0, 0, 0.3}}).sample(200.0, 101);
    for (const auto& r : series.rows) {
      EXPECT_EQ(r.x, 0.0);
      EXPECT_EQ(r.y, 0.0);
    }
  }
}

TEST(Longitudinal, AtRestStaysPut) {
  const auto s = vptest::scenario(0.075, 0.1, {0, 0, 0});
  const auto t = analytic(s, {{0, 0, 2.0}, {0, 0, 0}});
  for (double tau : {0.0, 10.0, 500.0}) EXPECT_NEAR(t.zeta(tau), 2.0, 1e-14);
}

TEST(Longitudinal, PureDriftAtHalfEnergy) {
  const auto s = vptest::scenario(0.075, 0.1, {0, 0, 0.6});
  ASSERT_NEAR(s.calE, 0.5, 1e-15);
  const auto t = analytic(s, {{0, 0, 0}, {0, 0, 0.6}});
  for (double tau : {1.0, 10.0, 600.0}) EXPECT_NEAR(t.zeta(tau), tau / 2.0 * (2.0 - 0.5), 1e-12 * tau);
}

// Closed form against adaptive quadrature of the longitudinal equation.
TEST(Longitudinal, ClosedFormMatchesQuadrature) {
  for (double x0 : {1.0, 2.0, 3.0}) {
    const auto s = vptest::scenario(0.075, 0.1, {0.001, 0, 0});
    const auto t = analytic(s, {{x0, 0, 0}, {0.001, 0, 0}});
    const auto& k = t.coefficients();
    double worst = 0.0, prev = 0.0, acc = 0.0;
    for (int i = 1; i <= 60; ++i) {
      const double tau = 10.0 * i;
      acc += longitudinal_quadrature([&](double q) { return transverse_velocity(q, k); }, s.calE, 1.0,
                                     k.freq.Omega, prev, tau);
      prev = tau;
      worst = std::max(worst, std::fabs(acc - longitudinal_position(tau, k)));
    }
    EXPECT_LT(worst, 1e-8) << x0;
  }
}

// The uniform coefficient equals the slope from a least-squares fit of the
// quadrature result on the known spectral basis.
TEST(Longitudinal, DriftRateMatchesFittedTrend) {
  const auto s = vptest::scenario(0.3, 0.12, {0.01, -0.02, 0.05});
  const auto t = analytic(s, {{1.5, -0.5, 0}, {0.01, -0.02, 0.05}});
  const auto& k = t.coefficients();
  const double Op = k.md.Op(), Om = k.md.Om();
  const double freqs[4] = {2 * Op, 2 * Om, Op + Om, Op - Om};
  const int n = 600;
  Eigen::MatrixXd A(n, 10);
  Eigen::VectorXd b(n);
  double prev = 0.0, acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double tau = 0.5 * i;
    acc += longitudinal_quadrature([&](double q) { return transverse_velocity(q, k); }, s.calE, 1.0, k.freq.Omega,
                                   prev, tau);
    prev = tau;
    A(i, 0) = 1.0;
    A(i, 1) = tau;
    for (int j = 0; j < 4; ++j) {
      A(i, 2 + 2 * j) = std::sin(freqs[j] * tau);
      A(i, 3 + 2 * j) = std::cos(freqs[j] * tau);
    }
    b(i) = acc;
  }
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
  EXPECT_NEAR(x(1), longitudinal_drift_rate(k), 1e-8);
}

TEST(Longitudinal, ResonantDenominatorReported) {
  // Omega+ - Omega- vanishes only next to mu = nu = 0, where the transverse
  // denominators degenerate as well.
  EXPECT_THROW(trajectory_coefficients(1, 0, 0, 0, mode_data(0.0, 0.0), make_frequencies(1.0, 0.0, 0.0, 1.0)),
               Error);
  TrajectoryCoefficients c;
  c.md = mode_data(1e-13, 0.0);
  c.freq = make_frequencies(1.0, 0.0, 1e-13, 1.0);
  c.A = 1.0;
  EXPECT_TRUE(longitudinal_resonant(c.md));
  try {
    longitudinal_position(1.0, c);
    FAIL() << "expected ResonantDenominator";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ResonantDenominator"), std::string::npos);
  }
}

// Analytic and ODE world-lines for random stable scenarios.
TEST(AnalyticVsOde, RandomScenarios) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const auto p = vptest::random_stable(rng, 1.0, 0.4);
    const Vec3 v{0.01 * u(rng), 0.01 * u(rng), 0.01 * u(rng)};
    const Initials ini{{u(rng), u(rng), u(rng)}, v};
    const auto s = vptest::scenario(p.mu, p.nu, v);
    const auto a = analytic(s, ini).sample(100.0, 201);
    const auto o = ode(s, ini, 100.0, 201);
    EXPECT_LT(max_deviation(a, o), 1e-6) << p.mu << " " << p.nu;
  }
}

TEST(AnalyticVsOde, ResonantFallbackUsesQuadrature) {
  const auto s = vptest::scenario(1e-8, 0.0, {0.001, 0, 0});
  const Initials ini{{1, 0, 0}, {0.001, 0, 0}};
  const auto t = analytic(s, ini);
  EXPECT_EQ(t.method(), "closed_form_quadrature");
  EXPECT_LT(max_deviation(t.sample(50.0, 101), ode(s, ini, 50.0, 101)), 1e-8);
}

TEST(AnalyticVsOde, DegenerateMuUsesUncoupledModes) {
  const auto s = vptest::scenario(-1.0, 0.1, {0.01, 0.02, 0});
  const Initials ini{{0.5, -0.3, 0}, {0.01, 0.02, 0}};
  const auto t = analytic(s, ini);
  EXPECT_EQ(t.method(), "uncoupled_quadrature");
  EXPECT_LT(max_deviation(t.sample(50.0, 101), ode(s, ini, 50.0, 101)), 1e-8);
}

TEST(Invariants, ConstantAlongAnalyticSeries) {
  const auto s = vptest::scenario(0.075, 0.1, {0.001, 0, 0});
  const auto series = analytic(s, {{3, 0, 0}, {0.001, 0, 0}}).sample(600.0, 3001);
  const auto& f = series.rows.front();
  for (const auto& r : series.rows) {
    EXPECT_NEAR(r.lf_energy, f.lf_energy, 1e-12);
    EXPECT_NEAR(r.const2, f.const2, 1e-10);
    EXPECT_NEAR(r.lf_energy, s.calE, 1e-12);
  }
}

TEST(SampleTrajectory, RestAtOriginIsFixedPoint) {
  const auto series = sample_trajectory({}, 1, 1.0, 0.1, 0.075, 50.0, 11);
  for (const auto& r : series.rows) {
    EXPECT_EQ(r.x, 0.0);
    EXPECT_EQ(r.y, 0.0);
    EXPECT_NEAR(r.z, 0.0, 1e-15);
    EXPECT_NEAR(r.t, r.tau, 1e-13);
  }
}

TEST(SampleTrajectory, StableOrbitsBounded) {
  for (double x0 : {1.0, 2.0, 3.0}) {
    const auto s = vptest::scenario(0.075, 0.1, {0.001, 0, 0});
    const auto series = sample_trajectory({{x0, 0, 0}, {0.001, 0, 0}}, 1, 1.0, s.omega_c, s.omega_0, 600.0, 2001);
    double rmax = 0.0;
    for (const auto& r : series.rows) rmax = std::max(rmax, std::hypot(r.x, r.y));
    EXPECT_LT(rmax, 1e3);
    for (std::size_t i = 1; i < series.rows.size(); ++i) EXPECT_GT(series.rows[i].t, series.rows[i - 1].t);
  }
}

TEST(SampleTrajectory, DistinctStartsGiveDistinctBoundedOrbits) {
  std::vector<TrajectorySeries> runs;
  for (double nu : {-0.2, -0.1, 0.1, 0.2}) {
    const Vec3 v{0.001, 0, 0.001};
    const auto s = vptest::scenario(0.5, nu, v);
    runs.push_back(sample_trajectory({{60, 0, 0}, v}, 1, 1.0, s.omega_c, s.omega_0, 600.0, 2001));
    double rmax = 0.0;
    for (const auto& r : runs.back().rows) rmax = std::max(rmax, std::hypot(r.x, r.y));
    EXPECT_LT(rmax, 1e3) << nu;
  }
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (std::size_t j = i + 1; j < runs.size(); ++j) EXPECT_GT(max_deviation(runs[i], runs[j]), 1e-3);
}

TEST(SymmetryImage, Involution) {
  const auto s = vptest::scenario(0.2, 0.1, {0.01, 0.02, 0});
  const auto a = analytic(s, {{1, 2, 0}, {0.01, 0.02, 0}}).sample(20.0, 21);
  const auto b = symmetry_image(symmetry_image(a));
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].x, b.rows[i].x);
    EXPECT_EQ(a.rows[i].uy, b.rows[i].uy);
  }
}

TEST(SymmetryImage, DiagonalIsFixed) {
  TrajectorySeries s;
  s.rows.push_back({});
  s.rows[0].x = s.rows[0].y = 1.5;
  s.rows[0].ux = s.rows[0].uy = -0.2;
  const auto t = symmetry_image(s);
  EXPECT_EQ(t.rows[0].x, 1.5);
  EXPECT_EQ(t.rows[0].y, 1.5);
  EXPECT_EQ(t.rows[0].ux, -0.2);
}

// sigma = -1 run equals the mirrored sigma = +1 run in the reversed axial
// field, both integrated by the ODE oracle.
TEST(SymmetryImage, HelicityFlipWithOde) {
  const Vec3 v{0.01, -0.02, 0.005};
  const Initials ini{{0.7, -1.1, 0.2}, v};
  auto minus = vptest::scenario(0.2, 0.1, v, -1);
  auto plus = vptest::scenario(-0.2, 0.1, {v[1], v[0], v[2]}, 1);
  const auto a = ode(minus, ini, 50.0, 101);
  const auto b = symmetry_image(ode(plus, swap_xy(ini), 50.0, 101));
  EXPECT_LT(max_deviation(a, b), 1e-10);
  // The analytic engine handles sigma = -1 through the same map.
  const auto c = sample_trajectory(ini, -1, 1.0, minus.omega_c, minus.omega_0, 50.0, 101);
  EXPECT_LT(max_deviation(a, c), 1e-8);
}

TEST(Nonrelativistic, PlanarWhenNoLongitudinalVelocity) {
  const auto s = nonrelativistic_trajectory({{1, 0, 3}, {0.01, 0, 0}}, 1.0, 0.1, 0.075, 100.0, 101);
  for (const auto& r : s.rows) EXPECT_EQ(r.z, 3.0);
}

// With c scaled up the relativistic engine approaches the Newtonian one.
TEST(Nonrelativistic, LimitOfRelativisticEngine) {
  const double c = 1e6;
  const Initials ini{{1.0, 0.5, 0.0}, {0.01, -0.02, 0.0}};
  const AnalyticTrajectory rel(ini, 1.0, 0.1, 0.075, c);
  const auto nr = nonrelativistic_trajectory(ini, 1.0, 0.1, 0.075, 100.0, 101);
  for (const auto& r : nr.rows) {
    const cplx p = rel.position(r.t);
    EXPECT_LT(std::abs(p - cplx(r.x, r.y)), 1e-6 * std::abs(cplx(r.x, r.y)));
  }
}

// The Newtonian closed form solves the Newtonian equations of motion.
TEST(Nonrelativistic, MatchesNewtonIntegration) {
  FieldConfig f;
  f.amplitude_B = 0.1;
  FieldSampler field(f);
  IntegratorConfig ic;
  ic.rtol = 1e-12;
  ic.atol = 1e-14;
  const auto rows = integrate_newton(field, 0.075, {1.0, 0.5}, {0.01, -0.02}, {0.0, 100.0}, ic, 101);
  const auto nr = nonrelativistic_trajectory({{1.0, 0.5, 0.0}, {0.01, -0.02, 0.0}}, 1.0, 0.1, 0.075, 100.0, 101);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(rows[i].x, nr.rows[i].x, 1e-8);
    EXPECT_NEAR(rows[i].y, nr.rows[i].y, 1e-8);
  }
}

TEST(ResampleLabTime, MonotoneAndInterpolating) {
  const auto s = vptest::scenario(0.075, 0.1, {0.001, 0, 0});
  const auto series = analytic(s, {{2, 0, 0}, {0.001, 0, 0}}).sample(100.0, 2001);
  const auto r = resample_lab_time(series, 101);
  ASSERT_EQ(r.rows.size(), 101u);
  EXPECT_NEAR(r.rows.front().t, series.rows.front().t, 1e-15);
  EXPECT_NEAR(r.rows.back().t, series.rows.back().t, 1e-12);
  for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_GT(r.rows[i].tau, r.rows[i - 1].tau);
}

TEST(TrajectoryCsv, HeaderAndPrecision) {
  TrajectorySeries s;
  TrajectoryRow r;
  r.tau = 0.1;
  s.rows.push_back(r);
  const auto csv = trajectory_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "tau,t,x,y,z,ux,uy,uz,lf_energy,const2");
  EXPECT_NE(csv.find("0.10000000000000001"), std::string::npos);
}
