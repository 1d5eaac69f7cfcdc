#pragma once

// Scenario model behind the command line: one field, one particle set and
// exactly one run kind, read from a Config with every key accounted for.
//
// Field strengths are given either as accelerations (amplitude_b = omega_c,
// b0 = omega_0) or as ratios (nu, mu) to Omega = omega * E_lf(v0), where v0 is
// the particle's initial velocity. Mixing both forms is an error.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vortexpin/cli/config.hpp"
#include "vortexpin/field_kit.hpp"
#include "vortexpin/mode_analysis.hpp"
#include "vortexpin/ode.hpp"

namespace vortexpin::cli {

enum class RunKind { Trajectory, StabilityMap, Transport, Spectrum, QuantumPacket, CheckFields };

inline const char* run_kind_name(RunKind k) {
  switch (k) {
    case RunKind::Trajectory: return "trajectory";
    case RunKind::StabilityMap: return "stability-map";
    case RunKind::Transport: return "transport";
    case RunKind::Spectrum: return "spectrum";
    case RunKind::QuantumPacket: return "quantum-packet";
    case RunKind::CheckFields: return "check-fields";
  }
  return "?";
}

inline RunKind parse_run_kind(const std::string& s) {
  for (auto k : {RunKind::Trajectory, RunKind::StabilityMap, RunKind::Transport, RunKind::Spectrum,
                 RunKind::QuantumPacket, RunKind::CheckFields})
    if (s == run_kind_name(k)) return k;
  throw validation_error("unknown run kind '" + s + "'");
}

inline FieldKind parse_field_kind(const std::string& s) {
  for (auto k : {FieldKind::ModelVortex, FieldKind::BesselBeam, FieldKind::LGBeam, FieldKind::BoostedVortex,
                 FieldKind::SuperposedVortex})
    if (s == field_kind_name(k)) return k;
  throw validation_error("unknown field kind '" + s + "'");
}

struct ParticleSpec {
  double mass = 1.0;
  int charge = 1;
  std::vector<Vec3> positions{Vec3{0.0, 0.0, 0.0}};
  Vec3 velocity{};
};

struct TrajectoryRun {
  double duration = 600.0;  // proper time
  std::size_t samples = 6001;
  std::string method = "both";  // analytic | ode | both | nonrelativistic
  std::optional<std::array<double, 2>> fit_window;
};

struct StabilityRun {
  std::array<double, 2> mu_range{-2.0, 1.0}, nu_range{-0.8, 0.8};
  std::size_t resolution = 512;
  bool cross_check = true;
};

struct TransportRun {
  double duration = 600.0;
  std::size_t samples = 6001;
};

struct SpectrumRun {
  int n_max = 2;
  double p_z = 0.0;
  double hbar = 1.0;
  double c = 1.0;
  bool relativistic = true;
};

struct PacketRun {
  double hbar = 1.0;
  double periods = 2.0;  // drive periods 2 pi / omega_1
  double dt = 0.01;
  std::size_t grid = 256;
  std::size_t snapshots = 4;
  std::size_t path_samples = 0;  // 0 picks a spacing of 0.05
  std::vector<double> levels{0.1, 0.5, 0.9, 0.99};
  double extent = 0.0;           // 0 picks the Gaussian extent plus the path
  std::string scheme = "split";  // split | cayley
};

struct CheckFieldsRun {
  double plane_extent = 2.0;
  std::size_t plane_points = 9;
  std::size_t points = 1000;
  double step = 1e-4;
  double rmax = 10.0, tmax = 10.0;
  std::uint64_t seed = 1;
};

struct Scenario {
  RunKind kind = RunKind::Trajectory;
  bool has_field = false;
  FieldConfig field;
  ParticleSpec particle;
  IntegratorConfig tol;
  double calE = 1.0;  // light-front energy of the initial velocity
  TrajectoryRun trajectory;
  StabilityRun stability;
  TransportRun transport;
  SpectrumRun spectrum;
  PacketRun packet;
  CheckFieldsRun check;
};

namespace detail {

inline Vec3 vec3(const std::vector<double>& v, const std::string& key) {
  if (v.size() != 3) throw validation_error("key '" + key + "': expected x, y, z");
  return {v[0], v[1], v[2]};
}

inline void read_particle(const Config& c, Scenario& s) {
  ParticleSpec& p = s.particle;
  p.mass = c.num("particle.mass", 1.0);
  if (!(p.mass > 0.0)) throw validation_error("particle.mass must be positive");
  p.charge = int(c.integer("particle.charge", 1));
  if (p.charge != 1 && p.charge != -1) throw validation_error("particle.charge must be +1 or -1");
  if (c.has("particle.position")) {
    p.positions.clear();
    for (const auto& t : c.tuples("particle.position")) p.positions.push_back(vec3(t, "particle.position"));
  }
  if (c.has("particle.velocity")) p.velocity = vec3(c.list("particle.velocity"), "particle.velocity");
  const double v2 = p.velocity[0] * p.velocity[0] + p.velocity[1] * p.velocity[1] + p.velocity[2] * p.velocity[2];
  if (!(v2 < 1.0)) throw validation_error("inconsistent units: particle.velocity must be below c = 1");
  s.calE = lightfront_energy(p.velocity);
}

inline void read_field(const Config& c, Scenario& s, double Omega) {
  FieldConfig& f = s.field;
  f.kind = parse_field_kind(c.str("field.kind"));
  f.sigma = int(c.integer("field.sigma", 1));
  f.omega = c.num("field.omega", 1.0);
  if (!(f.omega > 0.0)) throw validation_error("field.omega must be positive");
  const bool ratio = c.has("field.mu") || c.has("field.nu");
  const bool accel = c.has("field.b0") || c.has("field.amplitude_b");
  if (ratio && accel)
    throw validation_error("inconsistent units: give either field.mu/field.nu or field.b0/field.amplitude_b");
  const double Om = Omega * f.omega;
  if (ratio) {
    f.b0 = c.num("field.mu", 0.0) * Om;
    f.amplitude_B = c.num("field.nu", 0.0) * Om;
  } else {
    f.b0 = c.num("field.b0", 0.0);
    f.amplitude_B = c.num("field.amplitude_b", 0.0);
  }
  if (f.kind == FieldKind::BoostedVortex) f.boost_v = c.num("field.boost_v");
  if (f.kind == FieldKind::SuperposedVortex)
    for (const char* key : {"field.term1", "field.term2"})
      if (c.has(key)) {
        const auto t = c.fixed<3>(key);
        f.terms.push_back({t[0], t[1], t[2]});
      }
  if (f.kind == FieldKind::BesselBeam || f.kind == FieldKind::LGBeam) {
    f.beam.m = int(c.integer("field.beam_m", 2));
    f.beam.n = int(c.integer("field.beam_n", 0));
    if (f.kind == FieldKind::BesselBeam) {
      f.beam.k_perp = c.num("field.k_perp");
      f.beam.k_z = c.num("field.k_z", 0.0);
    } else {
      f.beam.l = c.num("field.beam_l", 1.0);
    }
  }
  if (s.particle.charge < 0) {
    // the equations only see the charge through e E / m and e B / m
    f.b0 = -f.b0;
    f.amplitude_B = -f.amplitude_B;
  }
  validate(f);
  s.has_field = true;
}

}  // namespace detail

// Builds the scenario and fails on any key that the chosen run kind does not
// read. The common keys (rtol, atol, max_steps, samples, seed) are accepted everywhere.
inline Scenario parse_scenario(const Config& c) {
  Scenario s;
  s.kind = parse_run_kind(c.str("run.kind"));
  s.tol.rtol = c.num("run.rtol", s.tol.rtol);
  s.tol.atol = c.num("run.atol", s.tol.atol);
  s.tol.max_steps = c.count("run.max_steps", s.tol.max_steps, 1);
  validate(s.tol);
  for (const char* k : {"run.samples", "run.seed"}) c.touch(k);

  const bool needs_particle = s.kind == RunKind::Trajectory || s.kind == RunKind::Transport ||
                              s.kind == RunKind::QuantumPacket || s.kind == RunKind::Spectrum;
  if (needs_particle) detail::read_particle(c, s);
  if (s.kind != RunKind::StabilityMap) {
    // the spectrum measures mu and nu against omega itself
    detail::read_field(c, s, s.kind == RunKind::Spectrum ? 1.0 : s.calE);
  }

  switch (s.kind) {
    case RunKind::Trajectory: {
      auto& r = s.trajectory;
      r.duration = c.num("run.duration", r.duration);
      r.samples = c.count("run.samples", r.samples, 2);
      r.method = c.str("run.method", r.method);
      if (r.method != "analytic" && r.method != "ode" && r.method != "both" && r.method != "nonrelativistic")
        throw validation_error("run.method must be analytic, ode, both or nonrelativistic");
      if (c.has("run.fit_window")) r.fit_window = c.fixed<2>("run.fit_window");
      if (!(r.duration > 0.0)) throw validation_error("run.duration must be positive");
      break;
    }
    case RunKind::StabilityMap: {
      auto& r = s.stability;
      if (c.has("run.mu_range")) r.mu_range = c.fixed<2>("run.mu_range");
      if (c.has("run.nu_range")) r.nu_range = c.fixed<2>("run.nu_range");
      r.resolution = c.count("run.resolution", r.resolution, 2);
      r.cross_check = c.flag("run.cross_check", r.cross_check);
      break;
    }
    case RunKind::Transport: {
      auto& r = s.transport;
      r.duration = c.num("run.duration", r.duration);
      r.samples = c.count("run.samples", r.samples, 2);
      if (!(r.duration > 0.0)) throw validation_error("run.duration must be positive");
      break;
    }
    case RunKind::Spectrum: {
      auto& r = s.spectrum;
      r.n_max = int(c.count("run.n_max", std::size_t(r.n_max)));
      r.p_z = c.num("run.p_z", r.p_z);
      r.hbar = c.num("run.hbar", r.hbar);
      r.c = c.num("run.c", r.c);
      r.relativistic = c.flag("run.relativistic", r.relativistic);
      if (!(r.hbar > 0.0) || !(r.c > 0.0)) throw validation_error("run.hbar and run.c must be positive");
      break;
    }
    case RunKind::QuantumPacket: {
      auto& r = s.packet;
      r.hbar = c.num("run.hbar", r.hbar);
      r.periods = c.num("run.periods", r.periods);
      r.dt = c.num("run.dt", r.dt);
      r.grid = c.count("run.grid", r.grid, 16);
      r.snapshots = c.count("run.snapshots", r.snapshots, 1);
      r.path_samples = c.count("run.samples", r.path_samples);
      if (c.has("run.levels")) r.levels = c.list("run.levels");
      r.extent = c.num("run.extent", r.extent);
      r.scheme = c.str("run.scheme", r.scheme);
      if (r.scheme != "split" && r.scheme != "cayley") throw validation_error("run.scheme must be split or cayley");
      if (!(r.hbar > 0.0) || !(r.periods > 0.0) || !(r.dt > 0.0) || r.extent < 0.0)
        throw validation_error("run.hbar, run.periods and run.dt must be positive");
      for (double p : r.levels)
        if (!(p > 0.0 && p < 1.0)) throw validation_error("run.levels must lie in (0, 1)");
      break;
    }
    case RunKind::CheckFields: {
      auto& r = s.check;
      r.plane_extent = c.num("run.plane_extent", r.plane_extent);
      r.plane_points = c.count("run.plane_points", r.plane_points, 2);
      r.points = c.count("run.points", r.points, 1);
      r.step = c.num("run.step", r.step);
      r.rmax = c.num("run.rmax", r.rmax);
      r.tmax = c.num("run.tmax", r.tmax);
      r.seed = std::uint64_t(c.count("run.seed", std::size_t(r.seed)));
      if (!(r.plane_extent > 0.0) || !(r.step > 0.0)) throw validation_error("plane_extent and step must be positive");
      break;
    }
  }
  c.require_all_used();
  return s;
}

}  // namespace vortexpin::cli
