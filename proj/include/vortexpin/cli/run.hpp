#pragma once

// Dispatch of a Scenario to the library modules. Every output is staged in
// memory and committed only after the whole run succeeded (temp file, then
// rename), so a failed run never leaves partial files behind.

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "vortexpin/cli/scenario.hpp"
#include "vortexpin/field_kit.hpp"
#include "vortexpin/lorentz_oracle.hpp"
#include "vortexpin/mode_analysis.hpp"
#include "vortexpin/quantum_engine.hpp"
#include "vortexpin/trajectory_engine.hpp"

namespace vortexpin::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSummarySchema = 1;

class OutputSet {
 public:
  void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }
  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (const auto& f : files_) n.push_back(f.first);
    return n;
  }

  void commit(const std::filesystem::path& dir) const {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw validation_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    std::vector<fs::path> staged;
    auto cleanup = [&] {
      for (const auto& p : staged) fs::remove(p, ec);
    };
    for (const auto& [name, content] : files_) {
      const fs::path tmp = dir / ("." + name + ".tmp");
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      staged.push_back(tmp);
      os.write(content.data(), std::streamsize(content.size()));
      os.close();
      if (!os) {
        cleanup();
        throw validation_error("cannot write '" + tmp.string() + "'");
      }
    }
    for (std::size_t k = 0; k < files_.size(); ++k) {
      fs::rename(staged[k], dir / files_[k].first, ec);
      if (ec) {
        cleanup();
        throw validation_error("cannot move output into place: " + ec.message());
      }
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

// JSON has no NaN; inapplicable metrics become null.
inline json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

namespace detail {

inline json invariants_json(const InvariantReport& r) {
  return {{"applicable", r.applicable},
          {"lf_energy_drift", num_or_null(r.lf_energy_drift)},
          {"const2_drift", num_or_null(r.const2_drift)},
          {"norm_drift", num_or_null(r.norm_drift)}};
}

inline double max_deviation(const TrajectorySeries& a, const TrajectorySeries& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < std::min(a.rows.size(), b.rows.size()); ++k) {
    const auto &p = a.rows[k], &q = b.rows[k];
    d = std::max(d, std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.z - q.z) * (p.z - q.z)));
  }
  return d;
}

inline std::string tag(std::size_t k) { return "p" + std::to_string(k); }

inline void run_trajectory(const Scenario& s, OutputSet& out, json& sum) {
  const auto& r = s.trajectory;
  const FieldConfig& f = s.field;
  const double Omega = f.omega * s.calE;
  const double mu = f.b0 / Omega, nu = f.amplitude_B / Omega;
  sum["mu"] = mu;
  sum["nu"] = nu;
  sum["calE"] = s.calE;
  sum["stability"] = stability_name(classify_stability(mu, nu));
  const bool analytic = r.method == "analytic" || r.method == "both";
  const bool ode = r.method == "ode" || r.method == "both";
  if ((analytic || r.method == "nonrelativistic") && f.kind != FieldKind::ModelVortex)
    throw validation_error("closed-form trajectories need field.kind = model");
  if (r.fit_window) {
    const auto rr = characteristic_frequencies(mu, nu);
    sum["growth_target"] = Omega * std::fabs(rr[1].imag());
  }
  json parts = json::array();
  for (std::size_t k = 0; k < s.particle.positions.size(); ++k) {
    const Initials ini{s.particle.positions[k], s.particle.velocity};
    json p;
    p["position"] = ini.position;
    TrajectorySeries a, o;
    if (analytic) {
      a = sample_trajectory(ini, f.sigma, f.omega, f.amplitude_B, f.b0, r.duration, r.samples);
      out.add("trajectory_" + tag(k) + "_analytic.csv", trajectory_csv(a));
      p["analytic_method"] = a.method;
      p["analytic_invariants"] = invariants_json(invariant_report(a));
    }
    if (r.method == "nonrelativistic") {
      a = nonrelativistic_trajectory(ini, f.omega, f.amplitude_B, f.b0, r.duration, r.samples);
      out.add("trajectory_" + tag(k) + "_nonrelativistic.csv", trajectory_csv(a));
    }
    if (ode) {
      // lab-time origin of the closed form: theta(0) = zeta(0)
      o = integrate_lorentz(f, WorldlineState::from_velocity(ini.position, ini.velocity, ini.position[2]),
                            {0.0, r.duration}, s.tol, r.samples);
      out.add("trajectory_" + tag(k) + "_ode.csv", trajectory_csv(o));
      p["ode_invariants"] = invariants_json(invariant_report(o));
    }
    if (analytic && ode) p["max_deviation"] = max_deviation(a, o);
    if (r.fit_window) p["growth_rate"] = growth_rate(ode ? o : a, *r.fit_window);
    parts.push_back(p);
  }
  sum["particles"] = parts;
}

inline void run_stability(const Scenario& s, OutputSet& out, json& sum) {
  const auto& r = s.stability;
  const auto cells = stability_map(r.mu_range, r.nu_range, r.resolution);
  std::string csv = "mu,nu,class,re_r_plus,im_r_plus,re_r_minus,im_r_minus\n";
  csv.reserve(cells.size() * 120);
  for (const auto& c : cells)
    csv += fmt17(c.mu) + "," + fmt17(c.nu) + "," + stability_name(c.cls) + "," + fmt17(c.r_plus.real()) + "," +
           fmt17(c.r_plus.imag()) + "," + fmt17(c.r_minus.real()) + "," + fmt17(c.r_minus.imag()) + "\n";
  out.add("stability_map.csv", std::move(csv));
  sum["rows"] = cells.size();
  if (r.cross_check) {
    const auto x = cross_check_stability(cells);
    sum["stable"] = x.stable;
    sum["marginal"] = x.marginal;
    sum["unstable"] = x.unstable;
    sum["disagreements"] = x.disagreements;
  }
}

inline void run_transport(const Scenario& s, OutputSet& out, json& sum) {
  const auto& r = s.transport;
  json parts = json::array();
  for (std::size_t k = 0; k < s.particle.positions.size(); ++k) {
    const Vec3& pos = s.particle.positions[k];
    const auto res =
        transport_run(s.field, WorldlineState::from_velocity(pos, s.particle.velocity), r.duration, s.tol,
                      r.samples);
    out.add("transport_" + tag(k) + ".csv", trajectory_csv(res.series));
    out.add("vortex_path_" + tag(k) + ".csv", vortex_path_csv(res.vortex));
    parts.push_back({{"position", pos},
                     {"max_distance", res.max_distance},
                     {"invariants", invariants_json(invariant_report(res.series))}});
  }
  sum["particles"] = parts;
}

inline void run_spectrum(const Scenario& s, OutputSet& out, json& sum) {
  const auto& r = s.spectrum;
  const FieldConfig& f = s.field;
  if (f.kind != FieldKind::ModelVortex) throw validation_error("spectrum needs field.kind = model");
  const double m = s.particle.mass;
  const double mu = f.b0 / f.omega, nu = f.amplitude_B / f.omega;
  sum["mu"] = mu;
  sum["nu"] = nu;
  sum["stability"] = stability_name(classify_stability(mu, nu));
  const ModeData md = mode_data(mu, nu, f.omega, m);
  RelativisticInputs in{f.omega, f.amplitude_B, f.b0, m, r.c, r.hbar};
  std::string csv = r.relativistic ? "n_plus,n_minus,spin,p_z,e_perp,e_rel,omega_rel\n" : "n_plus,n_minus,spin,p_z,e_perp\n";
  for (int np = 0; np <= r.n_max; ++np)
    for (int nm = 0; nm <= r.n_max; ++nm)
      for (int spin : {1, -1}) {
        const LevelSpec lvl{np, nm, spin, r.p_z};
        csv += std::to_string(np) + "," + std::to_string(nm) + "," + std::to_string(spin) + "," + fmt17(r.p_z) + "," +
               fmt17(transverse_energy(lvl, md, r.hbar));
        if (r.relativistic) {
          const auto sol = solve_relativistic_level(lvl, in);
          csv += "," + fmt17(sol.E) + "," + fmt17(sol.Omega);
        }
        csv += "\n";
      }
  out.add("spectrum.csv", std::move(csv));
  const GaussianState g = gaussian_params(mu, nu, m * f.omega / r.hbar, r.hbar);
  const auto ann = annihilation_residual(g, md);
  double eq = 0.0;
  for (double v : eq_system_residuals(g, md)) eq = std::max(eq, v);
  sum["gaussian"] = {{"q_x", g.q_x},
                     {"q_y", g.q_y},
                     {"q", g.q},
                     {"u", g.u},
                     {"varpi", g.varpi},
                     {"annihilation_residual", ann.grid_residual},
                     {"linear_system_residual", eq}};
}

inline void run_check_fields(const Scenario& s, OutputSet& out, json& sum) {
  const auto& r = s.check;
  FieldSampler field(s.field);
  std::string csv = "x,y,ex,ey,ez,bx,by,bz\n";
  const std::size_t n = r.plane_points;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = -r.plane_extent + 2.0 * r.plane_extent * double(i) / double(n - 1);
      const double y = -r.plane_extent + 2.0 * r.plane_extent * double(j) / double(n - 1);
      const FieldSample fs = field(Vec3{x, y, 0.0}, 0.0);
      csv += fmt17(x) + "," + fmt17(y);
      for (double v : {fs.e[0], fs.e[1], fs.e[2], fs.b[0], fs.b[1], fs.b[2]}) csv += "," + fmt17(v);
      csv += "\n";
    }
  out.add("field_plane.csv", std::move(csv));
  const auto st = maxwell_residual(s.field, random_spacetime_points(r.points, r.rmax, r.tmax, r.seed), r.step);
  sum["field_kind"] = field_kind_name(s.field.kind);
  sum["points"] = r.points;
  sum["maxwell_residual_max"] = st.max;
  sum["maxwell_residual_rms"] = st.rms;
}

inline void run_quantum_packet(const Scenario& s, OutputSet& out, json& sum) {
  const auto& r = s.packet;
  const FieldConfig& f = s.field;
  const double m = s.particle.mass, hb = r.hbar;
  const QuadraticHamiltonian qh = lab_frame_hamiltonian(f, m);
  const LabGaussian L = lab_gaussian(f, m, hb);
  const double w1 = f.terms.empty() ? f.omega : f.terms.front().omega;
  const double T = r.periods * 2.0 * kPi / w1;
  const Vec3& p0 = s.particle.positions.front();
  const Vec2 xi0{p0[0], p0[1]};
  const Vec2 pi0 = canonical_momentum(xi0, {s.particle.velocity[0], s.particle.velocity[1]}, f.b0, m);
  const std::size_t np = r.path_samples ? r.path_samples : std::max<std::size_t>(2001, std::size_t(T / 0.05) + 2);
  const ClassicalPath path = classical_path_quadratic(qh, xi0, pi0, {0.0, T}, np, s.tol);

  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : path.samples) {
    x0 = std::min(x0, p.xi[0]);
    x1 = std::max(x1, p.xi[0]);
    y0 = std::min(y0, p.xi[1]);
    y1 = std::max(y1, p.xi[1]);
  }
  const double ext = r.extent > 0.0 ? r.extent : default_extent(L.g) + 0.5 * std::max(x1 - x0, y1 - y0);
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  auto exact = [&](double t) {
    return sample_grid([&](double x, double y) { return displaced_solution(L, path, x, y, t, hb); }, r.grid, r.grid,
                       ext, ext, cx, cy);
  };

  const std::size_t nsteps = std::size_t(std::ceil(T / r.dt - 1e-9));
  std::vector<std::size_t> snap_steps;
  for (std::size_t k = 0; k < r.snapshots; ++k)
    snap_steps.push_back(r.snapshots == 1 ? nsteps
                                          : std::size_t(std::llround(double(k) * double(nsteps) / double(r.snapshots - 1))));
  const std::size_t stride = std::max<std::size_t>(1, std::size_t(std::llround(1.0 / r.dt)));

  double worst_l2 = 0.0, worst_c = 0.0;
  std::size_t snap = 0, step = 0;
  auto check = [&](double t, const WaveFunctionGrid& g) {
    const auto ex = exact(t);
    worst_l2 = std::max(worst_l2, l2_distance(g, ex) / l2_norm(ex));
    const auto c = centroid(g);
    const auto ps = path.at(t);
    worst_c = std::max(worst_c, std::hypot(c[0] - ps.xi[0], c[1] - ps.xi[1]));
  };
  auto visit = [&](double t, const WaveFunctionGrid& g) {
    const bool is_snap = snap < snap_steps.size() && snap_steps[snap] == step;
    if (is_snap || step % stride == 0 || step == nsteps) check(t, g);
    while (snap < snap_steps.size() && snap_steps[snap] == step) {
      out.add("packet_snapshot_" + std::to_string(snap) + ".txt", snapshot_text(g, t));
      out.add("packet_contours_" + std::to_string(snap) + ".csv", contours_csv(probability_contours(g, r.levels)));
      ++snap;
    }
  };
  const WaveFunctionGrid psi0 = exact(0.0);
  visit(0.0, psi0);
  PropagationReport rep;
  grid_propagate(
      qh, psi0, {0.0, T}, r.dt, hb, &rep,
      [&](double t, const WaveFunctionGrid& g) {
        ++step;
        visit(t, g);
      },
      r.scheme == "split" ? CayleyScheme::SplitTripleJump : CayleyScheme::TripleJump);

  std::string pcsv = "t,xi_x,xi_y,pi_x,pi_y,S\n";
  for (const auto& p : path.samples)
    pcsv += fmt17(p.t) + "," + fmt17(p.xi[0]) + "," + fmt17(p.xi[1]) + "," + fmt17(p.pi[0]) + "," + fmt17(p.pi[1]) +
            "," + fmt17(p.S) + "\n";
  out.add("packet_path.csv", std::move(pcsv));
  sum["grid"] = r.grid;
  sum["extent"] = ext;
  sum["center"] = {cx, cy};
  sum["dt"] = r.dt;
  sum["steps"] = rep.steps;
  sum["scheme"] = r.scheme;
  sum["drive_period"] = 2.0 * kPi / w1;
  sum["t_end"] = T;
  sum["gaussian"] = {{"q_x", L.g.q_x}, {"q_y", L.g.q_y}, {"q", L.g.q}, {"energy", L.energy}};
  sum["snapshots"] = snap;
  sum["max_l2_error"] = worst_l2;
  sum["max_centroid_error"] = worst_c;
  sum["max_norm_drift"] = rep.max_norm_drift;
}

}  // namespace detail

// Runs the scenario, commits its files into out_dir and returns the summary
// (also written as summary.json). Throws vortexpin::Error on failure.
inline json run_scenario(const Scenario& s, const std::filesystem::path& out_dir) {
  json sum;
  sum["schema"] = kSummarySchema;
  sum["command"] = run_kind_name(s.kind);
  sum["status"] = "ok";
  OutputSet out;
  switch (s.kind) {
    case RunKind::Trajectory: detail::run_trajectory(s, out, sum); break;
    case RunKind::StabilityMap: detail::run_stability(s, out, sum); break;
    case RunKind::Transport: detail::run_transport(s, out, sum); break;
    case RunKind::Spectrum: detail::run_spectrum(s, out, sum); break;
    case RunKind::QuantumPacket: detail::run_quantum_packet(s, out, sum); break;
    case RunKind::CheckFields: detail::run_check_fields(s, out, sum); break;
  }
  json files = out.names();
  files.push_back("summary.json");
  sum["outputs"] = files;
  out.add("summary.json", sum.dump(2) + "\n");
  out.commit(out_dir);
  return sum;
}

}  // namespace vortexpin::cli
