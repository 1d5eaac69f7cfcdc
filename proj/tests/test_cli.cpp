#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "test_util.hpp"
#include "vortexpin/cli/command_line.hpp"
#include "vortexpin/cli/run.hpp"

using namespace vortexpin;
using namespace vortexpin::cli;
namespace fs = std::filesystem;

namespace {

#define EXPECT_ERROR(expr, k) EXPECT_EQ(vptest::error_kind([&] { (void)(expr); }), ErrorKind::k)

struct TempDir {
  fs::path path;
  TempDir() {
    const auto* info = testing::UnitTest::GetInstance()->current_test_info();
    path = fs::temp_directory_path() /
           ("vortexpin_" + std::string(info->test_suite_name()) + "_" + info->name() + "_" +
            std::to_string(std::random_device{}()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& s) const { return path / s; }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

Scenario parse(const std::string& text) { return parse_scenario(Config::parse(text, "test.cfg")); }

Scenario preset(const std::string& name) { return parse_scenario(load_preset(name)); }

std::string message_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"(
[field]
kind = model
mu = 0.075
nu = 0.1
[particle]
position = 1, 0, 0
velocity = 0.001, 0, 0
[run]
kind = trajectory
)";

}  // namespace

// ---------------------------------------------------------------- config file

TEST(Config, SectionsCommentsAndLists) {
  const Config c = Config::parse("# top\n[a]\nx = 1.5  # trailing\ny = 1, 2 ; 3, 4\n[b]\nz = word\n", "f");
  EXPECT_EQ(c.num("a.x"), 1.5);
  const auto t = c.tuples("a.y");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1][1], 4.0);
  EXPECT_EQ(c.str("b.z"), "word");
  EXPECT_EQ(c.origin("a.x"), "f:3");
}

TEST(Config, ParseErrorsCarryLineNumbers) {
  auto msg = [](const std::string& text) {
    try {
      Config::parse(text, "s.cfg");
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Validation);
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg("[run\n").find("s.cfg:1"), std::string::npos);
  EXPECT_NE(msg("[run]\nkind trajectory\n").find("s.cfg:2"), std::string::npos);
  EXPECT_NE(msg("x = 1\n").find("outside"), std::string::npos);
  EXPECT_NE(msg("[a]\nx = 1\nx = 2\n").find("duplicate key 'a.x'"), std::string::npos);
}

TEST(Config, BadNumbersNameTheKey) {
  const Config c = Config::parse("[run]\nduration = 6e\n", "f");
  try {
    c.num("run.duration");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("run.duration"), std::string::npos);
  }
}

// ------------------------------------------------------------- parse_scenario

TEST(ParseScenario, MinimalTrajectoryFillsDefaults) {
  const Scenario s = parse(kMinimal);
  EXPECT_EQ(s.kind, RunKind::Trajectory);
  EXPECT_EQ(s.trajectory.method, "both");
  EXPECT_EQ(s.trajectory.duration, 600.0);
  EXPECT_EQ(s.trajectory.samples, 6001u);
  EXPECT_EQ(s.particle.mass, 1.0);
  EXPECT_EQ(s.field.sigma, 1);
  EXPECT_EQ(s.field.omega, 1.0);
  const double Om = lightfront_energy({0.001, 0, 0});
  EXPECT_NEAR(s.field.b0, 0.075 * Om, 1e-15);
  EXPECT_NEAR(s.field.amplitude_B, 0.1 * Om, 1e-15);
}

TEST(ParseScenario, UnknownKeyIsNamed) {
  const std::string msg = message_of(std::string(kMinimal) + "omega_z = 3\n");
  EXPECT_NE(msg.find("unknown key 'run.omega_z'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.cfg:11"), std::string::npos) << msg;
}

TEST(ParseScenario, KeysOfAnotherRunKindAreUnknown) {
  EXPECT_ERROR(parse(std::string(kMinimal) + "resolution = 64\n"), Validation);
}

TEST(ParseScenario, InconsistentUnits) {
  const std::string text = "[field]\nkind = model\nmu = 0.1\namplitude_b = 0.2\n[run]\nkind = check-fields\n";
  EXPECT_NE(message_of(text).find("inconsistent units"), std::string::npos);
  EXPECT_NE(message_of("[field]\nkind = model\n[particle]\nvelocity = 1, 0, 0\n[run]\nkind = trajectory\n")
                .find("inconsistent units"),
            std::string::npos);
}

TEST(ParseScenario, RejectsBadValues) {
  EXPECT_ERROR(parse("[run]\nkind = orbit\n"), Validation);
  EXPECT_ERROR(parse("[field]\nkind = plane\n[run]\nkind = check-fields\n"), Validation);
  EXPECT_ERROR(parse(std::string(kMinimal) + "method = euler\n"), Validation);
  EXPECT_ERROR(parse(std::string(kMinimal) + "rtol = -1\n"), Validation);
  EXPECT_ERROR(parse(std::string(kMinimal) + "samples = 1\n"), Validation);
  EXPECT_ERROR(parse("[field]\nkind = model\n[particle]\ncharge = 2\n[run]\nkind = trajectory\n"), Validation);
  EXPECT_ERROR(parse("[field]\nkind = model\n[particle]\nposition = 1, 0\n[run]\nkind = trajectory\n"), Validation);
  EXPECT_ERROR(parse("[field]\nkind = model\nmu = 0.1\n[run]\nkind = quantum-packet\nlevels = 0.5, 1.5\n"),
               Validation);
}

TEST(ParseScenario, NegativeChargeFlipsFieldStrengths) {
  Config c = Config::parse(kMinimal, "m");
  c.set("particle.charge", "-1");
  const Scenario s = parse_scenario(c);
  const double Om = lightfront_energy({0.001, 0, 0});
  EXPECT_NEAR(s.field.b0, -0.075 * Om, 1e-15);
  EXPECT_NEAR(s.field.amplitude_B, -0.1 * Om, 1e-15);
}

TEST(ParseScenario, FlagsOverrideFileKeys) {
  TempDir d;
  fs::create_directories(d.path);
  std::ofstream(d / "s.cfg") << kMinimal;
  CommandLine cl;
  cl.command = "trajectory";
  cl.config_path = (d / "s.cfg").string();
  cl.rtol = 1e-8;
  cl.samples = 11;
  cl.sets = {"run.duration = 5", "field.nu=0.05"};
  const Scenario s = parse_scenario(assemble_config(cl));
  EXPECT_EQ(s.tol.rtol, 1e-8);
  EXPECT_EQ(s.trajectory.samples, 11u);
  EXPECT_EQ(s.trajectory.duration, 5.0);
  EXPECT_NEAR(s.field.amplitude_B, 0.05 * s.calE, 1e-15);

  cl.command = "spectrum";
  EXPECT_ERROR(assemble_config(cl), Validation);
  cl.command = "trajectory";
  cl.preset = "fig3";
  EXPECT_ERROR(assemble_config(cl), Validation);
  cl.preset.reset();
  cl.config_path = (d / "missing.cfg").string();
  EXPECT_ERROR(assemble_config(cl), Validation);
}

TEST(ParseScenario, FlagsAloneAreEnough) {
  CommandLine cl;
  cl.command = "stability-map";
  cl.sets = {"run.resolution=8"};
  const Scenario s = parse_scenario(assemble_config(cl));
  EXPECT_EQ(s.stability.resolution, 8u);
}

// ------------------------------------------------------------------- presets

TEST(Presets, EveryPresetParses) {
  for (const auto& n : preset_names()) EXPECT_NO_THROW(preset(n)) << n;
  EXPECT_ERROR(load_preset("fig11"), Validation);
}

TEST(Presets, CirculatingVortexPreset) {
  const Scenario s = parse_scenario(load_preset("presets/fig8"));
  EXPECT_EQ(s.kind, RunKind::Transport);
  EXPECT_EQ(s.field.kind, FieldKind::SuperposedVortex);
  EXPECT_EQ(s.calE, 1.0);
  EXPECT_EQ(s.field.b0, 0.1);
  EXPECT_EQ(s.field.amplitude_B, 0.12);
  ASSERT_EQ(s.field.terms.size(), 1u);
  EXPECT_EQ(std::hypot(s.field.terms[0].x, s.field.terms[0].y), 10.0);
  // circulation period 2 pi / (1 - 0.99) = 100 wave periods
  EXPECT_NEAR(2 * kPi / (s.field.omega - s.field.terms[0].omega), 100 * 2 * kPi, 1e-9);
}

TEST(Presets, PresetParameters) {
  const Scenario f2 = preset("fig2");
  EXPECT_EQ(f2.stability.resolution, 512u);
  EXPECT_EQ(f2.stability.mu_range, (std::array<double, 2>{-2, 1}));
  EXPECT_EQ(f2.stability.nu_range, (std::array<double, 2>{-0.8, 0.8}));

  const Scenario f3 = preset("fig3");
  EXPECT_NEAR(f3.field.b0 / (f3.field.omega * f3.calE), 0.075, 1e-15);
  EXPECT_NEAR(f3.field.amplitude_B / (f3.field.omega * f3.calE), 0.1, 1e-15);
  EXPECT_EQ(f3.particle.positions.size(), 3u);
  EXPECT_EQ(f3.particle.velocity, (Vec3{0.001, 0, 0}));

  const Scenario f4 = preset("fig4");
  EXPECT_NEAR(f4.field.b0 / (f4.field.omega * f4.calE), -0.5, 1e-15);
  EXPECT_NEAR(f4.field.amplitude_B / (f4.field.omega * f4.calE), 0.075, 1e-15);
  EXPECT_EQ(f4.particle.positions.front(), (Vec3{60, 0, 0}));

  const Scenario f10 = preset("fig10");
  EXPECT_EQ(f10.field.b0, 0.1);
  EXPECT_EQ(f10.field.amplitude_B, 0.12);
  EXPECT_EQ(f10.field.terms.front().omega, 0.95);
  EXPECT_EQ(f10.packet.grid, 256u);
  EXPECT_EQ(f10.packet.snapshots, 4u);
}

// -------------------------------------------------------------- run_scenario

TEST(RunScenario, StabilityMap512) {
  TempDir d;
  const json sum = run_scenario(preset("fig2"), d.path);
  EXPECT_EQ(sum["schema"], 1);
  EXPECT_EQ(sum["rows"], 262144);
  EXPECT_EQ(sum["disagreements"], 0);
  const std::string csv = slurp(d / "stability_map.csv");
  EXPECT_EQ(line_count(csv), 262144u + 1);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "mu,nu,class,re_r_plus,im_r_plus,re_r_minus,im_r_minus");
  EXPECT_TRUE(fs::exists(d / "summary.json"));
}

TEST(RunScenario, TrajectoryBothWritesTwoCsvsAndDeviation) {
  TempDir d;
  Config c = Config::parse(kMinimal, "m");
  c.set("run.duration", "50");
  c.set("run.samples", "501");
  const json sum = run_scenario(parse_scenario(c), d.path);
  EXPECT_EQ(line_count(slurp(d / "trajectory_p0_analytic.csv")), 502u);
  EXPECT_EQ(line_count(slurp(d / "trajectory_p0_ode.csv")), 502u);
  const double dev = sum["particles"][0]["max_deviation"];
  EXPECT_LT(dev, 1e-6);
  EXPECT_EQ(sum["outputs"].size(), 3u);
}

TEST(RunScenario, QuantumPacketWritesRequestedSnapshots) {
  TempDir d;
  Config c = load_preset("fig10");
  c.set("run.grid", "64");
  c.set("run.periods", "0.25");
  c.set("run.dt", "0.05");
  c.set("run.snapshots", "3");
  const json sum = run_scenario(parse_scenario(c), d.path);
  EXPECT_EQ(sum["snapshots"], 3);
  for (int k = 0; k < 3; ++k) {
    EXPECT_TRUE(fs::exists(d / ("packet_snapshot_" + std::to_string(k) + ".txt"))) << k;
    EXPECT_TRUE(fs::exists(d / ("packet_contours_" + std::to_string(k) + ".csv"))) << k;
  }
  EXPECT_FALSE(fs::exists(d / "packet_snapshot_3.txt"));
  EXPECT_TRUE(fs::exists(d / "packet_path.csv"));
  EXPECT_LT(double(sum["max_norm_drift"]), 1e-8);
}

TEST(RunScenario, SpectrumAndCheckFields) {
  TempDir d;
  const json sp = run_scenario(
      parse("[field]\nkind = model\nmu = 0.1\nnu = 0.12\n[particle]\nmass = 1\n[run]\nkind = spectrum\nn_max = 1\n"),
      d / "sp");
  EXPECT_EQ(line_count(slurp(d / "sp" / "spectrum.csv")), 1u + 2 * 2 * 2);
  EXPECT_NEAR(double(sp["gaussian"]["q_x"]), 0.148149, 1e-6);
  EXPECT_LT(double(sp["gaussian"]["annihilation_residual"]), 1e-8);

  const json cf = run_scenario(preset("fig1"), d / "cf");
  EXPECT_LT(double(cf["maxwell_residual_max"]), 1e-6);
  EXPECT_EQ(line_count(slurp(d / "cf" / "field_plane.csv")), 82u);
}

TEST(RunScenario, Deterministic) {
  TempDir d;
  Config c = load_preset("fig3");
  c.set("run.duration", "20");
  c.set("run.samples", "101");
  run_scenario(parse_scenario(c), d / "a");
  run_scenario(parse_scenario(c), d / "b");
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(d / "a")) {
    EXPECT_EQ(slurp(e.path()), slurp(d / "b" / e.path().filename())) << e.path();
    ++n;
  }
  EXPECT_EQ(n, 7u);
}

TEST(RunScenario, FailedRunLeavesNoPartialOutput) {
  TempDir d;
  fs::create_directories(d.path);
  std::ofstream(d / "summary.json") << "old";
  Config c = load_preset("fig3");
  c.set("run.duration", "20");
  c.set("run.samples", "101");
  c.set("run.fit_window", "700, 800");  // the first particle's CSVs are staged before this fails
  EXPECT_ERROR(run_scenario(parse_scenario(c), d.path), Validation);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(d.path)) {
    (void)e;
    ++n;
  }
  EXPECT_EQ(n, 1u);
  EXPECT_EQ(slurp(d / "summary.json"), "old");
}

TEST(RunScenario, UnwritableOutputIsValidationError) {
  TempDir d;
  fs::create_directories(d.path);
  std::ofstream(d / "file") << "x";
  Config c = Config::parse("[run]\nkind = stability-map\nresolution = 4\n", "m");
  EXPECT_ERROR(run_scenario(parse_scenario(c), d / "file" / "sub"), Validation);
}

TEST(RunScenario, FieldKindMismatchIsValidationError) {
  TempDir d;
  const Scenario s = parse("[field]\nkind = superposed\nmu = 0.1\nnu = 0.12\nterm1 = 10, 0, 0.99\n[run]\nkind = spectrum\n");
  EXPECT_ERROR(run_scenario(s, d.path), Validation);
  EXPECT_FALSE(fs::exists(d.path));
}

// -------------------------------------------------------------- the binary

#ifdef VORTEXPIN_CLI_BINARY
namespace {

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string(VORTEXPIN_CLI_BINARY) + " " + args + " > " + stdout_file.string() + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Binary, ExitCodesAndOneLineSummary) {
  TempDir d;
  fs::create_directories(d.path);
  const fs::path log = d / "stdout.txt";
  EXPECT_EQ(run_cli("stability-map --preset fig2 --set run.resolution=16 --out " + (d / "ok").string(), log), 0);
  std::string out = slurp(log);
  EXPECT_EQ(line_count(out), 1u);
  const json j = json::parse(out);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["rows"], 256);
  EXPECT_TRUE(j.contains("runtime_s"));
  EXPECT_FALSE(json::parse(slurp(d / "ok" / "summary.json")).contains("runtime_s"));

  EXPECT_EQ(run_cli("trajectory --preset fig3 --set run.omega_z=1 --out " + (d / "bad").string(), log), 2);
  const json e = json::parse(slurp(log));
  EXPECT_EQ(e["status"], "error");
  EXPECT_NE(std::string(e["message"]).find("omega_z"), std::string::npos);
  EXPECT_FALSE(fs::exists(d / "bad"));

  EXPECT_EQ(run_cli("trajectory --preset fig3 --set run.max_steps=5 --set run.method=ode --out " + (d / "num").string(),
                    log),
            3);
  EXPECT_EQ(json::parse(slurp(log))["error"], "numerical");
  EXPECT_FALSE(fs::exists(d / "num"));

  EXPECT_EQ(run_cli("trajectory --rtol abc", log), 2);
  EXPECT_EQ(run_cli("check-fields --preset fig1 --seed 7 --samples 3 --out " + (d / "cf").string(), log), 0);
}
#endif
