// vortexpin: scenario-driven front end. Exit codes: 0 ok, 2 validation, 3 numerical.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

#include "vortexpin/cli/command_line.hpp"
#include "vortexpin/cli/run.hpp"

namespace vc = vortexpin::cli;

namespace {

int fail(const std::string& command, vortexpin::ErrorKind kind, const std::string& msg) {
  const bool validation = kind == vortexpin::ErrorKind::Validation;
  vc::json j;
  j["schema"] = vc::kSummarySchema;
  j["command"] = command;
  j["status"] = "error";
  j["error"] = validation ? "validation" : "numerical";
  j["message"] = msg;
  std::cout << j.dump() << std::endl;
  std::cerr << "vortexpin: " << msg << "\n";
  return validation ? 2 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classical and quantum charges pinned by vortex lines."};
  app.require_subcommand(0, 1);
  bool list = false;
  app.add_flag("--list-presets", list, "Print the bundled preset names");

  vc::CommandLine cl;
  std::string out = "vortexpin_out";
  for (const char* name : {"trajectory", "stability-map", "transport", "spectrum", "quantum-packet", "check-fields"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("Run a ") + name + " scenario");
    sub->add_option("--config", cl.config_path, "Scenario file");
    sub->add_option("--preset", cl.preset, "Bundled preset, e.g. fig8");
    sub->add_option("--out", out, "Output directory")->capture_default_str();
    sub->add_option("--rtol", cl.rtol, "Integrator relative tolerance");
    sub->add_option("--atol", cl.atol, "Integrator absolute tolerance");
    sub->add_option("--samples", cl.samples, "Output samples");
    sub->add_option("--seed", cl.seed, "Seed for randomized test points");
    sub->add_option("--set", cl.sets, "Override a key: section.key=value")->take_all();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("", vortexpin::ErrorKind::Validation, e.what());
  }

  if (list) {
    for (const auto& n : vc::preset_names()) std::cout << n << "\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cout << app.help();
    return 2;
  }
  cl.command = app.get_subcommands().front()->get_name();

  try {
    const auto t0 = std::chrono::steady_clock::now();
    const vc::Scenario s = vc::parse_scenario(vc::assemble_config(cl));
    vc::json sum = vc::run_scenario(s, out);
    sum["runtime_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << sum.dump() << std::endl;
    return 0;
  } catch (const vortexpin::Error& e) {
    return fail(cl.command, e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail(cl.command, vortexpin::ErrorKind::Numerical, e.what());
  }
}
