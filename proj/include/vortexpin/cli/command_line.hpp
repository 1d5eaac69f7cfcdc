#pragma once

// Merges a config file or preset with command-line overrides. Flags win over
// file keys; the subcommand fixes run.kind.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vortexpin/cli/config.hpp"
#include "vortexpin/cli/presets.hpp"
#include "vortexpin/cli/scenario.hpp"

namespace vortexpin::cli {

struct CommandLine {
  std::string command;
  std::optional<std::string> config_path, preset;
  std::optional<double> rtol, atol;
  std::optional<long> samples, seed;
  std::vector<std::string> sets;  // "section.key=value"
};

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw validation_error("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline Config assemble_config(const CommandLine& cl) {
  if (cl.config_path && cl.preset) throw validation_error("give either --config or --preset, not both");
  Config c;
  if (cl.config_path) c = Config::parse(read_file(*cl.config_path), *cl.config_path);
  if (cl.preset) c = load_preset(*cl.preset);
  if (c.has("run.kind") && c.str("run.kind") != cl.command)
    throw validation_error("scenario has run.kind = " + c.str("run.kind") + " (" + c.origin("run.kind") +
                           ") but the subcommand is " + cl.command);
  c.set("run.kind", cl.command, "subcommand");
  for (const auto& s : cl.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw validation_error("--set expects section.key=value, got '" + s + "'");
    c.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)), "--set");
  }
  if (cl.rtol) c.set("run.rtol", fmt17(*cl.rtol), "--rtol");
  if (cl.atol) c.set("run.atol", fmt17(*cl.atol), "--atol");
  if (cl.samples) c.set("run.samples", std::to_string(*cl.samples), "--samples");
  if (cl.seed) c.set("run.seed", std::to_string(*cl.seed), "--seed");
  return c;
}

}  // namespace vortexpin::cli
