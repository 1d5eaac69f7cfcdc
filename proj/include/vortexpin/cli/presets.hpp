#pragma once

// Scenario presets compiled into the binary from presets/*.cfg.

#include <string>
#include <vector>

#include "vortexpin/cli/config.hpp"
#include "vortexpin/presets_embedded.hpp"

namespace vortexpin::cli {

inline std::vector<std::string> preset_names() {
  std::vector<std::string> n;
  for (const auto& p : kEmbeddedPresets) n.emplace_back(p.first);
  return n;
}

// Accepts "fig8" or "presets/fig8".
inline std::string preset_text(std::string name) {
  if (name.rfind("presets/", 0) == 0) name.erase(0, 8);
  for (const auto& p : kEmbeddedPresets)
    if (p.first == name) return std::string(p.second);
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw validation_error("unknown preset '" + name + "' (known: " + known + ")");
}

inline Config load_preset(const std::string& name) { return Config::parse(preset_text(name), "preset:" + name); }

}  // namespace vortexpin::cli
