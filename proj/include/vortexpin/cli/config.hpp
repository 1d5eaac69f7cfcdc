#pragma once

// Flat sectioned key-value files:
//
//   # comment
//   [section]
//   key = value
//
// Keys are addressed as "section.key". Lists separate numbers with commas and
// tuples with semicolons ("1, 0, 0; 2, 0, 0"). Every key must be consumed by
// the scenario reader; leftovers are reported as unknown.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vortexpin/core.hpp"

namespace vortexpin::cli {

struct ConfigEntry {
  std::string value;
  std::string origin;  // "file:line" or "flag"
};

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= s.size(); ++k)
    if (k == s.size() || s[k] == sep) {
      out.push_back(trim(s.substr(start, k - start)));
      start = k + 1;
    }
  return out;
}

class Config {
 public:
  static Config parse(const std::string& text, const std::string& source) {
    Config c;
    std::string section;
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      std::string line = text.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      const std::string where = source + ":" + std::to_string(line_no);
      if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw validation_error(where + ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw validation_error(where + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw validation_error(where + ": expected 'key = value'");
      if (section.empty()) throw validation_error(where + ": key outside any [section]");
      const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      if (key.empty()) throw validation_error(where + ": empty key");
      const std::string full = section + "." + key;
      if (c.entries_.count(full)) throw validation_error(where + ": duplicate key '" + full + "'");
      c.entries_[full] = {value, where};
    }
    return c;
  }

  // Flag overrides replace file values.
  void set(const std::string& key, const std::string& value, const std::string& origin = "flag") {
    if (key.find('.') == std::string::npos) throw validation_error("override '" + key + "' must be section.key");
    entries_[key] = {value, origin};
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string str(const std::string& key) const { return entry(key).value; }
  std::string str(const std::string& key, const std::string& def) const { return has(key) ? str(key) : def; }

  double num(const std::string& key) const { return to_num(key, entry(key).value); }
  double num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

  long integer(const std::string& key) const {
    const double v = num(key);
    if (v != std::floor(v) || std::fabs(v) > 1e15) throw bad(key, "expected an integer");
    return long(v);
  }
  long integer(const std::string& key, long def) const { return has(key) ? integer(key) : def; }

  std::size_t count(const std::string& key, std::size_t def, std::size_t min = 0) const {
    const long v = integer(key, long(def));
    if (v < long(min)) throw bad(key, "must be at least " + std::to_string(min));
    return std::size_t(v);
  }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const std::string v = str(key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw bad(key, "expected true or false");
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : split(entry(key).value, ',')) out.push_back(to_num(key, s));
    return out;
  }

  std::vector<std::vector<double>> tuples(const std::string& key) const {
    std::vector<std::vector<double>> out;
    for (const auto& t : split(entry(key).value, ';')) {
      std::vector<double> v;
      for (const auto& s : split(t, ',')) v.push_back(to_num(key, s));
      out.push_back(v);
    }
    return out;
  }

  template <std::size_t N>
  std::array<double, N> fixed(const std::string& key) const {
    const auto v = list(key);
    if (v.size() != N) throw bad(key, "expected " + std::to_string(N) + " comma-separated numbers");
    std::array<double, N> a{};
    std::copy(v.begin(), v.end(), a.begin());
    return a;
  }

  std::string origin(const std::string& key) const { return entry(key).origin; }

  // Marks a key as accepted without reading it.
  void touch(const std::string& key) const {
    if (has(key)) used_.insert(key);
  }

  // Keys never read, in sorted order.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, e] : entries_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  void require_all_used() const {
    const auto u = unused();
    if (u.empty()) return;
    std::string msg = "unknown key '" + u.front() + "' (" + entries_.at(u.front()).origin + ")";
    if (u.size() > 1) msg += " and " + std::to_string(u.size() - 1) + " more";
    throw validation_error(msg);
  }

 private:
  const ConfigEntry& entry(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw validation_error("missing key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  Error bad(const std::string& key, const std::string& why) const {
    const auto it = entries_.find(key);
    const std::string where = it == entries_.end() ? "" : " (" + it->second.origin + ")";
    return validation_error("key '" + key + "'" + where + ": " + why);
  }

  double to_num(const std::string& key, const std::string& s) const {
    if (s.empty()) throw bad(key, "empty number");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) throw bad(key, "not a finite number: '" + s + "'");
    return v;
  }

  std::map<std::string, ConfigEntry> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace vortexpin::cli
