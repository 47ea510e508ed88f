#pragma once

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/errors.hpp"
#include "geoflow/scenarios.hpp"

namespace geoflow {

struct SettingSpec {
  std::string key;
  std::string fallback;
  std::string help;
};

/// Every configurable key with its default. Keys whose default depends on
/// the command are adjusted in `command_defaults`.
inline const std::vector<SettingSpec>& setting_specs() {
  static const std::vector<SettingSpec> specs{
      {"scenario", "sphere", "surface from the catalog"},
      {"seed", "1", "random seed"},
      {"tol", "1e-9", "integrator tolerance"},
      {"t_max", "100", "time horizon"},
      {"samples", "100", "sample count (meaning depends on the command)"},
      {"out", "", "output file; stdout when empty"},
      {"format", "json", "json or csv"},
      {"expect", "", "expected verdict; a mismatch exits with status 1"},
      {"radius", "1", "sphere radius"},
      {"semi_axes", "1,1.2,1.5", "ellipsoid semi-axes"},
      {"torus_periods", "1,1", "flat torus periods"},
      {"zoll_lambda", "0.3", "Zoll deformation parameter"},
      {"blend_lo", "0.5", "exponential plane blend start"},
      {"blend_hi", "1", "exponential plane blend end"},
      {"plane_chart", "cartesian", "cartesian or polar"},
      {"plane_bound", "40", "escape radius of the planar charts"},
      {"start", "", "initial tangent u,v,heading; random when empty"},
      {"epsilon", "0.1", "target separation"},
      {"levels", "10", "number of halvings of delta"},
      {"time_step", "0.05", "separation sampling step"},
      {"metric", "sasaki", "sasaki or d1"},
      {"pointwise", "false", "test pairs around `start` only"},
      {"anchors", "", "anchor tangents u:v:heading separated by ';'"},
      {"pairs_per_anchor", "5", "pairs per anchor and level"},
      {"s", "0", "section coordinate s of the orbit start"},
      {"theta", "0.5", "section coordinate theta of the orbit start"},
      {"grid_theta", "0", "theta levels of a grid (0: single orbit)"},
      {"horizon", "100", "maximal return time"},
      {"map", "return", "return or twist"},
      {"n_max", "10", "largest iterate"},
      {"near_tol", "1e-5", "near-return threshold"},
      {"rings", "0.02,0.98", "extra theta rings"},
      {"power", "0", "power m for the near-return check (0: skip)"},
      {"time_samples", "2001", "time samples on [-t_max, t_max]"},
      {"distal_threshold", "1e-4", "lower bound required of every infimum"},
      {"tau", "10", "almost-period window length"},
      {"t_min", "0", "start of the almost-period range"},
      {"grid_step", "0.02", "almost-period time grid"},
      {"period_min", "1", "shortest period searched"},
      {"period_max", "10", "longest period searched"},
      {"seeds", "random", "random or symmetric"},
      {"census_tol", "1e-4", "fixed-point threshold"},
      {"iterate", "1", "census of the k-th iterate"},
      {"oracle_tol", "1e-6", "largest allowed deviation from the closed form"},
  };
  return specs;
}

inline std::map<std::string, std::string> command_defaults(const std::string& command) {
  std::map<std::string, std::string> d;
  for (const auto& s : setting_specs()) d[s.key] = s.fallback;
  if (command == "integrate") {
    d["t_max"] = "10";
    d["samples"] = "201";
  } else if (command == "section") {
    d["samples"] = "10";
  } else if (command == "equicont") {
    d["samples"] = "200";
  } else if (command == "recur") {
    d["samples"] = "50";
  } else if (command == "almostperiod") {
    d["samples"] = "20";
  } else if (command == "find-geodesics") {
    d["samples"] = "6";
  } else if (command == "census") {
    d["samples"] = "200";
    d["grid_theta"] = "100";
  } else if (command == "oracle-check") {
    d["t_max"] = "50";
  }
  return d;
}

/// Resolved key/value settings of one run.
class Settings {
 public:
  explicit Settings(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  void set(const std::string& key, const std::string& value) {
    if (!values_.count(key)) throw ConfigError("config", "unknown key '" + key + "'");
    values_[key] = value;
    explicit_.insert(key);
  }

  bool is_explicit(const std::string& key) const { return explicit_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  const std::string& text(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config", "unknown key '" + key + "'");
    return it->second;
  }

  double number(const std::string& key) const { return parse_number(key, text(key)); }

  long integer(const std::string& key) const {
    const double x = number(key);
    if (x != std::floor(x) || std::abs(x) > 9e15) fail(key, "expected an integer, got '" + text(key) + "'");
    return static_cast<long>(x);
  }

  double positive(const std::string& key) const {
    const double x = number(key);
    if (!(x > 0.0)) fail(key, "must be positive, got '" + text(key) + "'");
    return x;
  }

  long count(const std::string& key, long min = 1) const {
    const long n = integer(key);
    if (n < min) fail(key, "must be at least " + std::to_string(min) + ", got '" + text(key) + "'");
    return n;
  }

  bool flag(const std::string& key) const {
    const std::string& v = text(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  std::vector<double> list(const std::string& key, std::size_t n = 0, char sep = ',') const {
    std::vector<double> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, sep)) {
      if (item.empty()) continue;
      out.push_back(parse_number(key, item));
    }
    if (n && out.size() != n) fail(key, "expected " + std::to_string(n) + " comma separated numbers");
    return out;
  }

  std::string choice(const std::string& key, const std::vector<std::string>& allowed) const {
    const std::string& v = text(key);
    for (const auto& a : allowed)
      if (v == a) return v;
    std::string opts;
    for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
    fail(key, "must be one of " + opts + ", got '" + v + "'");
  }

  ScenarioParams scenario_params() const {
    ScenarioParams p;
    p.radius = number("radius");
    const auto ax = list("semi_axes", 3);
    p.semi_axes = {ax[0], ax[1], ax[2]};
    const auto per = list("torus_periods", 2);
    p.torus_periods = {per[0], per[1]};
    p.zoll_lambda = number("zoll_lambda");
    p.blend_lo = number("blend_lo");
    p.blend_hi = number("blend_hi");
    p.plane_chart = text("plane_chart");
    p.plane_bound = number("plane_bound");
    return p;
  }

  [[noreturn]] static void fail(const std::string& key, const std::string& what) {
    throw ConfigError("config", "field '" + key + "': " + what);
  }

 private:
  static double parse_number(const std::string& key, const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (text.empty() || end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(x))
      fail(key, "expected a number, got '" + text + "'");
    return x;
  }

  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// key = value lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      throw ConfigError("config", origin + ":" + std::to_string(n) + ": expected 'key = value'");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

inline std::vector<std::pair<std::string, std::string>> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace geoflow
