#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rsvgd/errors.hpp"
#include "rsvgd/report.hpp"
#include "rsvgd/target.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> commands{"blr-bench", "sphere-demo", "product-demo", "gaussian-sanity"};
  return commands;
}

/// Fully resolved settings of one benchmark run. Optional fields are filled in
/// by resolve() with command-specific defaults.
struct RunConfig {
  std::string command;
  std::string method = "rsvgd";  ///< svgd | rsvgd
  std::size_t particles = 100;
  std::size_t iters = 500;
  std::uint64_t seed = 1;
  std::optional<double> step;
  std::string kernel = "median";  ///< median | fixed:H | summed
  bool freeze_bandwidth = false;
  std::optional<double> kappa;
  std::string data;  ///< empty selects the synthetic generator
  double split = 0.8;
  bool standardize = false;
  std::size_t cadence = 10;
  std::string out;
  std::size_t threads = 1;
  bool timing = false;

  double alpha = 0.01;
  std::string inversion = "direct";  ///< direct | sherman_morrison
  double momentum = 0.9;
  double fuzz = 1e-6;

  std::optional<std::size_t> dim;  ///< Euclidean dimension or sphere ambient dimension n
  std::size_t blocks = 2;
  std::vector<std::string> components;  ///< "<mu csv>;<kappa>;<weight>"

  std::size_t synthetic_rows = 200;
  std::size_t synthetic_features = 5;
  bool synthetic_separable = true;

  double init_mean = 2.0;
  double init_std = 0.5;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw precondition_error("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw precondition_error("config: '" + key + "' expects a nonnegative integer, got '" + v + "'");
  }
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v.empty() || v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw precondition_error("config: '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

inline std::string optional_text(const std::optional<double>& v) { return v ? format_number(*v) : "default"; }

}  // namespace detail

/// Applies one `key=value` setting. Keys use the long flag names.
inline void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = detail::trim(raw_key);
  const std::string v = detail::trim(raw_value);
  if (key == "command") {
    c.command = v;
  } else if (key == "method") {
    c.method = v;
  } else if (key == "particles") {
    c.particles = detail::to_integer<std::size_t>(key, v);
  } else if (key == "iters") {
    c.iters = detail::to_integer<std::size_t>(key, v);
  } else if (key == "seed") {
    c.seed = detail::to_integer<std::uint64_t>(key, v);
  } else if (key == "step") {
    c.step = detail::to_double(key, v);
  } else if (key == "kernel") {
    c.kernel = v;
  } else if (key == "freeze-bandwidth") {
    c.freeze_bandwidth = detail::to_bool(key, v);
  } else if (key == "kappa") {
    c.kappa = detail::to_double(key, v);
  } else if (key == "data") {
    c.data = v;
  } else if (key == "split") {
    c.split = detail::to_double(key, v);
  } else if (key == "standardize") {
    c.standardize = detail::to_bool(key, v);
  } else if (key == "cadence") {
    c.cadence = detail::to_integer<std::size_t>(key, v);
  } else if (key == "out") {
    c.out = v;
  } else if (key == "threads") {
    c.threads = detail::to_integer<std::size_t>(key, v);
  } else if (key == "timing") {
    c.timing = detail::to_bool(key, v);
  } else if (key == "alpha") {
    c.alpha = detail::to_double(key, v);
  } else if (key == "inversion") {
    c.inversion = v;
  } else if (key == "momentum") {
    c.momentum = detail::to_double(key, v);
  } else if (key == "fuzz") {
    c.fuzz = detail::to_double(key, v);
  } else if (key == "dim") {
    c.dim = detail::to_integer<std::size_t>(key, v);
  } else if (key == "blocks") {
    c.blocks = detail::to_integer<std::size_t>(key, v);
  } else if (key == "component") {
    c.components.push_back(v);
  } else if (key == "synthetic-rows") {
    c.synthetic_rows = detail::to_integer<std::size_t>(key, v);
  } else if (key == "synthetic-features") {
    c.synthetic_features = detail::to_integer<std::size_t>(key, v);
  } else if (key == "synthetic-separable") {
    c.synthetic_separable = detail::to_bool(key, v);
  } else if (key == "init-mean") {
    c.init_mean = detail::to_double(key, v);
  } else if (key == "init-std") {
    c.init_std = detail::to_double(key, v);
  } else {
    throw precondition_error("config: unknown key '" + key + "'");
  }
}

/// Reads `key = value` lines; `#` starts a comment, blank lines are ignored.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) throw format_error(number, "expected key=value");
    entries.emplace_back(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  return entries;
}

inline void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("cannot open config '" + path + "'");
  for (const auto& [k, v] : parse_config_text(in)) apply_setting(c, k, v);
}

/// Parses "<mu csv>;<kappa>;<weight>". The mean is normalized to unit length.
inline VmfComponent parse_component(const std::string& text) {
  const auto parts = detail::split_on(text, ';');
  if (parts.size() != 3) throw precondition_error("component: expected '<mu csv>;<kappa>;<weight>'");
  const auto coords = detail::split_on(parts[0], ',');
  Vector mu(static_cast<Eigen::Index>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) mu(static_cast<Eigen::Index>(i)) = detail::to_double("component", coords[i]);
  const double norm = mu.norm();
  if (!(norm > 0.0)) throw precondition_error("component: mean direction must be nonzero");
  return {mu / norm, detail::to_double("component", parts[1]), detail::to_double("component", parts[2])};
}

/// Fills command-specific defaults and validates the configuration.
inline RunConfig resolve(RunConfig c) {
  if (std::find(known_commands().begin(), known_commands().end(), c.command) == known_commands().end()) {
    throw precondition_error("config: unknown command '" + c.command + "'");
  }
  if (c.method != "svgd" && c.method != "rsvgd") throw precondition_error("config: method must be svgd or rsvgd");
  const bool spherical = c.command == "sphere-demo" || c.command == "product-demo";
  if (spherical && c.method != "rsvgd") throw precondition_error("config: " + c.command + " supports only rsvgd");
  if (c.particles < 1) throw precondition_error("config: particles must be >= 1");
  if (c.cadence < 1) throw precondition_error("config: cadence must be >= 1");
  if (!(c.split > 0.0 && c.split < 1.0)) throw precondition_error("config: split must lie in (0, 1)");
  if (!(c.alpha > 0.0)) throw precondition_error("config: alpha must be positive");
  if (c.inversion != "direct" && c.inversion != "sherman_morrison") {
    throw precondition_error("config: inversion must be direct or sherman_morrison");
  }
  if (c.kernel != "median" && c.kernel != "summed") {
    if (c.kernel.rfind("fixed:", 0) != 0) throw precondition_error("config: kernel must be median, fixed:H or summed");
    if (!(detail::to_double("kernel", c.kernel.substr(6)) > 0.0)) {
      throw precondition_error("config: fixed bandwidth must be positive");
    }
  }
  if (!(c.init_std > 0.0)) throw precondition_error("config: init-std must be positive");
  if (c.threads < 1) c.threads = 1;

  if (!c.step) {
    c.step = c.command == "sphere-demo" ? 3e-3 : c.command == "product-demo" ? 1e-4 : 0.05;
  }
  if (!(*c.step > 0.0)) throw precondition_error("config: step must be positive");
  if (!c.dim) c.dim = spherical ? 3 : 2;
  if (spherical && *c.dim < 2) throw precondition_error("config: sphere ambient dimension must be >= 2");
  if (!spherical && *c.dim < 1) throw precondition_error("config: dimension must be >= 1");
  if (spherical) {
    if (c.blocks < 1) throw precondition_error("config: blocks must be >= 1");
    if (!c.kappa) c.kappa = static_cast<double>(*c.dim);
    if (!(*c.kappa > 0.0)) throw precondition_error("config: kappa must be positive");
    if (c.components.empty()) {
      std::string mu;
      for (std::size_t i = 0; i < *c.dim; ++i) mu += (i ? "," : "") + std::string(i + 1 == *c.dim ? "1" : "0");
      c.components.push_back(mu + ";10;1");
    }
    for (const auto& text : c.components) {
      if (static_cast<std::size_t>(parse_component(text).mean.size()) != *c.dim) {
        throw dimension_error("config: component dimension differs from dim");
      }
    }
  }
  if (c.command == "blr-bench" && c.data.empty() && (c.synthetic_rows < 2 || c.synthetic_features < 1)) {
    throw precondition_error("config: synthetic data needs rows >= 2 and features >= 1");
  }
  return c;
}

/// Header entries that fully determine a report. Thread count, timing-free
/// execution details and file locations are excluded so reports compare equal
/// across them.
inline std::vector<std::pair<std::string, std::string>> header_entries(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> h;
  h.emplace_back("version", kVersion);
  h.emplace_back("command", c.command);
  h.emplace_back("method", c.method);
  h.emplace_back("seed", std::to_string(c.seed));
  h.emplace_back("particles", std::to_string(c.particles));
  h.emplace_back("iters", std::to_string(c.iters));
  h.emplace_back("cadence", std::to_string(c.cadence));
  h.emplace_back("step", detail::optional_text(c.step));
  h.emplace_back("timing", c.timing ? "true" : "false");
  const bool spherical = c.command == "sphere-demo" || c.command == "product-demo";
  if (spherical) {
    h.emplace_back("dim", std::to_string(c.dim.value_or(0)));
    if (c.command == "product-demo") h.emplace_back("blocks", std::to_string(c.blocks));
    h.emplace_back("kappa", detail::optional_text(c.kappa));
    for (std::size_t i = 0; i < c.components.size(); ++i) h.emplace_back("component_" + std::to_string(i), c.components[i]);
  } else {
    h.emplace_back("kernel", c.kernel);
    h.emplace_back("freeze-bandwidth", c.freeze_bandwidth ? "true" : "false");
    if (c.method == "svgd") {
      h.emplace_back("optimizer", "adagrad_momentum");
      h.emplace_back("momentum", format_number(c.momentum));
      h.emplace_back("fuzz", format_number(c.fuzz));
    } else {
      h.emplace_back("optimizer", "vanilla");
    }
  }
  if (c.command == "blr-bench") {
    h.emplace_back("alpha", format_number(c.alpha));
    h.emplace_back("inversion", c.inversion);
    h.emplace_back("split", format_number(c.split));
    h.emplace_back("standardize", c.standardize ? "true" : "false");
    if (c.data.empty()) {
      h.emplace_back("data", "synthetic");
      h.emplace_back("synthetic-rows", std::to_string(c.synthetic_rows));
      h.emplace_back("synthetic-features", std::to_string(c.synthetic_features));
      h.emplace_back("synthetic-separable", c.synthetic_separable ? "true" : "false");
    } else {
      h.emplace_back("data", c.data);
    }
    h.emplace_back("init", "prior");
  } else if (c.command == "gaussian-sanity") {
    h.emplace_back("dim", std::to_string(c.dim.value_or(0)));
    h.emplace_back("init-mean", format_number(c.init_mean));
    h.emplace_back("init-std", format_number(c.init_std));
  } else {
    h.emplace_back("init", "uniform");
  }
  h.emplace_back("defaults", "step sizes, bandwidth multipliers, kappa and initializations are artifact choices");
  return h;
}

}  // namespace rsvgd
