#pragma once

// JSON run configuration. All frequencies in rad/s, times in s.
//
//   {
//     "grid":   {"omega_min": 1000, "omega_max": 1256, "n_points": 256},
//     "epr":    {"omega1_center": 1128.5, "omega2_center": 1128.5,
//                "mu": [-0.9, -0.99], "sigma": [1.5, 2.5]},      // cartesian product
//           or  {"omega1_center": ..., "omega2_center": ...,
//                "schedule": [{"mu": -0.9, "sigma": 1.5}, ...]}  // explicit pairs
//     "input":  {"center": 1128.5, "width": 1.5, "t0": 0},
//     "window": {"T": 1.0, "W": 8.0},
//     "outcomes": {"time_fraction": 1.0},                          // optional
//     "mirror_convention": "omega0_minus_2_omega_minus",           // optional
//     "tolerances": {"completeness": 1e-9, ...},                   // optional
//     "simulate": {"t": 0.0, "omega_minus": 0.0}                   // optional
//   }

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

#include "eprtele/sweep.hpp"
#include "eprtele/teleport.hpp"

namespace eprtele {

/// Invalid or unreadable configuration; the message names the line or field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  SweepConfig sweep;
  std::optional<std::pair<double, double>> simulate_outcome;  // (t, Omega_-)
  nlohmann::json echo;                                         // config as read, after overrides
};

struct ConfigOverrides {
  std::optional<double> mu;
  std::optional<double> sigma;
  std::optional<int> n_points;
};

namespace detail {

inline constexpr int kMaxGridPoints = 4096;

[[noreturn]] inline void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

inline void reject_unknown(const nlohmann::json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!names.contains(key)) field_error(where.empty() ? key : where + "." + key, "unknown key");
  }
}

inline const nlohmann::json& require_object(const nlohmann::json& parent, const std::string& key,
                                            const std::string& path) {
  if (!parent.contains(key)) field_error(path, "missing");
  const auto& v = parent.at(key);
  if (!v.is_object()) field_error(path, "expected an object");
  return v;
}

inline double require_number(const nlohmann::json& parent, const std::string& key,
                             const std::string& path) {
  if (!parent.contains(key)) field_error(path, "missing");
  const auto& v = parent.at(key);
  if (!v.is_number()) field_error(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) field_error(path, "must be finite");
  return x;
}

inline double optional_number(const nlohmann::json& parent, const std::string& key,
                              const std::string& path, double fallback) {
  return parent.contains(key) ? require_number(parent, key, path) : fallback;
}

inline std::vector<double> number_list(const nlohmann::json& parent, const std::string& key,
                                       const std::string& path) {
  if (!parent.contains(key)) field_error(path, "missing");
  const auto& v = parent.at(key);
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
  } else if (v.is_array() && !v.empty()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) field_error(path + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
  } else {
    field_error(path, "expected a number or a non-empty array of numbers");
  }
  return out;
}

inline std::pair<int, int> line_and_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Parses and fully validates a configuration document.
inline RunConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": malformed JSON (" + e.what() + ")");
  }
  if (!doc.is_object()) throw ConfigError("line 1: top level must be a JSON object");
  detail::reject_unknown(doc, "",
                         {"grid", "epr", "input", "window", "outcomes", "mirror_convention", "tolerances",
                          "simulate", "description"});

  RunConfig rc;
  SweepConfig& cfg = rc.sweep;

  const auto& grid = detail::require_object(doc, "grid", "grid");
  detail::reject_unknown(grid, "grid", {"omega_min", "omega_max", "n_points"});
  cfg.grid.omega_min = detail::require_number(grid, "omega_min", "grid.omega_min");
  cfg.grid.omega_max = detail::require_number(grid, "omega_max", "grid.omega_max");
  if (!grid.contains("n_points") || !grid.at("n_points").is_number_integer()) {
    detail::field_error("grid.n_points", "expected an integer");
  }
  cfg.grid.n_points = grid.at("n_points").get<int>();
  if (overrides.n_points) cfg.grid.n_points = *overrides.n_points;
  if (cfg.grid.omega_min < 0.0) detail::field_error("grid.omega_min", "must be >= 0 (frequencies are positive)");
  if (!(cfg.grid.omega_max > cfg.grid.omega_min)) detail::field_error("grid.omega_max", "must exceed omega_min");
  if (cfg.grid.n_points < 2 || cfg.grid.n_points > detail::kMaxGridPoints) {
    detail::field_error("grid.n_points", "must lie in [2, 4096]");
  }

  const auto& epr = detail::require_object(doc, "epr", "epr");
  detail::reject_unknown(epr, "epr", {"omega1_center", "omega2_center", "mu", "sigma", "schedule"});
  cfg.omega1_center = detail::require_number(epr, "omega1_center", "epr.omega1_center");
  cfg.omega2_center = detail::require_number(epr, "omega2_center", "epr.omega2_center");
  if (!(cfg.omega1_center > 0.0)) detail::field_error("epr.omega1_center", "must be positive");
  if (!(cfg.omega2_center > 0.0)) detail::field_error("epr.omega2_center", "must be positive");
  if (epr.contains("schedule")) {
    if (epr.contains("mu") || epr.contains("sigma")) {
      detail::field_error("epr.schedule", "give either schedule or mu/sigma lists, not both");
    }
    const auto& sched = epr.at("schedule");
    if (!sched.is_array() || sched.empty()) detail::field_error("epr.schedule", "expected a non-empty array");
    for (std::size_t i = 0; i < sched.size(); ++i) {
      const std::string path = "epr.schedule[" + std::to_string(i) + "]";
      if (!sched[i].is_object()) detail::field_error(path, "expected an object");
      detail::reject_unknown(sched[i], path, {"mu", "sigma"});
      cfg.points.push_back(SchedulePoint{detail::require_number(sched[i], "mu", path + ".mu"),
                                         detail::require_number(sched[i], "sigma", path + ".sigma")});
    }
  } else {
    const auto mus = detail::number_list(epr, "mu", "epr.mu");
    const auto sigmas = detail::number_list(epr, "sigma", "epr.sigma");
    for (double mu : mus) {
      for (double sigma : sigmas) cfg.points.push_back(SchedulePoint{mu, sigma});
    }
  }
  if (overrides.mu || overrides.sigma) {
    std::vector<SchedulePoint> replaced;
    for (SchedulePoint p : cfg.points) {
      if (overrides.mu) p.mu = *overrides.mu;
      if (overrides.sigma) p.sigma = *overrides.sigma;
      const bool seen = std::any_of(replaced.begin(), replaced.end(), [&](const SchedulePoint& q) {
        return q.mu == p.mu && q.sigma == p.sigma;
      });
      if (!seen) replaced.push_back(p);
    }
    cfg.points = std::move(replaced);
  }
  for (std::size_t i = 0; i < cfg.points.size(); ++i) {
    const std::string path = "epr point " + std::to_string(i);
    if (!(std::abs(cfg.points[i].mu) < 1.0)) detail::field_error(path + " mu", "|mu| must be < 1");
    if (!(cfg.points[i].sigma > 0.0)) detail::field_error(path + " sigma", "must be positive");
  }

  const auto& input = detail::require_object(doc, "input", "input");
  detail::reject_unknown(input, "input", {"center", "width", "t0"});
  cfg.input.center = detail::require_number(input, "center", "input.center");
  cfg.input.width = detail::require_number(input, "width", "input.width");
  cfg.input.t0 = detail::optional_number(input, "t0", "input.t0", 0.0);
  if (!(cfg.input.width > 0.0)) detail::field_error("input.width", "must be positive");
  if (!(cfg.input.center > 0.0)) detail::field_error("input.center", "must be positive");

  const auto& window = detail::require_object(doc, "window", "window");
  detail::reject_unknown(window, "window", {"T", "W"});
  cfg.window.T = detail::require_number(window, "T", "window.T");
  cfg.window.W = detail::require_number(window, "W", "window.W");
  if (!(cfg.window.T > 0.0)) detail::field_error("window.T", "must be positive");
  if (!(cfg.window.W > 0.0)) detail::field_error("window.W", "must be positive");

  if (doc.contains("outcomes")) {
    const auto& oc = detail::require_object(doc, "outcomes", "outcomes");
    detail::reject_unknown(oc, "outcomes", {"time_fraction"});
    cfg.time_fraction = detail::optional_number(oc, "time_fraction", "outcomes.time_fraction", 1.0);
    if (!(cfg.time_fraction > 0.0 && cfg.time_fraction <= 1.0)) {
      detail::field_error("outcomes.time_fraction", "must lie in (0, 1]");
    }
  }

  if (doc.contains("mirror_convention")) {
    const auto& mc = doc.at("mirror_convention");
    const auto parsed = mc.is_string() ? parse_mirror_convention(mc.get<std::string>()) : std::nullopt;
    if (!parsed) {
      detail::field_error("mirror_convention",
                          "expected \"omega0_minus_omega_minus\" or \"omega0_minus_2_omega_minus\"");
    }
    cfg.mirror = *parsed;
  }

  if (doc.contains("tolerances")) {
    const auto& t = detail::require_object(doc, "tolerances", "tolerances");
    detail::reject_unknown(t, "tolerances",
                           {"completeness", "tail_mass", "normalization", "parseval", "variance_relative",
                            "null_channel", "no_signaling"});
    Tolerances& tol = cfg.tolerances;
    tol.completeness = detail::optional_number(t, "completeness", "tolerances.completeness", tol.completeness);
    tol.tail_mass = detail::optional_number(t, "tail_mass", "tolerances.tail_mass", tol.tail_mass);
    tol.normalization = detail::optional_number(t, "normalization", "tolerances.normalization", tol.normalization);
    tol.parseval = detail::optional_number(t, "parseval", "tolerances.parseval", tol.parseval);
    tol.variance_relative =
        detail::optional_number(t, "variance_relative", "tolerances.variance_relative", tol.variance_relative);
    tol.null_channel = detail::optional_number(t, "null_channel", "tolerances.null_channel", tol.null_channel);
    tol.no_signaling = detail::optional_number(t, "no_signaling", "tolerances.no_signaling", tol.no_signaling);
    for (const auto& [key, value] : t.items()) {
      if (!(value.get<double>() > 0.0)) detail::field_error("tolerances." + key, "must be positive");
    }
  }

  if (doc.contains("simulate")) {
    const auto& s = detail::require_object(doc, "simulate", "simulate");
    detail::reject_unknown(s, "simulate", {"t", "omega_minus"});
    rc.simulate_outcome = std::make_pair(detail::require_number(s, "t", "simulate.t"),
                                         detail::require_number(s, "omega_minus", "simulate.omega_minus"));
  }

  rc.echo = doc;
  rc.echo["grid"]["n_points"] = cfg.grid.n_points;
  if (overrides.mu || overrides.sigma) {
    nlohmann::json sched = nlohmann::json::array();
    for (const auto& p : cfg.points) sched.push_back({{"mu", p.mu}, {"sigma", p.sigma}});
    rc.echo["epr"].erase("mu");
    rc.echo["epr"].erase("sigma");
    rc.echo["epr"]["schedule"] = sched;
  }
  return rc;
}

inline RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

}  // namespace eprtele
