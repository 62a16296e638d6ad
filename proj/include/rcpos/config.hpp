#pragma once

// Run configuration: JSON in, strict validation, canonical JSON out. The
// canonical form drops output paths, so a report's config echo re-runs to the
// same report body regardless of where the first run wrote its files.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcpos/directimage.hpp"
#include "rcpos/positivity.hpp"

namespace rcpos {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string example = "split";
  std::map<std::string, double> params;  // catalog parameter overrides
  int k = 0;                             // twist degree / positive-count, per command
  bool skeOnly = false;                  // direct-image: drop the determinant factor
  std::vector<std::vector<Cx>> points;   // explicit base points; empty = seeded
  int pointCount = 3;                    // seeded sample count when points is empty
  std::uint64_t seed = 0;
  double tol = 1e-9;   // pass/fail threshold for identity checks
  int trials = 100;    // random-data trials for identities and fibration-check
  SearchOptions search{};
  GramOptions quad{};
  double h0 = 1e-3;  // finite-difference step for direct-image curvature
  std::string out;   // report path; empty = stdout only
  std::string csv;   // margin table path; empty = none
};

inline const std::vector<std::string>& knownCommands() {
  static const std::vector<std::string> cmds = {"classify", "fibration-check", "identities",
                                                "direct-image", "examples"};
  return cmds;
}

inline void validateConfig(const RunConfig& c) {
  const auto& cmds = knownCommands();
  if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end())
    throw ConfigError("unknown command '" + c.command + "'");
  if (c.k < 0) throw ConfigError("k must be nonnegative");
  if (!(c.tol > 0.0)) throw ConfigError("tol must be positive");
  if (!(c.h0 > 0.0)) throw ConfigError("h0 must be positive");
  if (c.trials < 1) throw ConfigError("trials must be at least 1");
  if (c.pointCount < 1) throw ConfigError("point_count must be at least 1");
  if (c.search.gridPoints < 2) throw ConfigError("search.grid_points must be at least 2");
  if (c.search.nmMaxIter < 0) throw ConfigError("search.nm_max_iter must be nonnegative");
  if (!(c.search.nmShrinkTol > 0.0)) throw ConfigError("search.nm_shrink_tol must be positive");
  if (c.search.fiberSamples < 1) throw ConfigError("search.fiber_samples must be at least 1");
  if (c.quad.radialNodes < 8 || c.quad.angularNodes < 8)
    throw ConfigError("quad needs at least 8 nodes per direction");
  if (!(c.quad.glueRadius > 0.0)) throw ConfigError("quad.glue_radius must be positive");
  if (!c.points.empty()) {
    std::size_t d = c.points.front().size();
    for (const auto& p : c.points)
      if (p.size() != d) throw ConfigError("explicit points must share one dimension");
  }
}

/// Canonical JSON form: every semantic field, no output paths.
inline nlohmann::json configJson(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["example"] = c.example;
  j["params"] = c.params;
  j["k"] = c.k;
  j["ske_only"] = c.skeOnly;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points) {
    nlohmann::json q = nlohmann::json::array();
    for (const auto& z : p) q.push_back(nlohmann::json::array({z.real(), z.imag()}));
    pts.push_back(std::move(q));
  }
  j["points"] = std::move(pts);
  j["point_count"] = c.pointCount;
  j["seed"] = c.seed;
  j["tol"] = c.tol;
  j["trials"] = c.trials;
  j["search"] = {{"grid_points", c.search.gridPoints},
                 {"nm_max_iter", c.search.nmMaxIter},
                 {"nm_shrink_tol", c.search.nmShrinkTol},
                 {"fiber_samples", c.search.fiberSamples}};
  j["quad"] = {{"radial_nodes", c.quad.radialNodes},
               {"angular_nodes", c.quad.angularNodes},
               {"glue_radius", c.quad.glueRadius}};
  j["h0"] = c.h0;
  return j;
}

namespace detail {

inline void rejectUnknownKeys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                              const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T fetch(const nlohmann::json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key '" + key + "' has the wrong type");
  }
}

}  // namespace detail

inline RunConfig configFromJson(const nlohmann::json& j) {
  detail::rejectUnknownKeys(
      j,
      {"command", "example", "params", "k", "ske_only", "points", "point_count", "seed", "tol",
       "trials", "search", "quad", "h0", "out", "csv"},
      "config");
  RunConfig c;
  c.command = detail::fetch<std::string>(j, "command", c.command);
  c.example = detail::fetch<std::string>(j, "example", c.example);
  c.params = detail::fetch<std::map<std::string, double>>(j, "params", c.params);
  c.k = detail::fetch<int>(j, "k", c.k);
  c.skeOnly = detail::fetch<bool>(j, "ske_only", c.skeOnly);
  if (j.contains("points")) {
    const auto& pts = j.at("points");
    if (!pts.is_array()) throw ConfigError("points must be an array of points");
    for (const auto& p : pts) {
      if (!p.is_array()) throw ConfigError("each point is an array of [re, im] pairs");
      std::vector<Cx> q;
      for (const auto& z : p) {
        if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
          throw ConfigError("each coordinate is an [re, im] pair of numbers");
        q.emplace_back(z[0].get<double>(), z[1].get<double>());
      }
      c.points.push_back(std::move(q));
    }
  }
  c.pointCount = detail::fetch<int>(j, "point_count", c.pointCount);
  c.seed = detail::fetch<std::uint64_t>(j, "seed", c.seed);
  c.tol = detail::fetch<double>(j, "tol", c.tol);
  c.trials = detail::fetch<int>(j, "trials", c.trials);
  if (j.contains("search")) {
    const auto& s = j.at("search");
    detail::rejectUnknownKeys(s, {"grid_points", "nm_max_iter", "nm_shrink_tol", "fiber_samples"},
                              "search");
    c.search.gridPoints = detail::fetch<int>(s, "grid_points", c.search.gridPoints);
    c.search.nmMaxIter = detail::fetch<int>(s, "nm_max_iter", c.search.nmMaxIter);
    c.search.nmShrinkTol = detail::fetch<double>(s, "nm_shrink_tol", c.search.nmShrinkTol);
    c.search.fiberSamples = detail::fetch<int>(s, "fiber_samples", c.search.fiberSamples);
  }
  if (j.contains("quad")) {
    const auto& q = j.at("quad");
    detail::rejectUnknownKeys(q, {"radial_nodes", "angular_nodes", "glue_radius"}, "quad");
    c.quad.radialNodes = detail::fetch<int>(q, "radial_nodes", c.quad.radialNodes);
    c.quad.angularNodes = detail::fetch<int>(q, "angular_nodes", c.quad.angularNodes);
    c.quad.glueRadius = detail::fetch<double>(q, "glue_radius", c.quad.glueRadius);
  }
  c.h0 = detail::fetch<double>(j, "h0", c.h0);
  c.out = detail::fetch<std::string>(j, "out", c.out);
  c.csv = detail::fetch<std::string>(j, "csv", c.csv);
  return c;
}

inline RunConfig loadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return configFromJson(j);
}

}  // namespace rcpos
