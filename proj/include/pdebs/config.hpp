#pragma once

// Strict, versioned JSON scenario configs. Unknown keys are rejected by their
// full path so a typo never silently falls back to a default.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pdebs/errors.hpp"
#include "pdebs/experiments.hpp"

namespace pdebs::config {

using nlohmann::json;

namespace detail {

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  return j;
}

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(join(path, it.key()) + ": unknown key");
  }
}

inline std::optional<double> number(const json& j, const std::string& path, const char* key, bool required) {
  const auto p = join(path, key);
  if (!j.contains(key)) {
    if (required) throw ConfigError(p + ": missing required key");
    return std::nullopt;
  }
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(p + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(p + ": must be finite");
  return d;
}

inline std::optional<long long> integer(const json& j, const std::string& path, const char* key, bool required) {
  const auto p = join(path, key);
  if (!j.contains(key)) {
    if (required) throw ConfigError(p + ": missing required key");
    return std::nullopt;
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(p + ": expected an integer");
  return v.get<long long>();
}

inline std::optional<std::string> string(const json& j, const std::string& path, const char* key, bool required) {
  const auto p = join(path, key);
  if (!j.contains(key)) {
    if (required) throw ConfigError(p + ": missing required key");
    return std::nullopt;
  }
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(p + ": expected a string");
  return v.get<std::string>();
}

inline std::optional<bool> boolean(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key) + ": expected true or false");
  return v.get<bool>();
}

inline int to_int(long long v, const std::string& path) {
  if (v < -1000000000LL || v > 1000000000LL) throw ConfigError(path + ": out of range");
  return static_cast<int>(v);
}

// Re-throws library validation failures against the owning key.
template <class F>
auto at_key(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace detail

/// Parses a scenario document. `name` labels outputs (usually the file stem).
inline experiments::Scenario parse_scenario(const json& root, const std::string& name = "scenario") {
  using namespace detail;
  using experiments::Geometry;
  require_object(root, "<root>");
  check_keys(root, "", {"v", "plant", "geometry", "grid", "law", "time", "init", "output"});
  const auto v = integer(root, "", "v", true);
  if (*v != 1) throw ConfigError("v: unsupported schema version " + std::to_string(*v) + " (expected 1)");

  experiments::Scenario s;
  s.name = name;

  if (!root.contains("plant")) throw ConfigError("plant: missing required key");
  const auto& pl = require_object(root.at("plant"), "plant");
  check_keys(pl, "plant", {"epsilon", "lambda", "c"});
  s.plant.epsilon = *number(pl, "plant", "epsilon", true);
  s.plant.lambda = *number(pl, "plant", "lambda", true);
  s.plant.c = *number(pl, "plant", "c", true);
  at_key("plant", [&] { s.plant.validate(); return 0; });

  if (!root.contains("geometry")) throw ConfigError("geometry: missing required key");
  const auto& ge = require_object(root.at("geometry"), "geometry");
  s.geometry = at_key("geometry.kind", [&] { return experiments::geometry_from_string(*string(ge, "geometry", "kind", true)); });
  switch (s.geometry) {
    case Geometry::square: check_keys(ge, "geometry", {"kind"}); break;
    case Geometry::strip:
      check_keys(ge, "geometry", {"kind", "k_max"});
      s.k_max = number(ge, "geometry", "k_max", false).value_or(s.k_max);
      break;
    case Geometry::sector:
      check_keys(ge, "geometry", {"kind", "theta1", "theta2", "R"});
      s.theta1 = number(ge, "geometry", "theta1", false).value_or(s.theta1);
      s.theta2 = number(ge, "geometry", "theta2", false).value_or(s.theta2);
      s.R = number(ge, "geometry", "R", false).value_or(s.R);
      break;
    case Geometry::piano:
      check_keys(ge, "geometry", {"kind", "L"});
      s.L = number(ge, "geometry", "L", false).value_or(s.L);
      break;
  }
  s.law = s.geometry == Geometry::strip    ? experiments::LawKind::strip_truncated
          : s.geometry == Geometry::sector ? experiments::LawKind::sector_modal
          : s.geometry == Geometry::piano  ? experiments::LawKind::piano_extended
                                           : experiments::LawKind::square_full;

  if (root.contains("grid")) {
    const auto& gr = require_object(root.at("grid"), "grid");
    switch (s.geometry) {
      case Geometry::square: check_keys(gr, "grid", {"nx", "ny"}); break;
      case Geometry::piano: check_keys(gr, "grid", {"nx"}); break;
      case Geometry::strip: check_keys(gr, "grid", {"ny", "k_samples"}); break;
      case Geometry::sector: check_keys(gr, "grid", {"nr", "ntheta"}); break;
    }
    if (auto x = integer(gr, "grid", "nx", false)) s.nx = to_int(*x, "grid.nx");
    if (auto x = integer(gr, "grid", "ny", false)) s.ny = to_int(*x, "grid.ny");
    if (auto x = integer(gr, "grid", "nr", false)) s.nr = to_int(*x, "grid.nr");
    if (auto x = integer(gr, "grid", "ntheta", false)) s.ntheta = to_int(*x, "grid.ntheta");
    if (auto x = integer(gr, "grid", "k_samples", false)) s.k_samples = to_int(*x, "grid.k_samples");
  }

  if (root.contains("law")) {
    const auto& lw = require_object(root.at("law"), "law");
    check_keys(lw, "law", {"kind", "N", "actuators", "open_loop_compare", "fit_norm", "replay_check"});
    if (auto k = string(lw, "law", "kind", false))
      s.law = at_key("law.kind", [&] { return control::law_from_string(*k); });
    if (auto n = integer(lw, "law", "N", false)) {
      if (*n < 1) throw ConfigError("law.N: must be >= 1");
      s.N = to_int(*n, "law.N");
    }
    if (lw.contains("actuators")) {
      const auto& ac = require_object(lw.at("actuators"), "law.actuators");
      check_keys(ac, "law.actuators", {"kind", "m"});
      s.actuators.kind = string(ac, "law.actuators", "kind", false).value_or(s.actuators.kind);
      if (auto m = integer(ac, "law.actuators", "m", false)) s.actuators.m = to_int(*m, "law.actuators.m");
    }
    s.open_loop_compare = boolean(lw, "law", "open_loop_compare").value_or(false);
    s.replay_check = boolean(lw, "law", "replay_check").value_or(true);
    if (auto f = string(lw, "law", "fit_norm", false))
      s.fit_norm = at_key("law.fit_norm", [&] { return experiments::fit_norm_from_string(*f); });
  }

  if (root.contains("time")) {
    const auto& tm = require_object(root.at("time"), "time");
    check_keys(tm, "time", {"dt", "t_final", "record_every"});
    s.dt = number(tm, "time", "dt", false).value_or(0.0);
    s.t_final = number(tm, "time", "t_final", false).value_or(0.0);
    if (auto r = integer(tm, "time", "record_every", false)) s.record_every = to_int(*r, "time.record_every");
  }

  if (root.contains("init")) {
    const auto& in = require_object(root.at("init"), "init");
    check_keys(in, "init", {"preset", "seed"});
    if (auto p = string(in, "init", "preset", false))
      s.init = at_key("init.preset", [&] { return experiments::preset_from_string(*p); });
    if (auto sd = integer(in, "init", "seed", false)) {
      if (*sd < 0) throw ConfigError("init.seed: must be >= 0");
      s.seed = static_cast<std::uint64_t>(*sd);
    }
  }

  if (root.contains("output")) {
    const auto& out = require_object(root.at("output"), "output");
    check_keys(out, "output", {"dir"});
    s.output_dir = string(out, "output", "dir", false).value_or("");
  }
  if (const char* env = std::getenv("PDEBS_OUTPUT_DIR"); env && *env) s.output_dir = env;

  const auto r = s.resolved();
  r.validate();
  return r;
}

inline experiments::Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found or unreadable: " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_scenario(root, path.stem().string());
}

}  // namespace pdebs::config
