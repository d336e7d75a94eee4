#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "colvar/eps_grid.hpp"
#include "colvar/grid_net.hpp"
#include "colvar/serialize.hpp"

namespace colvar::scenarios {

// One pass/fail claim. `eps` is set when the claim is made at a single eps;
// otherwise it covers the whole grid (or a tail-limit estimate).
struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "<", ">", "=="
  double threshold = 0.0;
  std::optional<double> eps;
};

inline void to_json(json& j, const Check& c) {
  j = json{{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"relation", c.relation},
           {"threshold", c.threshold}};
  j["eps"] = c.eps ? json(*c.eps) : json("all");
}

struct ScenarioResult {
  std::string name;
  json params = json::object();
  json data = json::object();
  std::vector<Check> checks;
  std::vector<Table> tables;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  Check& check(std::string what, double value, const std::string& rel, double threshold,
               std::optional<double> eps = std::nullopt) {
    bool ok = false;
    if (rel == "<=") ok = value <= threshold;
    else if (rel == "<") ok = value < threshold;
    else if (rel == ">=") ok = value >= threshold;
    else if (rel == ">") ok = value > threshold;
    else if (rel == "==") ok = value == threshold;
    else throw InvalidArgument("unknown relation " + rel);
    checks.push_back({std::move(what), ok && std::isfinite(value), value, rel, threshold, eps});
    return checks.back();
  }
  Check& flag(std::string what, bool ok) {
    checks.push_back({std::move(what), ok, ok ? 1.0 : 0.0, "==", 1.0, std::nullopt});
    return checks.back();
  }

  json to_json() const {
    json j{{"name", name}, {"pass", pass()}, {"params", params}, {"checks", checks}, {"data", data}};
    return j;
  }
};

// "eps": {"min", "max", "count"} for a geometric grid, or {"values": [...]}.
inline EpsGrid read_eps(ConfigReader& root, const EpsGrid& dflt) {
  auto sec = root.section("eps");
  EpsGrid g = dflt;
  try {
    if (sec.has("values")) {
      g = EpsGrid::from_values(sec.numbers("values", {}));
    } else if (sec.has("min") || sec.has("max") || sec.has("count")) {
      double lo = sec.number("min", dflt.min()), hi = sec.number("max", dflt.max());
      int n = sec.integer("count", static_cast<int>(dflt.size()), 4, 64);
      g = make_eps_grid(lo, hi, n);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("eps grid: ") + e.what());
  }
  sec.finish();
  root.record("eps", json{{"values", std::vector<double>(g.values().begin(), g.values().end())}});
  return g;
}

// Powers 2^-k0, 2^-(k0+step), ...: exact dyadic grids.
inline EpsGrid dyadic_grid(int k0, int k1, int step = 1) {
  std::vector<double> v;
  for (int k = k0; k <= k1; k += step) v.push_back(std::ldexp(1.0, -k));
  return EpsGrid::from_values(v);
}

// Values of a net resampled on n + 1 evenly spaced points, as CSV rows
// (eps, x, value...).
inline void append_profile(Table& t, const std::vector<const GridNet*>& nets, std::size_t n) {
  const GridNet& u = *nets.front();
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t k = 0; k <= n; ++k) {
      double x = u.a() + (u.b() - u.a()) * static_cast<double>(k) / static_cast<double>(n);
      std::vector<double> row{u.grid()[i], x};
      for (const GridNet* w : nets) row.push_back(interpolate(w->spatial(i), w->values(i), x));
      t.rows.push_back(std::move(row));
    }
}

inline std::vector<double> as_vector(const GenNumber& x) { return {x.samples().begin(), x.samples().end()}; }

}  // namespace colvar::scenarios
