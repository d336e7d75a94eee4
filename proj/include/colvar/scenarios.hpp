#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "colvar/scenarios/elastostatics.hpp"
#include "colvar/scenarios/geodesic.hpp"
#include "colvar/scenarios/mechanics.hpp"
#include "colvar/scenarios/wave.hpp"
#include "colvar/scenarios/weierstrass.hpp"

namespace colvar::scenarios {

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"delta_particle", "central_field", "string_with_spring",
                                              "beam_with_joint", "hard_rod",     "rod_general",
                                              "weierstrass",    "wave_delta_spring", "geodesic_energy"};
  return names;
}

inline bool is_scenario(const std::string& name) {
  for (const auto& n : scenario_names())
    if (n == name) return true;
  return false;
}

// Command-line overrides applied on top of a config.
struct RunOverrides {
  std::optional<double> eps_min, eps_max;
  std::optional<int> eps_count;
  std::uint64_t seed = 0x5EED;
};

// Merges eps flags into config["eps"]; flags replace an explicit value list.
inline json apply_overrides(json config, const RunOverrides& o) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (!o.eps_min && !o.eps_max && !o.eps_count) return config;
  json eps = config.contains("eps") && config["eps"].is_object() ? config["eps"] : json::object();
  if (eps.contains("values")) {
    if (!(o.eps_min && o.eps_max && o.eps_count))
      throw ConfigError("config lists eps values; --eps-min, --eps-max and --eps-count must all be given to replace them");
    eps.erase("values");
  }
  if (o.eps_min) eps["min"] = *o.eps_min;
  if (o.eps_max) eps["max"] = *o.eps_max;
  if (o.eps_count) eps["count"] = *o.eps_count;
  config["eps"] = eps;
  return config;
}

// Runs one scenario from its JSON config. Unknown names and keys throw
// ConfigError; params echoes every setting actually used, defaults included.
inline ScenarioResult run_scenario(const std::string& name, const json& config, const RunOverrides& o = {}) {
  if (!is_scenario(name)) throw ConfigError("unknown scenario '" + name + "'");
  ConfigReader c(apply_overrides(config, o), name);
  ScenarioResult r;
  if (name == "delta_particle") {
    r = delta_particle(DeltaParticleParams::from(c));
  } else if (name == "central_field") {
    auto p = CentralFieldParams::from(c);
    p.seed = o.seed;
    r = central_field(p);
  } else if (name == "string_with_spring") {
    r = string_with_spring(StringParams::from(c));
  } else if (name == "beam_with_joint") {
    r = beam_with_joint(BeamParams::from(c));
  } else if (name == "hard_rod") {
    r = hard_rod(RodParams::from(c, "hard"));
  } else if (name == "rod_general") {
    r = rod_general(RodParams::from(c, "cubic"));
  } else if (name == "weierstrass") {
    r = weierstrass(WeierstrassParams::from(c));
  } else if (name == "wave_delta_spring") {
    r = wave_delta_spring(WaveParams::from(c));
  } else {
    r = geodesic_energy(GeodesicParams::from(c));
  }
  r.params = c.echo();
  r.params["seed"] = o.seed;
  return r;
}

}  // namespace colvar::scenarios
