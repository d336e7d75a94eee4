#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "colvar/asymptotics.hpp"
#include "colvar/error.hpp"
#include "colvar/grid_net.hpp"
#include "colvar/symmetry.hpp"
#include "colvar/variational.hpp"

namespace colvar {

using json = nlohmann::json;

// JSON forms of the reports. Arrays are aligned with the "eps" array they
// travel with.

inline void to_json(json& j, const AsymptoticReport& r) {
  j = json{{"class", to_string(r.cls)}, {"order_n", r.order_n},     {"slope", r.slope},
           {"r2", r.r2},                {"eps", r.eps},             {"magnitude", r.magnitude}};
  if (r.witness_eps > 0.0) j["witness_eps"] = r.witness_eps;
  if (!r.per_order.empty()) {
    std::vector<std::string> po;
    for (auto c : r.per_order) po.push_back(to_string(c));
    j["per_derivative_order"] = po;
  }
}

inline void to_json(json& j, const WeakReport& r) {
  j = json{{"pass", r.pass}, {"max_discrepancy", r.max_discrepancy}, {"eps", r.eps}};
  json e = json::array();
  for (const auto& x : r.entries)
    e.push_back({{"test", x.test},
                 {"pairing", x.pairing},
                 {"limit", x.limit},
                 {"limit_kind", x.extrapolated ? "tail-limit estimate" : "smallest-eps value"},
                 {"target", x.target},
                 {"discrepancy", x.discrepancy}});
  j["tests"] = e;
}

inline void to_json(json& j, const DriftReport& r) {
  j = json{{"eps", r.eps}, {"drift", r.drift}, {"initial", r.initial}, {"max_drift", r.max_drift}};
}

inline void to_json(json& j, const IdentityReport& r) {
  j = json{{"pass", r.pass}, {"max_abs", r.max_abs}, {"max_rel", r.max_rel}, {"classification", r.report}};
}

inline void to_json(json& j, const CriterionReport& r) {
  j = json{{"symmetry", r.symmetry}, {"raw", r.raw}, {"classification", r.report}};
}

inline void to_json(json& j, const AssocReport& r) {
  j = json{{"verdict", to_string(r.verdict)}, {"eps", r.eps}};
  j["min_limit"] = std::isfinite(r.min_limit) ? json(r.min_limit) : json(nullptr);
  json e = json::array();
  for (const auto& x : r.entries) {
    json k{{"test", x.test}, {"tau", x.tau}, {"difference", x.difference}};
    k["limit"] = x.limit ? json(*x.limit) : json(nullptr);
    e.push_back(k);
  }
  j["entries"] = e;
}

inline json eps_json(const EpsGrid& g) { return json(std::vector<double>(g.values().begin(), g.values().end())); }

inline json samples_json(const GenNumber& x) {
  return json{{"eps", eps_json(x.grid())}, {"value", std::vector<double>(x.samples().begin(), x.samples().end())}};
}

// ---------------------------------------------------------------------------
// Files.

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline std::string to_csv(const Table& t) {
  std::string s;
  for (std::size_t k = 0; k < t.header.size(); ++k) s += (k ? "," : "") + t.header[k];
  s += '\n';
  for (const auto& r : t.rows) {
    if (r.size() != t.header.size()) throw InvalidArgument("CSV row width differs from the header in " + t.name);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) s += ',';
      s += format_double(r[k]);
    }
    s += '\n';
  }
  return s;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + p.string() + " for writing");
  f << text;
  f.close();
  if (!f) throw IoError("write to " + p.string() + " failed");
}

inline void ensure_directory(const std::filesystem::path& d) {
  std::error_code ec;
  std::filesystem::create_directories(d, ec);
  if (ec) throw IoError("cannot create " + d.string() + ": " + ec.message());
  // A probe write catches read-only directories before any work is done.
  auto probe = d / ".colvar_probe";
  write_text(probe, "");
  std::filesystem::remove(probe, ec);
}

inline json read_json_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw IoError("cannot read " + p.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

// GridNet from CSV with header "eps,x,value". Rows of one eps must have
// increasing, evenly spaced x; eps blocks may come in any order.
inline GridNet read_gridnet_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "eps,x,value") throw ParseError("CSV header must be eps,x,value");
  std::map<double, std::vector<std::pair<double, double>>, std::greater<>> slices;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    double v[3];
    for (int k = 0; k < 3; ++k) {
      std::string cell;
      if (!std::getline(ls, cell, k < 2 ? ',' : '\n')) throw ParseError("row " + std::to_string(row) + ": too few cells");
      std::size_t used = 0;
      try {
        v[k] = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ": not a number: '" + cell + "'");
      }
      if (used != cell.size() || !std::isfinite(v[k]))
        throw ParseError("row " + std::to_string(row) + ": not a finite number: '" + cell + "'");
    }
    slices[v[0]].push_back({v[1], v[2]});
  }
  if (slices.empty()) throw ParseError("CSV has no data rows");
  std::vector<double> eps;
  std::vector<SpatialGrid> sp;
  std::vector<std::vector<double>> vals;
  for (auto& [e, pts] : slices) {
    if (pts.size() < 2) throw ParseError("eps block with fewer than 2 rows");
    double a = pts.front().first, b = pts.back().first;
    double h = (b - a) / static_cast<double>(pts.size() - 1);
    std::vector<double> v;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (std::fabs(pts[k].first - (a + h * static_cast<double>(k))) > 1e-9 * (std::fabs(b - a) + 1.0))
        throw ParseError("x values of an eps block are not evenly spaced and increasing");
      v.push_back(pts[k].second);
    }
    eps.push_back(e);
    try {
      sp.emplace_back(a, b, pts.size());
    } catch (const Error& ex) {
      throw ParseError(ex.what());
    }
    vals.push_back(std::move(v));
  }
  try {
    return GridNet(EpsGrid::from_values(eps), std::move(sp), std::move(vals));
  } catch (const Error& ex) {
    throw ParseError(ex.what());
  }
}

// ---------------------------------------------------------------------------
// Strict config access: every key read is recorded; finish() rejects the rest.
// echo() returns the effective configuration, defaults included.

class ConfigReader {
 public:
  explicit ConfigReader(json j = json::object(), std::string where = "config") : j_(std::move(j)), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  double number(const std::string& key, double dflt) {
    double v = dflt;
    if (j_.contains(key)) {
      if (!j_[key].is_number()) throw ConfigError(path(key) + " must be a number");
      v = j_[key].get<double>();
    }
    if (!std::isfinite(v)) throw ConfigError(path(key) + " must be finite");
    echo_[key] = v;
    return v;
  }
  double positive(const std::string& key, double dflt) {
    double v = number(key, dflt);
    if (!(v > 0.0)) throw ConfigError(path(key) + " must be positive");
    return v;
  }
  int integer(const std::string& key, int dflt, int lo, int hi) {
    int v = dflt;
    if (j_.contains(key)) {
      if (!j_[key].is_number_integer()) throw ConfigError(path(key) + " must be an integer");
      v = j_[key].get<int>();
    }
    if (v < lo || v > hi)
      throw ConfigError(path(key) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    echo_[key] = v;
    return v;
  }
  std::string choice(const std::string& key, const std::string& dflt, const std::vector<std::string>& allowed) {
    std::string v = dflt;
    if (j_.contains(key)) {
      if (!j_[key].is_string()) throw ConfigError(path(key) + " must be a string");
      v = j_[key].get<std::string>();
    }
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == v;
    if (!ok) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(path(key) + " must be one of: " + list);
    }
    echo_[key] = v;
    return v;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> dflt) {
    if (j_.contains(key)) {
      if (!j_[key].is_array()) throw ConfigError(path(key) + " must be an array of numbers");
      dflt.clear();
      for (const auto& x : j_[key]) {
        if (!x.is_number()) throw ConfigError(path(key) + " must be an array of numbers");
        dflt.push_back(x.get<double>());
      }
    }
    for (double v : dflt)
      if (!std::isfinite(v)) throw ConfigError(path(key) + " must hold finite numbers");
    echo_[key] = dflt;
    return dflt;
  }
  bool has(const std::string& key) const { return j_.contains(key); }
  ConfigReader section(const std::string& key) {
    json sub = json::object();
    if (j_.contains(key)) sub = j_[key];
    return ConfigReader(sub, path(key));
  }
  // Records a finished section in the echo.
  void store(const std::string& key, const ConfigReader& sub) { echo_[key] = sub.echo(); }
  void record(const std::string& key, json v) { echo_[key] = std::move(v); }

  void finish() const {
    std::vector<std::string> unknown;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!echo_.contains(it.key())) unknown.push_back(it.key());
    if (!unknown.empty()) {
      std::string s;
      for (const auto& u : unknown) s += (s.empty() ? "" : ", ") + u;
      throw ConfigError("unknown key(s) in " + where_ + ": " + s);
    }
  }
  const json& echo() const { return echo_; }

 private:
  std::string path(const std::string& key) const { return where_ + "." + key; }

  json j_;
  std::string where_;
  json echo_ = json::object();
};

}  // namespace colvar
