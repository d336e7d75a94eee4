// colvar: classify nets, run scenarios, run the acceptance suite.
//
// Exit codes: 0 pass, 2 classification surprise (NonModerate), 3 verdict
// failure, 64 usage or config error, 73 I/O error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "colvar/acceptance.hpp"
#include "colvar/scenarios.hpp"

namespace fs = std::filesystem;
using namespace colvar;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitSurprise = 2;
constexpr int kExitVerdict = 3;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 73;

struct Common {
  std::string config;
  std::string out = "colvar-out";
  std::optional<double> eps_min, eps_max;
  std::optional<int> eps_count;
  std::uint64_t seed = 0x5EED;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--eps-min", c.eps_min, "smallest eps of the grid");
  cmd->add_option("--eps-max", c.eps_max, "largest eps of the grid");
  cmd->add_option("--eps-count", c.eps_count, "number of eps samples");
  cmd->add_option("--seed", c.seed, "seed for randomized checks")->capture_default_str();
}

scenarios::RunOverrides overrides(const Common& c) {
  scenarios::RunOverrides o;
  o.eps_min = c.eps_min;
  o.eps_max = c.eps_max;
  o.eps_count = c.eps_count;
  o.seed = c.seed;
  return o;
}

json load_config(const Common& c) { return c.config.empty() ? json::object() : read_json_file(c.config); }

EpsGrid grid_from(const Common& c) {
  EpsGrid d = make_eps_grid(1e-4, 1e-1, 7);
  double lo = c.eps_min.value_or(d.min()), hi = c.eps_max.value_or(d.max());
  int n = c.eps_count.value_or(static_cast<int>(d.size()));
  try {
    return make_eps_grid(lo, hi, n);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("eps grid: ") + e.what());
  }
}

// Builtin nets for `classify`, scalar in eps.
std::optional<GenNumber> builtin(const std::string& name, const EpsGrid& g) {
  if (name == "eps_squared") return gen_number(g, [](double e) { return e * e; });
  if (name == "exp_neg_inv") return gen_number(g, [](double e) { return std::exp(-1.0 / e); });
  if (name == "inv_eps") return gen_number(g, [](double e) { return 1.0 / e; });
  if (name == "exp_inv_sqrt") return gen_number(g, [](double e) { return std::exp(1.0 / std::sqrt(e)); });
  if (name == "log_eps") return gen_number(g, [](double e) { return std::log(e); });
  return std::nullopt;
}

void write_scenario(const fs::path& dir, const scenarios::ScenarioResult& r) {
  ensure_directory(dir);
  write_text(dir / "result.json", r.to_json().dump(2) + "\n");
  for (const auto& t : r.tables) write_text(dir / (t.name + ".csv"), to_csv(t));
}

int cmd_classify(const Common& c, const std::string& input) {
  AsymptoticReport rep;
  if (auto b = builtin(input, grid_from(c))) {
    rep = classify(*b);
  } else {
    std::ifstream f(input);
    if (!f) {
      if (!fs::exists(input))
        throw ConfigError("'" + input + "' is neither a builtin net (eps_squared, exp_neg_inv, inv_eps, exp_inv_sqrt, log_eps) nor a file");
      throw IoError("cannot read " + input);
    }
    rep = classify(read_gridnet_csv(f));
  }
  json j = rep;
  j["input"] = input;
  std::cout << j.dump(2) << "\n";
  if (!c.out.empty() && c.out != "-") {
    ensure_directory(c.out);
    write_text(fs::path(c.out) / "classification.json", j.dump(2) + "\n");
  }
  return rep.cls == NetClass::NonModerate ? kExitSurprise : kExitPass;
}

int cmd_scenario(const Common& c, const std::string& name) {
  if (!scenarios::is_scenario(name)) throw ConfigError("unknown scenario '" + name + "'");
  auto cfg = load_config(c);
  fs::path dir = fs::path(c.out) / name;
  ensure_directory(dir);
  auto r = scenarios::run_scenario(name, cfg, overrides(c));
  write_scenario(dir, r);
  std::size_t failed = 0;
  for (const auto& ch : r.checks)
    if (!ch.pass) {
      ++failed;
      std::cerr << "FAIL  " << ch.name << ": " << format_double(ch.value) << " " << ch.relation << " "
                << format_double(ch.threshold) << "\n";
    }
  std::cout << name << ": " << (r.pass() ? "pass" : "FAIL") << " (" << r.checks.size() - failed << "/" << r.checks.size()
            << " checks), results in " << dir.string() << "\n";
  return r.pass() ? kExitPass : kExitVerdict;
}

// Suite config: {"asymptotics": {"m_max", "n_max"}, "scenarios": {name: config}}.
int cmd_suite(const Common& c, std::optional<int> m_max) {
  acceptance::SuiteOptions opt;
  json raw = load_config(c);
  ConfigReader root(raw, "suite");
  auto a = root.section("asymptotics");
  opt.cfg.m_max = a.integer("m_max", opt.cfg.m_max, 1, 64);
  opt.cfg.n_max = a.integer("n_max", opt.cfg.n_max, 1, 64);
  a.finish();
  root.store("asymptotics", a);
  if (root.has("scenarios")) {
    const json& all = raw["scenarios"];
    if (!all.is_object()) throw ConfigError("suite.scenarios must be a JSON object");
    for (auto it = all.begin(); it != all.end(); ++it)
      if (!scenarios::is_scenario(it.key())) throw ConfigError("suite.scenarios: unknown scenario '" + it.key() + "'");
    opt.configs = all;
    root.record("scenarios", all);
  }
  root.finish();
  if (m_max) {
    if (*m_max < 1 || *m_max > 64) throw ConfigError("--m-max must lie in [1, 64]");
    opt.cfg.m_max = *m_max;
  }
  opt.seed = c.seed;
  opt.overrides = overrides(c);

  fs::path dir(c.out);
  ensure_directory(dir);
  auto outcome = acceptance::run_suite(opt, [](const acceptance::CriterionResult& r) {
    std::cout << acceptance::format_line(r) << std::endl;
  });
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& [name, r] : outcome.scenarios) write_scenario(dir / name, r);
  auto summary = acceptance::summary_json(outcome);
  summary["config"] = root.echo();
  summary["seed"] = opt.seed;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << (outcome.pass() ? "suite passed" : "suite FAILED") << " in " << std::fixed << std::setprecision(1)
            << outcome.seconds << " s, summary in " << (dir / "summary.json").string() << "\n";
  return outcome.pass() ? kExitPass : kExitVerdict;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"colvar: asymptotic classification and variational scenarios on eps-indexed nets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "colvar 1.0");

  Common common;
  std::string input, name;
  std::optional<int> m_max;

  auto* classify_cmd = app.add_subcommand("classify", "classify a net given as a builtin name or an eps,x,value CSV");
  add_common(classify_cmd, common);
  classify_cmd->add_option("input", input, "builtin net name or CSV path")->required();

  auto* scenario_cmd = app.add_subcommand("scenario", "run one scenario and write result.json plus CSV tables");
  add_common(scenario_cmd, common);
  scenario_cmd->add_option("name", name, "scenario name")->required();

  auto* suite_cmd = app.add_subcommand("suite", "run the acceptance suite");
  add_common(suite_cmd, common);
  suite_cmd->add_option("--m-max", m_max, "largest power of eps the negligibility tests check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*classify_cmd) return cmd_classify(common, input);
    if (*scenario_cmd) return cmd_scenario(common, name);
    return cmd_suite(common, m_max);
  } catch (const ConfigError& e) {
    std::cerr << "colvar: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "colvar: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "colvar: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "colvar: " << e.what() << "\n";
    return kExitVerdict;
  }
}
