// ddmdrive command-line front end.
//
//   simulate   scenario rollouts -> trial CSV
//   calibrate  trial CSV -> parameter JSON + convergence trace
//   fit-risk   trial CSV -> behaviour model JSON + per-driver assignments
//   compare    experiment config -> report JSON + CSV tables
//   report     report JSON -> CSV tables
//
// Exit codes: 0 ok, 2 invalid input, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddmdrive/baselines.hpp"
#include "ddmdrive/calibration.hpp"
#include "ddmdrive/ddm_params.hpp"
#include "ddmdrive/experiment.hpp"
#include "ddmdrive/harness.hpp"
#include "ddmdrive/risk.hpp"
#include "ddmdrive/trial.hpp"

namespace fs = std::filesystem;
using namespace ddmdrive;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::string fixtures = "fixtures";
  std::size_t workers = 1;
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json config_or_empty(const std::string& path) {
  return path.empty() ? nlohmann::json::object() : read_json_file(path);
}

fs::path config_dir(const std::string& path) {
  return path.empty() ? fs::path() : fs::path(path).parent_path();
}

// ---- simulate ---------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::string params;
  std::vector<double> speeds;
  std::size_t n = 0;
  std::optional<double> risk;
  std::size_t traces = 0;
};

int run_simulate(const Common& c, const SimulateArgs& a) {
  const nlohmann::json cfg = config_or_empty(c.config);
  const fs::path base = config_dir(c.config);
  std::string kind_name = a.scenario;
  if (kind_name.empty()) kind_name = cfg.value("scenario", std::string("cutin"));
  const ScenarioKind kind = parse_scenario_kind(kind_name);

  fs::path params_path = fixture_path(c.fixtures, kind);
  if (!a.params.empty()) params_path = a.params;
  else if (cfg.contains("params")) params_path = base / cfg.at("params").get<std::string>();
  const DdmParams p = load_params(params_path);

  std::vector<double> speeds = a.speeds;
  if (speeds.empty()) {
    speeds = cfg.contains("speed_groups") ? cfg.at("speed_groups").get<std::vector<double>>()
                                          : default_speed_groups(kind);
  }
  const std::size_t n = a.n ? a.n : cfg.value("n_per_group", std::size_t{1000});
  const std::uint64_t seed = c.seed.value_or(cfg.value("seed", std::uint64_t{42}));

  SynthesisOptions so;
  so.risk = a.risk.value_or(cfg.value("risk", 0.0));
  so.workers = c.workers;
  if (cfg.contains("scenario_config")) so.scenario = scenario_config_from_json(cfg.at("scenario_config"), kind);
  if (cfg.contains("behavior")) so.behavior = mgd_from_json(read_json_file(base / cfg.at("behavior").get<std::string>()));

  const auto trials = synthesize_trials(p, kind, speeds, n, seed, so);
  const fs::path out = c.out.empty() ? fs::path("trials.csv") : fs::path(c.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_trials(out, trials);

  if (a.traces > 0) {
    // Evidence traces for the first few trials of every group, from the same
    // random streams as the trials themselves.
    fs::path tpath = out;
    tpath.replace_extension(".traces.csv");
    std::ofstream tout(tpath);
    if (!tout) throw ValidationError("cannot write " + tpath.string());
    tout << "v0A_mps,trial,t_s,evidence,bound\n";
    const ScenarioConfig sc = so.scenario.value_or(ScenarioConfig::defaults_for(kind));
    for (std::size_t g = 0; g < speeds.size(); ++g) {
      const DdmEvaluator model(make_scenario(kind, speeds[g], sc), p, so.risk);
      SimulationOptions opt;
      opt.record_trace = true;
      for (std::size_t i = 0; i < std::min(a.traces, n); ++i) {
        Rng rng = make_rng(derive_seed(seed, g), i);
        const auto o = simulate_trial(model, rng, opt);
        for (const auto& pt : o.trace) {
          tout << format_double(speeds[g]) << ',' << i << ',' << format_double(pt.t) << ','
               << format_double(pt.x) << ',' << format_double(pt.bound) << '\n';
        }
      }
    }
    std::cout << "traces: " << tpath.string() << '\n';
  }

  std::size_t brake = 0, steer = 0;
  for (const auto& t : trials) {
    brake += t.choice == Choice::Brake;
    steer += t.choice == Choice::Steer;
  }
  std::cout << to_string(kind) << ": " << trials.size() << " trials, brake " << brake << ", steer "
            << steer << ", none " << trials.size() - brake - steer << " -> " << out.string() << '\n';
  return 0;
}

// ---- calibrate --------------------------------------------------------------------

struct CalibrateArgs {
  std::string trials;
  std::string scenario;
  std::string base_params;
};

int run_calibrate(const Common& c, const CalibrateArgs& a) {
  const auto trials = load_trials(a.trials);
  detail::require(!trials.empty(), a.trials + ": no trials");
  const ScenarioKind kind = a.scenario.empty() ? trials.front().kind : parse_scenario_kind(a.scenario);
  const fs::path base_path = a.base_params.empty() ? fixture_path(c.fixtures, kind) : fs::path(a.base_params);
  const DdmParams base = load_params(base_path);

  CalibrationConfig cc = calibration_config_from_json(config_or_empty(c.config), default_bounds(base));
  if (c.seed) cc.de.seed = *c.seed;
  if (c.workers > 1) cc.de.workers = c.workers;

  const CalibrationResult r = calibrate(trials, kind, base, cc);
  const fs::path out = c.out.empty() ? fs::path("calibration") : fs::path(c.out);
  fs::create_directories(out);
  write_json(out / "params.json", nlohmann::json(r.best_params));
  write_json(out / "result.json", to_json(r));
  std::ofstream trace(out / "trace.csv");
  if (!trace) throw ValidationError("cannot write " + (out / "trace.csv").string());
  write_trace_csv(trace, r.trace);

  std::cout << to_string(kind) << ": n=" << r.n << " k=" << r.k << " loglik=" << r.loglik
            << " BIC=" << r.bic << " (" << r.evaluations << " evaluations) -> " << out.string() << '\n';
  return 0;
}

// ---- fit-risk ---------------------------------------------------------------------

struct FitRiskArgs {
  std::string trials;
  std::string scenario;
  std::vector<std::string> features;
  bool unbiased = false;
};

int run_fit_risk(const Common& c, const FitRiskArgs& a) {
  const auto trials = load_trials(a.trials);
  detail::require(!trials.empty(), a.trials + ": no trials");
  const ScenarioKind kind = a.scenario.empty() ? trials.front().kind : parse_scenario_kind(a.scenario);
  const auto names = a.features.empty() ? default_features() : a.features;
  const MgdModel model = scenario_population_fit(trials, kind, names, a.unbiased);
  if (model.singular) throw DomainError("behaviour covariance is singular: " + model.diagnostic);

  const fs::path out = c.out.empty() ? fs::path("risk") : fs::path(c.out);
  fs::create_directories(out);
  write_json(out / "mgd.json", to_json(model));

  // One assignment per driver, from the mean of their feature vectors.
  std::map<std::string, std::pair<Eigen::VectorXd, std::size_t>> per_driver;
  const bool need_vb = std::find(names.begin(), names.end(), "vb") != names.end();
  for (const auto& t : trials) {
    if (t.kind != kind || !t.ax || !t.ay || (need_vb && !t.vb)) continue;
    const Eigen::VectorXd x = feature_vector(*behavior_of(t), names);
    auto [it, inserted] = per_driver.try_emplace(t.participant_id, Eigen::VectorXd::Zero(x.size()), 0);
    it->second.first += x;
    ++it->second.second;
  }
  std::ofstream csv(out / "assignments.csv");
  if (!csv) throw ValidationError("cannot write " + (out / "assignments.csv").string());
  csv << "participant_id,n_trials,percentile,level,R_s\n";
  for (const auto& [id, acc] : per_driver) {
    const auto s = classify_sensitivity(acc.first / double(acc.second), model);
    csv << id << ',' << acc.second << ',' << format_double(s.percentile) << ',' << to_string(s.level)
        << ',' << format_double(s.R_s) << '\n';
  }
  std::cout << to_string(kind) << ": behaviour model from " << model.n << " trials, "
            << per_driver.size() << " drivers -> " << out.string() << '\n';
  return 0;
}

// ---- compare / report ---------------------------------------------------------------

int run_compare(const Common& c, bool fixtures_given) {
  detail::require(!c.config.empty(), "compare: --config is required");
  nlohmann::json j = read_json_file(c.config);
  if (c.seed) j["seed"] = *c.seed;
  if (c.workers > 1) j["workers"] = c.workers;
  if (fixtures_given) j["fixtures"] = fs::absolute(c.fixtures).string();
  const ExperimentConfig cfg = experiment_config_from_json(j, config_dir(c.config));
  const nlohmann::json report = run_experiment(cfg);

  const fs::path out = c.out.empty() ? fs::path("report") : fs::path(c.out);
  fs::create_directories(out);
  write_json(out / "report.json", report);
  write_report_tables(report, out);
  std::cout << "report " << report["metadata"]["config_hash"].get<std::string>() << " -> "
            << (out / "report.json").string() << '\n';
  return 0;
}

int run_report(const Common& c, const std::string& input) {
  const nlohmann::json report = read_json_file(input);
  const fs::path out = c.out.empty() ? fs::path(input).parent_path() : fs::path(c.out);
  for (const auto& p : write_report_tables(report, out)) std::cout << p.string() << '\n';
  return 0;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "master random seed");
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--out", c.out, "output file or directory");
  app->add_option("--fixtures", c.fixtures, "directory with per-scenario parameter fixtures");
  app->add_option("--workers", c.workers, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift-diffusion driver decision toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  SimulateArgs sim;
  CalibrateArgs cal;
  FitRiskArgs risk;
  std::string report_in;

  auto* simulate = app.add_subcommand("simulate", "simulate decisions over speed groups into a trial CSV");
  add_common(simulate, common);
  simulate->add_option("--scenario", sim.scenario, "cutin, rearend or lanechange");
  simulate->add_option("--params", sim.params, "DDM parameter JSON (default: fixture)");
  simulate->add_option("--speeds", sim.speeds, "initial ego speeds (m/s)");
  simulate->add_option("-n,--n-per-group", sim.n, "trials per speed group");
  simulate->add_option("--risk", sim.risk, "risk sensitivity R_s in [-1, 1]");
  simulate->add_option("--traces", sim.traces, "also export evidence traces for this many trials per group");

  auto* calibrate_cmd = app.add_subcommand("calibrate", "fit DDM parameters to a trial CSV");
  add_common(calibrate_cmd, common);
  calibrate_cmd->add_option("trials", cal.trials, "trial CSV")->required();
  calibrate_cmd->add_option("--scenario", cal.scenario, "scenario to fit (default: first trial's)");
  calibrate_cmd->add_option("--base", cal.base_params, "reference parameters (default: fixture)");

  auto* fit_risk = app.add_subcommand("fit-risk", "fit the behaviour model and classify drivers");
  add_common(fit_risk, common);
  fit_risk->add_option("trials", risk.trials, "trial CSV")->required();
  fit_risk->add_option("--scenario", risk.scenario, "scenario (default: first trial's)");
  fit_risk->add_option("--features", risk.features, "features among vb, ax, ay");
  fit_risk->add_flag("--unbiased", risk.unbiased, "use the n-1 covariance");

  auto* compare = app.add_subcommand("compare", "run a model comparison experiment");
  add_common(compare, common);

  auto* report = app.add_subcommand("report", "turn a report JSON into CSV tables");
  add_common(report, common);
  report->add_option("report", report_in, "report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return run_simulate(common, sim);
    if (*calibrate_cmd) return run_calibrate(common, cal);
    if (*fit_risk) return run_fit_risk(common, risk);
    if (*compare) return run_compare(common, compare->count("--fixtures") > 0);
    if (*report) return run_report(common, report_in);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
