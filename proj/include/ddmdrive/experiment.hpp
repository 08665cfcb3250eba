#pragma once

// End-to-end comparison runs: DDM speed-group simulations, baseline
// rollouts, accuracy against observed (or synthetic) decisions, collision
// rates, RT curves and an optional risk-sensitivity sweep. The report is a
// single JSON document; write_report_tables turns it into CSV tables.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddmdrive/baselines.hpp"
#include "ddmdrive/ddm.hpp"
#include "ddmdrive/ddm_params.hpp"
#include "ddmdrive/error.hpp"
#include "ddmdrive/harness.hpp"
#include "ddmdrive/kinematics.hpp"
#include "ddmdrive/risk.hpp"
#include "ddmdrive/trial.hpp"

#ifndef DDMDRIVE_VERSION
#define DDMDRIVE_VERSION "0.0.0"
#endif

namespace ddmdrive {

inline constexpr const char* kVersion = DDMDRIVE_VERSION;

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[std::size_t(i)] = digits[v & 0xf];
  return s;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct RiskCoupling {
  double lambda = 0.0;
  double eta = 0.0;
  double rho = 0.0;
};

struct ExperimentConfig {
  std::vector<ScenarioKind> scenarios{ScenarioKind::CutIn};
  std::vector<std::string> models{"DDM", "IDM", "Gipps", "MOBIL"};
  std::map<ScenarioKind, std::vector<double>> speed_groups;  ///< defaults when missing
  std::size_t n_per_group = 1000;
  std::uint64_t seed = 42;
  std::size_t workers = 1;
  double risk = 0.0;
  std::optional<std::vector<double>> rs_sweep;
  std::optional<RiskCoupling> risk_coupling;
  std::filesystem::path fixtures = "fixtures";
  std::map<ScenarioKind, std::filesystem::path> params;  ///< overrides fixtures/<kind>.json
  std::optional<std::filesystem::path> baselines;  ///< built-in defaults when absent
  std::optional<std::filesystem::path> behavior;   ///< MgdModel for synthetic features
  std::optional<std::filesystem::path> trials;     ///< observed decisions
  ControlConfig control{};
  double curve_step = 0.05;
  double curve_max = 10.0;
  nlohmann::json source = nlohmann::json::object();

  std::vector<double> groups_for(ScenarioKind kind) const {
    auto it = speed_groups.find(kind);
    return it == speed_groups.end() ? default_speed_groups(kind) : it->second;
  }

  void validate() const {
    detail::require(!scenarios.empty(), "experiment: no scenarios");
    detail::require(n_per_group >= 1, "experiment: n_per_group must be at least 1");
    detail::require(workers >= 1, "experiment: workers must be at least 1");
    detail::require(curve_step > 0.0 && curve_max > 0.0, "experiment: bad RT curve grid");
    detail::require(risk >= -1.0 && risk <= 1.0, "experiment: risk must be in [-1, 1]");
    for (const auto& m : models) {
      if (m != "DDM") parse_baseline_model(m);
    }
    for (const auto& [kind, groups] : speed_groups) {
      detail::require(!groups.empty(), "experiment: empty speed group list");
      for (double v : groups) detail::require(v > 0.0, "experiment: speeds must be positive");
    }
    if (rs_sweep) {
      for (double r : *rs_sweep) {
        detail::require(r >= -1.0 && r <= 1.0, "experiment: rs_sweep values must be in [-1, 1]");
      }
    }
  }
};

/// Hash of the configuration without keys that cannot change the results.
inline std::string config_hash(const nlohmann::json& source) {
  nlohmann::json j = source;
  if (j.is_object()) j.erase("workers");
  return hex64(fnv1a64(j.dump()));
}

/// Relative paths in the document are resolved against `base_dir`.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                                    const std::filesystem::path& base_dir = {}) {
  ExperimentConfig c;
  c.source = j;
  auto path_of = [&](const nlohmann::json& v) {
    std::filesystem::path p = v.get<std::string>();
    return p.is_relative() ? base_dir / p : p;
  };
  try {
    if (j.contains("scenarios")) {
      c.scenarios.clear();
      for (const auto& s : j.at("scenarios")) c.scenarios.push_back(parse_scenario_kind(s.get<std::string>()));
    }
    if (j.contains("models")) c.models = j.at("models").get<std::vector<std::string>>();
    if (j.contains("speed_groups")) {
      for (const auto& [k, v] : j.at("speed_groups").items()) {
        c.speed_groups[parse_scenario_kind(k)] = v.get<std::vector<double>>();
      }
    }
    c.n_per_group = j.value("n_per_group", c.n_per_group);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    c.risk = j.value("risk", c.risk);
    if (j.contains("rs_sweep")) c.rs_sweep = j.at("rs_sweep").get<std::vector<double>>();
    if (j.contains("risk_coupling")) {
      const auto& r = j.at("risk_coupling");
      c.risk_coupling = RiskCoupling{r.value("lambda", 0.0), r.value("eta", 0.0), r.value("rho", 0.0)};
    }
    c.fixtures = j.contains("fixtures") ? path_of(j.at("fixtures")) : base_dir / c.fixtures;
    if (j.contains("params")) {
      for (const auto& [k, v] : j.at("params").items()) c.params[parse_scenario_kind(k)] = path_of(v);
    }
    if (j.contains("baselines")) c.baselines = path_of(j.at("baselines"));
    if (j.contains("behavior")) c.behavior = path_of(j.at("behavior"));
    if (j.contains("trials")) c.trials = path_of(j.at("trials"));
    if (j.contains("control")) {
      const auto& k = j.at("control");
      c.control.brake_decel = k.value("brake_decel", c.control.brake_decel);
      c.control.lane_change_duration = k.value("lane_change_duration", c.control.lane_change_duration);
      if (k.contains("target_lane")) c.control.target_lane = k.at("target_lane").get<int>();
    }
    if (j.contains("rt_curve")) {
      c.curve_step = j.at("rt_curve").value("step", c.curve_step);
      c.curve_max = j.at("rt_curve").value("max", c.curve_max);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace detail {

inline nlohmann::json choice_shares_json(const ChoiceSummary& s) {
  return {{"brake", s.p_brake}, {"steer", s.p_steer}, {"none", s.p_none}};
}

/// Rethrows the current exception with a context prefix, keeping its type.
[[noreturn]] inline void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(context + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(context + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(context + ": " + e.what());
  }
}

}  // namespace detail

inline nlohmann::json run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  nlohmann::json fixtures = nlohmann::json::object();
  auto note_fixture = [&](const std::filesystem::path& p) {
    fixtures[p.filename().string()] = hex64(fnv1a64(read_file_bytes(p)));
  };

  BaselineParams bparams;
  if (cfg.baselines) {
    bparams = baseline_params_from_json(read_json_file(*cfg.baselines));
    note_fixture(*cfg.baselines);
  }
  std::optional<MgdModel> behavior;
  if (cfg.behavior) {
    behavior = mgd_from_json(read_json_file(*cfg.behavior));
    note_fixture(*cfg.behavior);
  }
  std::vector<TrialRecord> empirical;
  if (cfg.trials) {
    empirical = load_trials(*cfg.trials);
    note_fixture(*cfg.trials);
  }

  nlohmann::json conditions = nlohmann::json::array();
  nlohmann::json accuracy = nlohmann::json::array();
  nlohmann::json collisions = nlohmann::json::array();
  nlohmann::json curves = nlohmann::json::array();
  nlohmann::json sweep = nlohmann::json::array();

  std::vector<double> curve_times;
  for (std::size_t i = 0; double(i) * cfg.curve_step <= cfg.curve_max + 1e-9; ++i) {
    curve_times.push_back(double(i) * cfg.curve_step);
  }

  bool want_ddm = false;
  std::vector<BaselineModel> baselines;
  for (const auto& m : cfg.models) {
    if (m == "DDM") want_ddm = true;
    else baselines.push_back(parse_baseline_model(m));
  }

  for (ScenarioKind kind : cfg.scenarios) {
    const std::string kname(to_string(kind));
    try {
      auto pit = cfg.params.find(kind);
      const auto ppath = pit == cfg.params.end() ? fixture_path(cfg.fixtures, kind) : pit->second;
      DdmParams p = load_params(ppath);
      note_fixture(ppath);
      detail::require(p.kind == kind, ppath.string() + " holds parameters for another scenario");
      if (cfg.risk_coupling) {
        p.lambda = cfg.risk_coupling->lambda;
        p.eta = cfg.risk_coupling->eta;
        p.rho = cfg.risk_coupling->rho;
      }
      const auto groups = cfg.groups_for(kind);
      const std::uint64_t kseed = derive_seed(cfg.seed, std::uint64_t(kind));

      SynthesisOptions so;
      so.risk = cfg.risk;
      so.control = cfg.control;
      so.behavior = behavior;
      so.workers = cfg.workers;

      // DDM conditions: choice shares, RT summaries and collisions.
      std::vector<TrialRecord> ddm_trials;
      if (want_ddm) {
        so.id_prefix = "ddm";
        ddm_trials = synthesize_trials(p, kind, groups, cfg.n_per_group, derive_seed(kseed, 0), so);
      }

      // Observed decisions: the supplied trials or a second synthetic sample.
      std::vector<TrialRecord> observed;
      if (cfg.trials) {
        for (const auto& t : empirical) {
          if (t.kind == kind) observed.push_back(t);
        }
      } else {
        so.id_prefix = "obs";
        observed = synthesize_trials(p, kind, groups, cfg.n_per_group, derive_seed(kseed, 1), so);
      }

      for (std::size_t g = 0; g < groups.size(); ++g) {
        const double v = groups[g];
        const ScenarioTimeline tl = make_scenario(kind, v);
        if (want_ddm) {
          const std::vector<TrialRecord> slice(ddm_trials.begin() + std::ptrdiff_t(g * cfg.n_per_group),
                                               ddm_trials.begin() + std::ptrdiff_t((g + 1) * cfg.n_per_group));
          std::vector<DecisionOutcome> outs;
          for (const auto& t : slice) outs.push_back({t.choice, t.rt, 0.0, {}});
          const ChoiceSummary s = summarize(outs, false);
          nlohmann::json row = {{"scenario", kname}, {"v0A", v}, {"model", "DDM"},
                                {"n", s.n_trials}, {"shares", detail::choice_shares_json(s)},
                                {"quantile_levels", s.quantile_levels},
                                {"brake_rt_quantiles", s.brake_rt_quantiles},
                                {"steer_rt_quantiles", s.steer_rt_quantiles},
                                {"mean_rt", s.mean_rt ? nlohmann::json(*s.mean_rt) : nlohmann::json(nullptr)}};
          conditions.push_back(row);
          collisions.push_back({{"scenario", kname}, {"v0A", v}, {"model", "DDM"},
                                {"runs", slice.size()}, {"collision_rate", collision_rate(slice)}});
          for (Choice c : {Choice::Brake, Choice::Steer}) {
            curves.push_back({{"scenario", kname}, {"v0A", v}, {"model", "DDM"},
                              {"choice", std::string(to_string(c))},
                              {"t", curve_times},
                              {"p", curve_at(cumulative_rt_curve(slice, c), curve_times)}});
          }
        }
        for (BaselineModel m : baselines) {
          const BaselineOutcome o = run_baseline(tl, m, bparams);
          const double shares_b = o.decision.choice == Choice::Brake ? 1.0 : 0.0;
          const double shares_s = o.decision.choice == Choice::Steer ? 1.0 : 0.0;
          conditions.push_back({{"scenario", kname}, {"v0A", v}, {"model", std::string(to_string(m))},
                                {"n", 1},
                                {"shares", {{"brake", shares_b}, {"steer", shares_s},
                                            {"none", 1.0 - shares_b - shares_s}}},
                                {"decision", std::string(to_string(o.decision.choice))},
                                {"rt", o.decision.rt ? nlohmann::json(*o.decision.rt) : nlohmann::json(nullptr)}});
          collisions.push_back({{"scenario", kname}, {"v0A", v}, {"model", std::string(to_string(m))},
                                {"runs", 1},
                                {"collision_rate", o.collision.collided ? 100.0 : 0.0}});
        }
      }

      // Accuracy: every observed trial gets one prediction per model, made
      // at that trial's own initial speed.
      if (!observed.empty()) {
        std::map<double, std::vector<std::size_t>> by_speed;
        for (std::size_t j = 0; j < observed.size(); ++j) by_speed[observed[j].v0A].push_back(j);
        std::map<double, ScenarioTimeline> timelines;
        for (const auto& [v, idx] : by_speed) timelines.emplace(v, make_scenario(kind, v));

        std::vector<std::pair<std::string, std::vector<Choice>>> predictions;
        if (want_ddm) {
          std::vector<Choice> pred(observed.size());
          const std::uint64_t pseed = derive_seed(kseed, 2);
          parallel_for(observed.size(), cfg.workers, [&](std::size_t j) {
            const DdmEvaluator model(timelines.at(observed[j].v0A), p, cfg.risk);
            Rng rng = make_rng(pseed, j);
            pred[j] = simulate_trial(model, rng).choice;
          });
          predictions.emplace_back("DDM", std::move(pred));
        }
        for (BaselineModel m : baselines) {
          std::map<double, Choice> at_speed;
          for (const auto& [v, tl] : timelines) at_speed[v] = run_baseline(tl, m, bparams).decision.choice;
          std::vector<Choice> pred;
          for (const auto& t : observed) pred.push_back(at_speed.at(t.v0A));
          predictions.emplace_back(std::string(to_string(m)), std::move(pred));
        }
        for (const auto& [name, pred] : predictions) {
          for (const auto& [v, idx] : by_speed) {
            std::vector<Choice> a, b;
            for (std::size_t j : idx) {
              a.push_back(pred[j]);
              b.push_back(observed[j].choice);
            }
            accuracy.push_back({{"scenario", kname}, {"v0A", v}, {"model", name},
                                {"n", idx.size()}, {"accuracy", decision_accuracy(a, b)}});
          }
          std::vector<Choice> obs;
          for (const auto& t : observed) obs.push_back(t.choice);
          accuracy.push_back({{"scenario", kname}, {"v0A", nullptr}, {"model", name},
                              {"n", observed.size()}, {"accuracy", decision_accuracy(pred, obs)}});
        }
      }

      // Risk-sensitivity sweep; every level reuses the same random streams.
      if (cfg.rs_sweep && want_ddm) {
        BatchOptions bo;
        bo.workers = cfg.workers;
        for (std::size_t g = 0; g < groups.size(); ++g) {
          const ScenarioTimeline tl = make_scenario(kind, groups[g]);
          const std::uint64_t sseed = derive_seed(derive_seed(kseed, 3), g);
          for (double r : *cfg.rs_sweep) {
            const ChoiceSummary s = choice_probabilities(tl, p, r, cfg.n_per_group, sseed, bo);
            sweep.push_back({{"scenario", kname}, {"v0A", groups[g]}, {"risk", r},
                             {"n", s.n_trials}, {"shares", detail::choice_shares_json(s)},
                             {"mean_rt", s.mean_rt ? nlohmann::json(*s.mean_rt) : nlohmann::json(nullptr)}});
          }
        }
      }
    } catch (...) {
      detail::rethrow_with_context("scenario " + kname);
    }
  }

  nlohmann::json report;
  report["metadata"] = {{"version", kVersion},
                        {"seed", cfg.seed},
                        {"config_hash", config_hash(cfg.source)},
                        {"fixtures", fixtures},
                        {"n_per_group", cfg.n_per_group},
                        {"observed", cfg.trials ? "trials" : "synthetic"}};
  report["conditions"] = conditions;
  report["accuracy"] = accuracy;
  report["collisions"] = collisions;
  report["rt_curves"] = curves;
  if (cfg.rs_sweep) report["rs_sweep"] = sweep;
  return report;
}

// ---- CSV tables ------------------------------------------------------------------------

namespace detail {

inline std::string csv_number(const nlohmann::json& v) {
  if (v.is_null()) return {};
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  return format_double(v.get<double>());
}

inline std::ofstream open_table(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

}  // namespace detail

/// Writes one CSV per report table into `dir`; returns the files written.
inline std::vector<std::filesystem::path> write_report_tables(const nlohmann::json& report,
                                                              const std::filesystem::path& dir) {
  using detail::csv_number;
  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(dir);
    {
      const auto path = dir / "shares.csv";
      auto out = detail::open_table(path);
      out << "scenario,v0A_mps,model,n,p_brake,p_steer,p_none,mean_rt_s\n";
      for (const auto& r : report.at("conditions")) {
        out << r.at("scenario").get<std::string>() << ',' << csv_number(r.at("v0A")) << ','
            << r.at("model").get<std::string>() << ',' << csv_number(r.at("n")) << ','
            << csv_number(r.at("shares").at("brake")) << ',' << csv_number(r.at("shares").at("steer"))
            << ',' << csv_number(r.at("shares").at("none")) << ','
            << csv_number(r.contains("mean_rt") ? r.at("mean_rt") : r.value("rt", nlohmann::json()))
            << '\n';
      }
      written.push_back(path);
    }
    {
      const auto path = dir / "rt_quantiles.csv";
      auto out = detail::open_table(path);
      out << "scenario,v0A_mps,choice,level,rt_s\n";
      for (const auto& r : report.at("conditions")) {
        if (!r.contains("quantile_levels")) continue;
        const auto& levels = r.at("quantile_levels");
        for (const char* c : {"brake", "steer"}) {
          const auto& q = r.at(std::string(c) + "_rt_quantiles");
          for (std::size_t i = 0; i < q.size(); ++i) {
            out << r.at("scenario").get<std::string>() << ',' << csv_number(r.at("v0A")) << ','
                << c << ',' << csv_number(levels.at(i)) << ',' << csv_number(q.at(i)) << '\n';
          }
        }
      }
      written.push_back(path);
    }
    {
      const auto path = dir / "rt_curves.csv";
      auto out = detail::open_table(path);
      out << "scenario,v0A_mps,model,choice,t_s,cumulative_p\n";
      for (const auto& r : report.at("rt_curves")) {
        const auto& t = r.at("t");
        const auto& p = r.at("p");
        for (std::size_t i = 0; i < t.size(); ++i) {
          out << r.at("scenario").get<std::string>() << ',' << csv_number(r.at("v0A")) << ','
              << r.at("model").get<std::string>() << ',' << r.at("choice").get<std::string>() << ','
              << csv_number(t.at(i)) << ',' << csv_number(p.at(i)) << '\n';
        }
      }
      written.push_back(path);
    }
    {
      const auto path = dir / "accuracy.csv";
      auto out = detail::open_table(path);
      out << "scenario,v0A_mps,model,n,accuracy_pct\n";
      for (const auto& r : report.at("accuracy")) {
        out << r.at("scenario").get<std::string>() << ',' << csv_number(r.at("v0A")) << ','
            << r.at("model").get<std::string>() << ',' << csv_number(r.at("n")) << ','
            << csv_number(r.at("accuracy")) << '\n';
      }
      written.push_back(path);
    }
    {
      const auto path = dir / "collisions.csv";
      auto out = detail::open_table(path);
      out << "scenario,v0A_mps,model,runs,collision_rate_pct\n";
      for (const auto& r : report.at("collisions")) {
        out << r.at("scenario").get<std::string>() << ',' << csv_number(r.at("v0A")) << ','
            << r.at("model").get<std::string>() << ',' << csv_number(r.at("runs")) << ','
            << csv_number(r.at("collision_rate")) << '\n';
      }
      written.push_back(path);
    }
    if (report.contains("rs_sweep")) {
      const auto path = dir / "rs_sweep.csv";
      auto out = detail::open_table(path);
      out << "scenario,v0A_mps,risk,n,p_brake,p_steer,p_none,mean_rt_s\n";
      for (const auto& r : report.at("rs_sweep")) {
        out << r.at("scenario").get<std::string>() << ',' << csv_number(r.at("v0A")) << ','
            << csv_number(r.at("risk")) << ',' << csv_number(r.at("n")) << ','
            << csv_number(r.at("shares").at("brake")) << ',' << csv_number(r.at("shares").at("steer"))
            << ',' << csv_number(r.at("shares").at("none")) << ',' << csv_number(r.at("mean_rt"))
            << '\n';
      }
      written.push_back(path);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  return written;
}

}  // namespace ddmdrive
