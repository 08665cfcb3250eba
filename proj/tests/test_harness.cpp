#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ddmdrive/experiment.hpp"
#include "ddmdrive/harness.hpp"
#include "support.hpp"

using namespace ddmdrive;
namespace fs = std::filesystem;

namespace {

TrialRecord record(Choice c, std::optional<double> rt, double v0 = 25.0, bool collided = false) {
  TrialRecord r;
  r.participant_id = "p1";
  r.kind = ScenarioKind::CutIn;
  r.v0A = v0;
  r.choice = c;
  r.rt = rt;
  r.collided = collided;
  return r;
}

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("ddmdrive_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(TrialCsv, ThreeRows) {
  std::istringstream in(std::string(kTrialCsvHeader) +
                        "\np1,cutin,25.82,brake,1.2,25.82,6.1,0.4,0"
                        "\np2,rearend,22.1,steer,0.9,,3,2.5,1"
                        "\np3,lanechange,20.71,none,,,,,false\n");
  const auto r = read_trials(in);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].choice, Choice::Brake);
  EXPECT_EQ(r[1].kind, ScenarioKind::RearEnd);
  EXPECT_FALSE(r[1].vb.has_value());
  EXPECT_TRUE(r[1].collided);
  EXPECT_EQ(r[2].choice, Choice::None);
  EXPECT_FALSE(r[2].rt.has_value());
}

TEST(TrialCsv, BadRowsListedWithLineNumbers) {
  std::istringstream in(std::string(kTrialCsvHeader) +
                        "\np1,cutin,25.82,brake,-1,,,,0"
                        "\np2,cutin,25.82,brake,1.0,,,,0"
                        "\np3,highway,25.82,brake,1.0,,,,0"
                        "\np4,cutin,25.82,swerve,1.0,,,,0\n");
  try {
    read_trials(in, "data.csv");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("3 malformed"), std::string::npos) << msg;
    EXPECT_NE(msg.find("data.csv:2:"), std::string::npos) << msg;
    EXPECT_EQ(msg.find("data.csv:3:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("data.csv:4:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("data.csv:5:"), std::string::npos) << msg;
  }
}

TEST(TrialCsv, HeaderMustMatch) {
  std::istringstream wrong("id,scenario,v0A_mps,choice,rt_s,vb_mps,ax_mps2,ay_mps2,collided\n");
  EXPECT_THROW(read_trials(wrong), ValidationError);
  std::istringstream empty("");
  EXPECT_THROW(read_trials(empty), ValidationError);
  std::istringstream short_row(std::string(kTrialCsvHeader) + "\np1,cutin,25\n");
  EXPECT_THROW(read_trials(short_row), ValidationError);
  std::istringstream none_with_rt(std::string(kTrialCsvHeader) + "\np1,cutin,25,none,1.0,,,,0\n");
  EXPECT_THROW(read_trials(none_with_rt), ValidationError);
}

TEST(TrialCsv, SyntheticRoundTrip) {
  SynthesisOptions so;
  so.behavior = mgd_from_json(read_json_file(testdata::fixtures() / "behavior.json"));
  for (ScenarioKind kind : kAllScenarios) {
    const auto trials = synthesize_trials(testdata::fixture(kind), kind, default_speed_groups(kind), 25, 3, so);
    std::ostringstream out;
    write_trials(out, trials);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), kTrialCsvHeader);
    std::istringstream in(out.str());
    EXPECT_EQ(read_trials(in), trials);
  }
  const auto dir = scratch_dir("csv");
  const auto trials = synthesize_trials(testdata::fixture(ScenarioKind::CutIn), ScenarioKind::CutIn, {29.39}, 10, 1);
  save_trials(dir / "t.csv", trials);
  EXPECT_EQ(load_trials(dir / "t.csv"), trials);
  EXPECT_THROW(load_trials(dir / "missing.csv"), ValidationError);
}

TEST(Synthesize, DeterministicAndWorkerInvariant) {
  const auto p = testdata::fixture(ScenarioKind::RearEnd);
  const auto groups = default_speed_groups(ScenarioKind::RearEnd);
  SynthesisOptions so;
  const auto a = synthesize_trials(p, ScenarioKind::RearEnd, groups, 60, 77, so);
  so.workers = 4;
  const auto b = synthesize_trials(p, ScenarioKind::RearEnd, groups, 60, 77, so);
  EXPECT_EQ(a, b);
  EXPECT_EQ(decision_accuracy(a, b), 100.0);
  const auto c = synthesize_trials(p, ScenarioKind::RearEnd, groups, 60, 78, so);
  EXPECT_NE(a, c);
}

TEST(Synthesize, SharesStreamsWithChoiceProbabilities) {
  const auto p = testdata::fixture(ScenarioKind::CutIn);
  const std::vector<double> groups{25.82, 33.85};
  const auto trials = synthesize_trials(p, ScenarioKind::CutIn, groups, 200, 5);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto s = choice_probabilities(make_scenario(ScenarioKind::CutIn, groups[g]), p, 0.0, 200,
                                        derive_seed(5, g));
    std::size_t brakes = 0;
    for (std::size_t i = 0; i < 200; ++i) {
      const auto& t = trials[g * 200 + i];
      EXPECT_EQ(t.v0A, groups[g]);
      brakes += t.choice == Choice::Brake;
    }
    EXPECT_DOUBLE_EQ(s.p_brake, brakes / 200.0);
  }
}

TEST(Synthesize, RecordContents) {
  const auto p = testdata::fixture(ScenarioKind::LaneChange);
  SynthesisOptions so;
  so.id_prefix = "lc";
  so.behavior = mgd_from_json(read_json_file(testdata::fixtures() / "behavior.json"));
  const auto trials = synthesize_trials(p, ScenarioKind::LaneChange, {20.71, 27.46}, 30, 2, so);
  ASSERT_EQ(trials.size(), 60u);
  EXPECT_EQ(trials[0].participant_id, "lc-g0-0000");
  EXPECT_EQ(trials[59].participant_id, "lc-g1-0029");
  for (const auto& t : trials) {
    EXPECT_NO_THROW(validate(t));
    EXPECT_EQ(t.vb.has_value(), t.choice == Choice::Brake);
    EXPECT_EQ(t.ax.has_value(), t.choice != Choice::None);
  }
  EXPECT_THROW(synthesize_trials(p, ScenarioKind::LaneChange, {20.71}, 0, 2), ValidationError);
  EXPECT_THROW(synthesize_trials(p, ScenarioKind::CutIn, {20.71}, 5, 2), ValidationError);
}

TEST(RtCurve, SinglePointStep) {
  const auto c = cumulative_rt_curve({record(Choice::Brake, 1.0)}, Choice::Brake);
  ASSERT_EQ(c.size(), 1u);
  const auto v = curve_at(c, {0.0, 0.999, 1.0, 5.0});
  EXPECT_EQ(v, (std::vector<double>{0.0, 0.0, 1.0, 1.0}));
}

TEST(RtCurve, CensoredTrialsInDenominator) {
  const std::vector<TrialRecord> r{record(Choice::Brake, 1.0), record(Choice::Brake, 2.0),
                                   record(Choice::Steer, 1.5), record(Choice::None, std::nullopt)};
  const auto b = cumulative_rt_curve(r, Choice::Brake);
  EXPECT_EQ(curve_at(b, {10.0})[0], 0.5);
  const auto s = cumulative_rt_curve(r, Choice::Steer);
  EXPECT_EQ(curve_at(s, {1.4, 1.5})[1], 0.25);
  EXPECT_TRUE(cumulative_rt_curve(r, Choice::None).empty());
  EXPECT_THROW(cumulative_rt_curve({}, Choice::Brake), ValidationError);
}

TEST(RtCurve, MonotoneAndBounded) {
  const auto p = testdata::fixture(ScenarioKind::RearEnd);
  const auto trials = synthesize_trials(p, ScenarioKind::RearEnd, {22.1}, 500, 4);
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(i * 0.05);
  double total = 0.0;
  for (Choice c : {Choice::Brake, Choice::Steer}) {
    const auto v = curve_at(cumulative_rt_curve(trials, c), grid);
    for (std::size_t i = 1; i < v.size(); ++i) EXPECT_GE(v[i], v[i - 1]);
    EXPECT_LE(v.back(), 1.0);
    total += v.back();
  }
  EXPECT_LE(total, 1.0 + 1e-12);
}

TEST(RtCurve, RearEndBrakeCurveShiftsLeftWithSpeed) {
  const auto p = testdata::fixture(ScenarioKind::RearEnd);
  auto median_rt = [&](double v, Choice c) {
    const auto trials = synthesize_trials(p, ScenarioKind::RearEnd, {v}, 4000, 12);
    std::vector<double> rts;
    for (const auto& t : trials) {
      if (t.choice == c) rts.push_back(*t.rt);
    }
    return quantile(rts, 0.5);
  };
  EXPECT_LT(median_rt(25.80, Choice::Brake), median_rt(19.56, Choice::Brake));
  EXPECT_LT(median_rt(25.80, Choice::Steer), median_rt(19.56, Choice::Steer));
}

TEST(Accuracy, Examples) {
  const std::vector<Choice> a{Choice::Brake, Choice::Steer, Choice::None, Choice::Brake};
  EXPECT_EQ(decision_accuracy(a, a), 100.0);
  const std::vector<Choice> flipped{Choice::Steer, Choice::Brake, Choice::Brake, Choice::Steer};
  EXPECT_EQ(decision_accuracy(flipped, a), 0.0);
  // a None prediction never matches a decision
  EXPECT_EQ(decision_accuracy(std::vector<Choice>{Choice::None, Choice::Steer},
                              std::vector<Choice>{Choice::Brake, Choice::Steer}),
            50.0);
  EXPECT_THROW(decision_accuracy(a, std::vector<Choice>{Choice::Brake}),
               ValidationError);
  EXPECT_THROW(decision_accuracy(std::vector<Choice>{}, std::vector<Choice>{}), ValidationError);
}

TEST(CollisionRate, Examples) {
  EXPECT_EQ(collision_rate(std::vector<bool>(10, false)), 0.0);
  EXPECT_EQ(collision_rate(std::vector<bool>{true, false, false, false}), 25.0);
  EXPECT_EQ(collision_rate({record(Choice::Brake, 1.0, 25.0, true)}), 100.0);
  EXPECT_THROW(collision_rate(std::vector<bool>{}), ValidationError);
}

TEST(Rollout, ImmediateBrakeIsSafe) {
  for (double v : default_speed_groups(ScenarioKind::RearEnd)) {
    const auto tl = make_scenario(ScenarioKind::RearEnd, v);
    const auto rolled = rollout_with_decision(tl, {Choice::Brake, 1e-9, 0.0, {}});
    EXPECT_FALSE(detect_collision(rolled).collided) << v;
    EXPECT_EQ(rolled.frames.back()[VehicleId::A].v, 0.0);
  }
}

TEST(Rollout, NoResponseInRearEndCollides) {
  const auto tl = make_scenario(ScenarioKind::RearEnd, 22.22);
  const auto rolled = rollout_with_decision(tl, {Choice::None, std::nullopt, 0.0, {}});
  const auto c = detect_collision(rolled);
  EXPECT_TRUE(c.collided);
  EXPECT_EQ(c.with, VehicleId::C);
  for (const auto& f : rolled.frames) EXPECT_EQ(f[VehicleId::A].v, 22.22);
}

TEST(Rollout, EarlySteerClearsTheStoppingLead) {
  // C stops 42 m ahead; the ego reaches it after roughly 3 s, well after a
  // 2 s lane change started at 0.2 s has finished
  const auto tl = make_scenario(ScenarioKind::RearEnd, 19.56);
  const auto rolled = rollout_with_decision(tl, {Choice::Steer, 0.2, 0.0, {}});
  EXPECT_FALSE(detect_collision(rolled).collided);
  EXPECT_EQ(rolled.frames.back()[VehicleId::A].lane, 1);
  EXPECT_NEAR(rolled.frames.back()[VehicleId::A].y, tl.config.lane_width, 1e-12);
}

TEST(Rollout, LaterBrakingNeverHelps) {
  for (ScenarioKind kind : kAllScenarios) {
    for (double v : default_speed_groups(kind)) {
      const auto tl = make_scenario(kind, v);
      bool collided_before = false;
      for (double rt = 0.05; rt < 6.0; rt += 0.05) {
        const bool c = detect_collision(rollout_with_decision(tl, {Choice::Brake, rt, 0.0, {}})).collided;
        if (collided_before) { EXPECT_TRUE(c) << to_string(kind) << ' ' << v << ' ' << rt; }
        collided_before = collided_before || c;
      }
    }
  }
}

TEST(Rollout, ControlValidation) {
  const auto tl = make_scenario(ScenarioKind::CutIn, 29.39);
  ControlConfig bad;
  bad.brake_decel = 2.0;
  EXPECT_THROW(rollout_with_decision(tl, {Choice::Brake, 1.0, 0.0, {}}, bad), ValidationError);
  auto cfg = ScenarioConfig::defaults_for(ScenarioKind::CutIn);
  cfg.target_lane = std::nullopt;
  const auto no_lane = make_scenario(ScenarioKind::CutIn, 29.39, cfg);
  EXPECT_THROW(rollout_with_decision(no_lane, {Choice::Steer, 1.0, 0.0, {}}), ValidationError);
}

namespace {

ExperimentConfig small_config(std::size_t workers) {
  auto j = nlohmann::json::parse(R"({
    "scenarios": ["cutin", "rearend"],
    "models": ["DDM", "IDM", "Gipps", "MOBIL"],
    "n_per_group": 60,
    "seed": 5,
    "speed_groups": {"cutin": [25.82, 33.85]},
    "rs_sweep": [-1, 0, 1],
    "risk_coupling": {"lambda": 0.5, "eta": 0.5, "rho": 0.5},
    "rt_curve": {"step": 0.5, "max": 5}
  })");
  j["workers"] = workers;
  j["fixtures"] = testdata::fixtures().string();
  j["baselines"] = (testdata::fixtures() / "baselines.json").string();
  j["behavior"] = (testdata::fixtures() / "behavior.json").string();
  return experiment_config_from_json(j);
}

}  // namespace

TEST(Experiment, ReportShapeAndInvariants) {
  const auto report = run_experiment(small_config(1));
  const auto& meta = report.at("metadata");
  EXPECT_EQ(meta.at("seed"), 5);
  EXPECT_EQ(meta.at("version"), kVersion);
  EXPECT_EQ(meta.at("config_hash").get<std::string>().size(), 16u);
  EXPECT_TRUE(meta.at("fixtures").contains("cutin.json"));
  EXPECT_TRUE(meta.at("fixtures").contains("baselines.json"));
  EXPECT_TRUE(meta.at("fixtures").contains("behavior.json"));

  // 2 cut-in + 4 rear-end groups, four models each
  EXPECT_EQ(report.at("conditions").size(), 6u * 4u);
  for (const auto& c : report.at("conditions")) {
    const auto& s = c.at("shares");
    EXPECT_NEAR(s.at("brake").get<double>() + s.at("steer").get<double>() + s.at("none").get<double>(),
                1.0, 1e-12);
  }
  for (const auto& a : report.at("accuracy")) {
    EXPECT_GE(a.at("accuracy").get<double>(), 0.0);
    EXPECT_LE(a.at("accuracy").get<double>(), 100.0);
  }
  for (const auto& c : report.at("collisions")) {
    EXPECT_GE(c.at("collision_rate").get<double>(), 0.0);
    EXPECT_LE(c.at("collision_rate").get<double>(), 100.0);
  }
  EXPECT_EQ(report.at("rs_sweep").size(), 6u * 3u);
  EXPECT_EQ(report.at("rt_curves").size(), 6u * 2u);
}

TEST(Experiment, WorkerCountDoesNotChangeTheReport) {
  EXPECT_EQ(run_experiment(small_config(1)).dump(), run_experiment(small_config(3)).dump());
}

TEST(Experiment, HashIgnoresWorkersOnly) {
  const auto a = small_config(1), b = small_config(4);
  EXPECT_EQ(config_hash(a.source), config_hash(b.source));
  auto j = a.source;
  j["seed"] = 6;
  EXPECT_NE(config_hash(j), config_hash(a.source));
}

TEST(Experiment, ObservedTrialsFromFile) {
  const auto dir = scratch_dir("observed");
  const auto p = testdata::fixture(ScenarioKind::CutIn);
  const auto trials = synthesize_trials(p, ScenarioKind::CutIn, {25.82, 33.85}, 40, 9);
  save_trials(dir / "obs.csv", trials);
  auto j = small_config(1).source;
  j["scenarios"] = {"cutin"};
  j["trials"] = "obs.csv";
  j.erase("fixtures");
  j["fixtures"] = testdata::fixtures().string();
  const auto cfg = experiment_config_from_json(j, dir);
  const auto report = run_experiment(cfg);
  EXPECT_EQ(report.at("metadata").at("observed"), "trials");
  bool pooled = false;
  for (const auto& a : report.at("accuracy")) {
    if (a.at("v0A").is_null() && a.at("model") == "DDM") {
      pooled = true;
      EXPECT_EQ(a.at("n"), 80);
    }
  }
  EXPECT_TRUE(pooled);
}

TEST(Experiment, Tables) {
  const auto dir = scratch_dir("tables");
  const auto written = write_report_tables(run_experiment(small_config(1)), dir);
  std::vector<std::string> names;
  for (const auto& w : written) names.push_back(w.filename().string());
  for (const char* n : {"shares.csv", "rt_quantiles.csv", "rt_curves.csv", "accuracy.csv",
                        "collisions.csv", "rs_sweep.csv"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), n), names.end()) << n;
  }
  std::ifstream in(dir / "shares.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "scenario,v0A_mps,model,n,p_brake,p_steer,p_none,mean_rt_s");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 24u);
}

TEST(Experiment, ConfigErrors) {
  auto parse = [](const char* text) {
    return experiment_config_from_json(nlohmann::json::parse(text));
  };
  EXPECT_THROW(parse(R"({"scenarios": ["highway"]})"), ValidationError);
  EXPECT_THROW(parse(R"({"scenarios": ["cutin"], "models": ["ACC"]})"), ValidationError);
  EXPECT_THROW(parse(R"({"scenarios": ["cutin"], "n_per_group": 0})"), ValidationError);
  EXPECT_THROW(parse(R"({"scenarios": []})"), ValidationError);
  EXPECT_THROW(parse(R"({"scenarios": ["cutin"], "rs_sweep": [2]})"), ValidationError);
  EXPECT_THROW(parse(R"({"scenarios": ["cutin"], "seed": "x"})"), ValidationError);
  auto missing = small_config(1);
  missing.fixtures = "/nonexistent";
  try {
    run_experiment(missing);
    FAIL() << "expected an error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("cutin"), std::string::npos) << e.what();
  }
}
