#pragma once

// Speed-group protocol, post-decision ego control, synthetic trials, and the
// comparison metrics (choice shares, RT curves, accuracy, collision rate).

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ddmdrive/ddm.hpp"
#include "ddmdrive/error.hpp"
#include "ddmdrive/kinematics.hpp"
#include "ddmdrive/parallel.hpp"
#include "ddmdrive/random.hpp"
#include "ddmdrive/risk.hpp"
#include "ddmdrive/trial.hpp"

namespace ddmdrive {

/// Median initial ego speeds of the four speed groups observed per scenario.
inline std::vector<double> default_speed_groups(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::CutIn: return {25.82, 29.39, 31.69, 33.85};
    case ScenarioKind::RearEnd: return {19.56, 22.10, 23.32, 25.80};
    case ScenarioKind::LaneChange: return {20.71, 23.27, 24.62, 27.46};
  }
  return {};
}

// ---- post-decision control ------------------------------------------------------------

struct ControlConfig {
  double brake_decel = -8.0;
  double lane_change_duration = 2.0;
  /// Lane to steer into; the scenario's own target lane when absent.
  std::optional<int> target_lane;

  void validate() const {
    detail::require(brake_decel < 0.0, "control: brake_decel must be negative");
    detail::require(lane_change_duration > 0.0, "control: lane_change_duration must be positive");
  }
};

/// Replaces the ego trajectory: hold the initial speed until rt, then brake
/// at a constant rate to a standstill, or change lanes at a constant
/// lateral rate while holding speed. None holds speed throughout.
inline ScenarioTimeline rollout_with_decision(const ScenarioTimeline& timeline,
                                              const DecisionOutcome& outcome,
                                              const ControlConfig& control = {}) {
  control.validate();
  detail::require(!timeline.frames.empty(), "rollout: empty timeline");
  ScenarioTimeline out = timeline;
  const VehicleState start = timeline.frames.front()[VehicleId::A];
  const double v0 = start.v;
  const double W = timeline.config.lane_width;
  const auto lane = control.target_lane ? control.target_lane : timeline.config.target_lane;
  const double rt = outcome.rt.value_or(0.0);
  const bool acts = outcome.choice != Choice::None && outcome.rt.has_value();
  if (acts && outcome.choice == Choice::Steer) {
    detail::require(lane.has_value(), "rollout: steering needs a target lane");
  }
  const double decel = -control.brake_decel;
  const double t_stop = v0 / decel;

  for (std::size_t k = 0; k < out.frames.size(); ++k) {
    const double t = out.time_of(k);
    VehicleState ego = start;
    ego.s = start.s + v0 * t;
    if (acts && t > rt) {
      const double u = t - rt;
      if (outcome.choice == Choice::Brake) {
        const double ub = std::min(u, t_stop);
        ego.s = start.s + v0 * rt + v0 * ub - 0.5 * decel * ub * ub;
        ego.v = std::max(0.0, v0 - decel * u);
        ego.a = u < t_stop ? control.brake_decel : 0.0;
      } else {
        ego.y = detail::lane_change_y(start.y, double(*lane) * W, rt,
                                      control.lane_change_duration, t);
      }
    }
    ego.lane = detail::lane_of(ego.y, W);
    out.frames[k][VehicleId::A] = ego;
  }
  return out;
}

// ---- synthetic trials -------------------------------------------------------------

struct SynthesisOptions {
  double risk = 0.0;
  std::optional<ScenarioConfig> scenario;  ///< defaults for the kind when absent
  ControlConfig control{};
  /// Population model for (ax, ay); when present every decided trial gets
  /// features drawn from it, otherwise only the braking speed is recorded.
  std::optional<MgdModel> behavior;
  std::string id_prefix = "syn";
  SimulationOptions simulation{};
  std::size_t workers = 1;
};

namespace detail {

inline std::string participant_label(const std::string& prefix, std::size_t group, std::size_t i) {
  std::string idx = std::to_string(i);
  if (idx.size() < 4) idx.insert(0, 4 - idx.size(), '0');
  return prefix + "-g" + std::to_string(group) + "-" + idx;
}

}  // namespace detail

/// Trial i of group g draws its decision from stream
/// derive_seed(derive_seed(master_seed, g), i), the same streams
/// choice_probabilities uses, and its behaviour features from a sibling
/// stream. Output is ordered by group, then trial.
inline std::vector<TrialRecord> synthesize_trials(const DdmParams& p, ScenarioKind kind,
                                                  const std::vector<double>& speed_groups,
                                                  std::size_t n_per_group,
                                                  std::uint64_t master_seed,
                                                  const SynthesisOptions& opt = {}) {
  detail::require(n_per_group >= 1, "synthesize_trials: n_per_group must be at least 1");
  detail::require(p.kind == kind, "synthesize_trials: parameters belong to another scenario");
  const ScenarioConfig cfg = opt.scenario.value_or(ScenarioConfig::defaults_for(kind));

  std::optional<Eigen::MatrixXd> chol;
  if (opt.behavior) {
    const auto& b = *opt.behavior;
    detail::require(b.mu.size() == 2, "synthesize_trials: behaviour model must cover (ax, ay)");
    chol = Eigen::MatrixXd(detail::checked_cholesky(b.sigma).matrixL());
  }

  std::vector<TrialRecord> out(speed_groups.size() * n_per_group);
  for (std::size_t g = 0; g < speed_groups.size(); ++g) {
    const ScenarioTimeline tl = make_scenario(kind, speed_groups[g], cfg);
    const DdmEvaluator model(tl, p, opt.risk);
    const std::uint64_t group_seed = derive_seed(master_seed, g);
    const std::uint64_t feature_seed = derive_seed(group_seed, 0xfea7u);
    parallel_for(n_per_group, opt.workers, [&](std::size_t i) {
      Rng rng = make_rng(group_seed, i);
      const DecisionOutcome o = simulate_trial(model, rng, opt.simulation);
      TrialRecord r;
      r.participant_id = detail::participant_label(opt.id_prefix, g, i);
      r.kind = kind;
      r.v0A = speed_groups[g];
      r.choice = o.choice;
      r.rt = o.rt;
      if (o.choice == Choice::Brake) r.vb = speed_groups[g];
      if (chol && o.choice != Choice::None) {
        Rng frng = make_rng(feature_seed, i);
        Eigen::Vector2d z(standard_normal(frng), standard_normal(frng));
        const Eigen::VectorXd x = opt.behavior->mu + *chol * z;
        r.ax = std::max(0.0, x(0));
        r.ay = std::max(0.0, x(1));
      }
      const auto rolled = rollout_with_decision(tl, o, opt.control);
      r.collided = detect_collision(rolled).collided;
      out[g * n_per_group + i] = std::move(r);
    });
  }
  return out;
}

// ---- metrics -------------------------------------------------------------------------

struct CurvePoint {
  double t;
  double p;
};

/// Empirical CDF of rt over trials that chose `choice`; every record
/// (including other choices and censored trials) counts in the denominator.
/// One point per distinct rt.
inline std::vector<CurvePoint> cumulative_rt_curve(const std::vector<TrialRecord>& records,
                                                   Choice choice) {
  detail::require(!records.empty(), "cumulative_rt_curve: no records");
  std::vector<double> rts;
  for (const auto& r : records) {
    if (r.choice == choice && r.rt) rts.push_back(*r.rt);
  }
  std::sort(rts.begin(), rts.end());
  const double n = double(records.size());
  std::vector<CurvePoint> curve;
  for (std::size_t i = 0; i < rts.size(); ++i) {
    if (i + 1 < rts.size() && rts[i + 1] == rts[i]) continue;
    curve.push_back({rts[i], double(i + 1) / n});
  }
  return curve;
}

/// The curve evaluated on a grid of times (right-continuous step function).
inline std::vector<double> curve_at(const std::vector<CurvePoint>& curve,
                                    const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    auto it = std::upper_bound(curve.begin(), curve.end(), t,
                               [](double x, const CurvePoint& c) { return x < c.t; });
    out.push_back(it == curve.begin() ? 0.0 : std::prev(it)->p);
  }
  return out;
}

/// Percentage of pairs with matching choices. A None on either side counts
/// as a mismatch unless both are None.
inline double decision_accuracy(const std::vector<Choice>& predicted,
                                const std::vector<Choice>& observed) {
  detail::require(predicted.size() == observed.size(),
                  "decision_accuracy: " + std::to_string(predicted.size()) + " predictions for " +
                      std::to_string(observed.size()) + " observations");
  detail::require(!observed.empty(), "decision_accuracy: no observations");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) hits += predicted[i] == observed[i];
  return 100.0 * double(hits) / double(observed.size());
}

inline double decision_accuracy(const std::vector<TrialRecord>& predicted,
                                const std::vector<TrialRecord>& observed) {
  auto choices = [](const std::vector<TrialRecord>& v) {
    std::vector<Choice> c;
    c.reserve(v.size());
    for (const auto& r : v) c.push_back(r.choice);
    return c;
  };
  return decision_accuracy(choices(predicted), choices(observed));
}

inline double collision_rate(const std::vector<bool>& collided) {
  detail::require(!collided.empty(), "collision_rate: no runs");
  const auto hits = std::count(collided.begin(), collided.end(), true);
  return 100.0 * double(hits) / double(collided.size());
}

inline double collision_rate(const std::vector<TrialRecord>& trials) {
  std::vector<bool> flags;
  flags.reserve(trials.size());
  for (const auto& t : trials) flags.push_back(t.collided);
  return collision_rate(flags);
}

/// Trace export: one row per recorded evidence sample.
inline void write_traces_csv(std::ostream& out, const std::vector<DecisionOutcome>& outcomes) {
  out << "trial,t_s,evidence,bound\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    for (const auto& p : outcomes[i].trace) {
      out << i << ',' << format_double(p.t) << ',' << format_double(p.x) << ','
          << format_double(p.bound) << '\n';
    }
  }
}

}  // namespace ddmdrive
