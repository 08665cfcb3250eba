#pragma once

// Non-cognitive comparison models: IDM and Gipps car following, MOBIL lane
// changing, and closed-loop rollouts that turn them into decisions.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ddmdrive/ddm.hpp"
#include "ddmdrive/error.hpp"
#include "ddmdrive/kinematics.hpp"

namespace ddmdrive {

struct IdmParams {
  std::optional<double> v0;  ///< desired speed; the ego's initial speed when absent
  double T = 1.5;
  double s0 = 2.0;
  double a = 1.4;
  double b = 2.0;
  double delta = 4.0;
  double max_decel = 9.0;  ///< returned (negated) when the gap is already closed

  void validate() const {
    auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };
    detail::require(!v0 || pos(*v0), "IDM: v0 must be positive");
    detail::require(pos(T) && pos(s0) && pos(a) && pos(b) && pos(delta) && pos(max_decel),
                    "IDM: parameters must be positive");
  }
};

struct GippsParams {
  std::optional<double> desired_speed;  ///< the ego's initial speed when absent
  double a_max = 1.7;
  double b_max = -6.0;  ///< most severe braking the driver will apply (negative)
  double b_hat = -8.0;  ///< driver's estimate of the leader's braking (negative)
  double tau = 0.67;
  double s0 = 2.0;

  void validate() const {
    detail::require(!desired_speed || *desired_speed > 0.0, "Gipps: desired speed must be positive");
    detail::require(a_max > 0.0, "Gipps: a_max must be positive");
    detail::require(b_max < 0.0 && b_hat < 0.0, "Gipps: braking values must be negative");
    detail::require(tau > 0.0, "Gipps: tau must be positive");
    detail::require(s0 >= 0.0, "Gipps: s0 must be non-negative");
  }
};

struct MobilParams {
  double politeness = 0.5;
  double threshold = 0.1;  ///< changing threshold (m/s^2)
  double b_safe = 4.0;

  void validate() const {
    detail::require(politeness >= 0.0 && politeness <= 1.0, "MOBIL: politeness must be in [0, 1]");
    detail::require(b_safe > 0.0, "MOBIL: b_safe must be positive");
    detail::require(std::isfinite(threshold), "MOBIL: threshold must be finite");
  }
};

/// A vehicle ahead as seen by a follower: its state and bumper gap.
struct Leader {
  VehicleState state;
  double gap = 0.0;
};

/// IDM acceleration a[1 - (v/v0)^delta - (s*/s)^2] with
/// s* = s0 + vT + v dv / (2 sqrt(ab)), dv the approach rate.
inline double idm_accel(const VehicleState& ego, const std::optional<Leader>& lead,
                        const IdmParams& p) {
  detail::require(p.v0.has_value(), "IDM: desired speed not set");
  const double free = 1.0 - std::pow(ego.v / *p.v0, p.delta);
  if (!lead) return p.a * free;
  if (!(lead->gap > 0.0)) return -p.max_decel;
  const double dv = ego.v - lead->state.v;
  const double s_star = p.s0 + ego.v * p.T + ego.v * dv / (2.0 * std::sqrt(p.a * p.b));
  const double ratio = s_star / lead->gap;
  return p.a * (free - ratio * ratio);
}

/// One Gipps update: the speed to hold over the next tau, the minimum of
/// the free-acceleration and safe-braking branches (never negative).
inline double gipps_acceleration_branch(const VehicleState& ego, const GippsParams& p) {
  detail::require(p.desired_speed.has_value(), "Gipps: desired speed not set");
  const double V = *p.desired_speed;
  const double r = std::max(0.0, 1.0 - ego.v / V);
  return ego.v + 2.5 * p.a_max * p.tau * r * std::sqrt(0.025 + ego.v / V);
}

inline std::optional<double> gipps_safe_branch(const VehicleState& ego,
                                               const std::optional<Leader>& lead,
                                               const GippsParams& p) {
  if (!lead) return std::nullopt;
  const double b = p.b_max;
  const double tau = p.tau;
  const double arg = b * b * tau * tau -
                     b * (2.0 * (lead->gap - p.s0) - ego.v * tau -
                          lead->state.v * lead->state.v / p.b_hat);
  if (arg <= 0.0) return 0.0;
  return std::max(0.0, b * tau + std::sqrt(arg));
}

inline double gipps_speed(const VehicleState& ego, const std::optional<Leader>& lead,
                          const GippsParams& p, double dt) {
  detail::require(dt > 0.0, "Gipps: dt must be positive");
  const double v_acc = gipps_acceleration_branch(ego, p);
  const auto v_safe = gipps_safe_branch(ego, lead, p);
  return std::max(0.0, v_safe ? std::min(v_acc, *v_safe) : v_acc);
}

/// Surroundings of a lane-change candidate.
struct MobilNeighbors {
  std::optional<Leader> current_lead;     ///< ahead of the ego now
  std::optional<Leader> target_lead;      ///< ahead of the ego after the change
  std::optional<VehicleState> old_follower;  ///< behind the ego now
  std::optional<Leader> old_follower_lead_after;  ///< its leader once the ego leaves
  std::optional<VehicleState> new_follower;  ///< behind the ego after the change
  std::optional<Leader> new_follower_lead_before;  ///< its leader before the change
  double ego_gap_to_new_follower = 0.0;  ///< bumper gap, new follower -> ego
  double ego_gap_to_old_follower = 0.0;  ///< bumper gap, old follower -> ego
};

/// MOBIL with safety veto and politeness. `accel(follower, lead)` supplies
/// the car-following acceleration for every vehicle involved.
template <typename AccelFn>
  requires std::invocable<AccelFn&, const VehicleState&, const std::optional<Leader>&>
bool mobil_decide(const VehicleState& ego, const MobilNeighbors& n, AccelFn&& accel,
                  const MobilParams& p) {
  const double a_c = accel(ego, n.current_lead);
  const double a_c_new = accel(ego, n.target_lead);

  double new_follower_gain = 0.0;
  if (n.new_follower) {
    const Leader ego_as_lead{ego, n.ego_gap_to_new_follower};
    const double a_n_new = accel(*n.new_follower, std::optional<Leader>(ego_as_lead));
    if (a_n_new < -p.b_safe) return false;
    new_follower_gain = a_n_new - accel(*n.new_follower, n.new_follower_lead_before);
  }
  double old_follower_gain = 0.0;
  if (n.old_follower) {
    const Leader ego_as_lead{ego, n.ego_gap_to_old_follower};
    old_follower_gain = accel(*n.old_follower, n.old_follower_lead_after) -
                        accel(*n.old_follower, std::optional<Leader>(ego_as_lead));
  }
  const double incentive = a_c_new - a_c + p.politeness * (new_follower_gain + old_follower_gain);
  return incentive > p.threshold;
}

inline bool mobil_decide(const VehicleState& ego, const MobilNeighbors& n, const IdmParams& idm,
                         const MobilParams& p) {
  auto accel = [&](const VehicleState& v, const std::optional<Leader>& lead) {
    IdmParams q = idm;
    if (!q.v0) q.v0 = std::max(v.v, 1.0);
    return idm_accel(v, lead, q);
  };
  return mobil_decide(ego, n, accel, p);
}

// ---- closed-loop rollouts ----------------------------------------------------------

enum class BaselineModel { Idm, Gipps, Mobil };

inline std::string_view to_string(BaselineModel m) {
  switch (m) {
    case BaselineModel::Idm: return "IDM";
    case BaselineModel::Gipps: return "Gipps";
    case BaselineModel::Mobil: return "MOBIL";
  }
  return "?";
}

inline BaselineModel parse_baseline_model(std::string_view text) {
  if (text == "IDM" || text == "idm") return BaselineModel::Idm;
  if (text == "Gipps" || text == "gipps") return BaselineModel::Gipps;
  if (text == "MOBIL" || text == "mobil") return BaselineModel::Mobil;
  throw ValidationError("unknown baseline model '" + std::string(text) + "'");
}

struct BaselineParams {
  IdmParams idm;
  GippsParams gipps;
  MobilParams mobil;
  double brake_threshold = -0.5;  ///< commanded acceleration that counts as braking
  double max_decel = 8.0;         ///< physical braking limit of the ego (m/s^2)
  /// Lateral offset below which a vehicle ahead is treated as the leader,
  /// as a fraction of the lane width.
  double lead_lateral_fraction = 0.75;

  void validate() const {
    idm.validate();
    gipps.validate();
    mobil.validate();
    detail::require(brake_threshold < 0.0, "baselines: brake_threshold must be negative");
    detail::require(max_decel > 0.0, "baselines: max_decel must be positive");
    detail::require(lead_lateral_fraction > 0.0, "baselines: lead_lateral_fraction must be positive");
  }
};

struct BaselineOutcome {
  DecisionOutcome decision;
  ScenarioTimeline rollout;
  CollisionResult collision;
};

namespace detail {

/// Nearest vehicle ahead of `ego` within `lateral` of lateral position y.
inline std::optional<Leader> leader_near(const ScenarioTimeline& tl, const Frame& f,
                                         const VehicleState& ego, double y, double lateral) {
  std::optional<Leader> best;
  for (VehicleId id : {VehicleId::B, VehicleId::C, VehicleId::D}) {
    if (!tl.has(id)) continue;
    const VehicleState& o = f[id];
    if (o.s <= ego.s || std::abs(o.y - y) >= lateral) continue;
    const double g = gap(ego, o, tl.config.vehicle_length, tl.config.vehicle_length);
    if (!best || g < best->gap) best = Leader{o, g};
  }
  return best;
}

/// Nearest vehicle behind `ego` within `lateral` of lateral position y,
/// with its bumper gap to the ego.
inline std::optional<Leader> follower_near(const ScenarioTimeline& tl, const Frame& f,
                                           const VehicleState& ego, double y, double lateral) {
  std::optional<Leader> best;
  for (VehicleId id : {VehicleId::B, VehicleId::C, VehicleId::D}) {
    if (!tl.has(id)) continue;
    const VehicleState& o = f[id];
    if (o.s > ego.s || std::abs(o.y - y) >= lateral) continue;
    const double g = gap(o, ego, tl.config.vehicle_length, tl.config.vehicle_length);
    if (!best || g < best->gap) best = Leader{o, g};
  }
  return best;
}

inline MobilNeighbors mobil_neighbors(const ScenarioTimeline& tl, const Frame& f,
                                      const VehicleState& ego, double y_target, double lateral) {
  MobilNeighbors n;
  n.current_lead = leader_near(tl, f, ego, ego.y, lateral);
  n.target_lead = leader_near(tl, f, ego, y_target, lateral);
  if (auto old_f = follower_near(tl, f, ego, ego.y, lateral)) {
    n.old_follower = old_f->state;
    n.ego_gap_to_old_follower = old_f->gap;
    if (n.current_lead) {
      const double g = gap(old_f->state, n.current_lead->state, tl.config.vehicle_length,
                           tl.config.vehicle_length);
      n.old_follower_lead_after = Leader{n.current_lead->state, g};
    }
  }
  if (auto new_f = follower_near(tl, f, ego, y_target, lateral)) {
    n.new_follower = new_f->state;
    n.ego_gap_to_new_follower = new_f->gap;
    if (n.target_lead) {
      const double g = gap(new_f->state, n.target_lead->state, tl.config.vehicle_length,
                           tl.config.vehicle_length);
      n.new_follower_lead_before = Leader{n.target_lead->state, g};
    }
  }
  return n;
}

}  // namespace detail

/// Closed-loop rollout: the ego follows the chosen model every frame (Gipps
/// re-plans every tau). The decision is Brake at the first frame whose
/// commanded acceleration falls below the brake threshold, Steer at the
/// first frame MOBIL triggers a lane change; baselines decide instantly,
/// so rt is that frame's time.
inline BaselineOutcome run_baseline(const ScenarioTimeline& timeline, BaselineModel model,
                                    const BaselineParams& params) {
  params.validate();
  detail::require(!timeline.frames.empty(), "run_baseline: empty timeline");
  const auto& cfg = timeline.config;
  if (model == BaselineModel::Mobil && !cfg.target_lane) {
    throw ValidationError("MOBIL needs a target lane, none is defined for the " +
                          std::string(to_string(timeline.kind)) + " scenario");
  }
  IdmParams idm = params.idm;
  if (!idm.v0) idm.v0 = timeline.ego_v0;
  GippsParams gipps = params.gipps;
  if (!gipps.desired_speed) gipps.desired_speed = timeline.ego_v0;

  const double W = cfg.lane_width;
  const double lateral = params.lead_lateral_fraction * W;
  const double dt = timeline.dt;
  const auto gipps_every = std::max<std::size_t>(1, std::size_t(std::llround(gipps.tau / dt)));

  BaselineOutcome out;
  out.rollout = timeline;
  VehicleState ego = timeline.frames.front()[VehicleId::A];
  std::optional<double> steer_start;
  const double y_from = ego.y;
  const double y_to = cfg.target_lane ? double(*cfg.target_lane) * W : y_from;
  double commanded = 0.0;

  for (std::size_t k = 0; k < timeline.frames.size(); ++k) {
    const double t = timeline.time_of(k);
    const Frame& f = timeline.frames[k];
    if (steer_start) {
      ego.y = detail::lane_change_y(y_from, y_to, *steer_start, cfg.lane_change_duration, t);
      ego.lane = detail::lane_of(ego.y, W);
    }
    out.rollout.frames[k][VehicleId::A] = ego;
    if (k + 1 == timeline.frames.size()) break;

    const auto lead = detail::leader_near(timeline, f, ego, ego.y, lateral);
    switch (model) {
      case BaselineModel::Idm:
      case BaselineModel::Mobil:
        commanded = idm_accel(ego, lead, idm);
        break;
      case BaselineModel::Gipps:
        if (k % gipps_every == 0) {
          commanded = (gipps_speed(ego, lead, gipps, gipps.tau) - ego.v) / gipps.tau;
        }
        break;
    }
    commanded = std::clamp(commanded, -params.max_decel, params.max_decel);

    if (model == BaselineModel::Mobil && !steer_start) {
      const auto n = detail::mobil_neighbors(timeline, f, ego, y_to, lateral);
      if (mobil_decide(ego, n, idm, params.mobil)) {
        steer_start = t;
        if (out.decision.choice == Choice::None) {
          out.decision.choice = Choice::Steer;
          out.decision.rt = t;
        }
      }
    }
    if (out.decision.choice == Choice::None && commanded < params.brake_threshold) {
      out.decision.choice = Choice::Brake;
      out.decision.rt = t;
    }
    ego = step_vehicle(ego, commanded, dt);
  }
  out.collision = detect_collision(out.rollout);
  return out;
}

// ---- JSON -----------------------------------------------------------------------------

inline BaselineParams baseline_params_from_json(const nlohmann::json& j) {
  BaselineParams p;
  try {
    if (j.contains("idm")) {
      const auto& i = j.at("idm");
      if (i.contains("v0") && !i.at("v0").is_null()) p.idm.v0 = i.at("v0").get<double>();
      p.idm.T = i.value("T", p.idm.T);
      p.idm.s0 = i.value("s0", p.idm.s0);
      p.idm.a = i.value("a", p.idm.a);
      p.idm.b = i.value("b", p.idm.b);
      p.idm.delta = i.value("delta", p.idm.delta);
    }
    if (j.contains("gipps")) {
      const auto& g = j.at("gipps");
      if (g.contains("desired_speed") && !g.at("desired_speed").is_null()) {
        p.gipps.desired_speed = g.at("desired_speed").get<double>();
      }
      p.gipps.a_max = g.value("a_max", p.gipps.a_max);
      p.gipps.b_max = g.value("b_max", p.gipps.b_max);
      p.gipps.b_hat = g.value("b_hat", p.gipps.b_hat);
      p.gipps.tau = g.value("tau", p.gipps.tau);
      p.gipps.s0 = g.value("s0", p.gipps.s0);
    }
    if (j.contains("mobil")) {
      const auto& m = j.at("mobil");
      p.mobil.politeness = m.value("politeness", p.mobil.politeness);
      p.mobil.threshold = m.value("threshold", p.mobil.threshold);
      p.mobil.b_safe = m.value("b_safe", p.mobil.b_safe);
    }
    p.brake_threshold = j.value("brake_threshold", p.brake_threshold);
    p.max_decel = j.value("max_decel", p.max_decel);
    p.lead_lateral_fraction = j.value("lead_lateral_fraction", p.lead_lateral_fraction);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("baseline parameters: ") + e.what());
  }
  p.validate();
  return p;
}

inline nlohmann::json to_json(const BaselineParams& p) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"idm",
           {{"v0", opt(p.idm.v0)}, {"T", p.idm.T}, {"s0", p.idm.s0}, {"a", p.idm.a},
            {"b", p.idm.b}, {"delta", p.idm.delta}}},
          {"gipps",
           {{"desired_speed", opt(p.gipps.desired_speed)}, {"a_max", p.gipps.a_max},
            {"b_max", p.gipps.b_max}, {"b_hat", p.gipps.b_hat}, {"tau", p.gipps.tau},
            {"s0", p.gipps.s0}}},
          {"mobil",
           {{"politeness", p.mobil.politeness}, {"threshold", p.mobil.threshold},
            {"b_safe", p.mobil.b_safe}}},
          {"brake_threshold", p.brake_threshold},
          {"max_decel", p.max_decel},
          {"lead_lateral_fraction", p.lead_lateral_fraction}};
}

}  // namespace ddmdrive
