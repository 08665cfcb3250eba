#pragma once

// Deterministic vehicle trajectories for the three evasive-decision
// scenarios, plus the gap / headway / TTC / collision primitives used by the
// decision models and the experiment harness.
//
// Conventions: s is longitudinal position of the front bumper (m), y is the
// lateral position of the vehicle center (m) with lane n centered at
// y = n * lane_width. The ego vehicle A drives in lane 0; lane 1 is the lane
// to its left.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ddmdrive/error.hpp"

namespace ddmdrive {

enum class ScenarioKind { CutIn, RearEnd, LaneChange };

inline std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::CutIn: return "cutin";
    case ScenarioKind::RearEnd: return "rearend";
    case ScenarioKind::LaneChange: return "lanechange";
  }
  return "?";
}

inline ScenarioKind parse_scenario_kind(std::string_view text) {
  if (text == "cutin") return ScenarioKind::CutIn;
  if (text == "rearend") return ScenarioKind::RearEnd;
  if (text == "lanechange") return ScenarioKind::LaneChange;
  throw ValidationError("unknown scenario kind '" + std::string(text) +
                        "' (expected cutin, rearend or lanechange)");
}

inline constexpr std::array<ScenarioKind, 3> kAllScenarios{
    ScenarioKind::CutIn, ScenarioKind::RearEnd, ScenarioKind::LaneChange};

enum class VehicleId : std::size_t { A = 0, B = 1, C = 2, D = 3 };
inline constexpr std::size_t kMaxVehicles = 4;

inline constexpr std::size_t index_of(VehicleId id) { return static_cast<std::size_t>(id); }

/// Vehicles scripted by each scenario (A is always the ego vehicle).
inline bool vehicle_present(ScenarioKind kind, VehicleId id) {
  switch (id) {
    case VehicleId::A:
    case VehicleId::B: return true;
    case VehicleId::C: return kind != ScenarioKind::CutIn;
    case VehicleId::D: return kind == ScenarioKind::LaneChange;
  }
  return false;
}

struct VehicleState {
  double s = 0.0;  ///< front-bumper longitudinal position (m)
  double y = 0.0;  ///< lateral position (m)
  double v = 0.0;  ///< speed (m/s), never negative
  double a = 0.0;  ///< longitudinal acceleration (m/s^2)
  int lane = 0;

  bool operator==(const VehicleState&) const = default;
};

/// Constant-acceleration update over dt. Braking clamps at standstill; when
/// the vehicle stops inside the interval only the stopping sub-interval is
/// integrated and the returned acceleration is 0.
inline VehicleState step_vehicle(const VehicleState& state, double commanded_accel, double dt) {
  if (!std::isfinite(state.s) || !std::isfinite(state.v) || !std::isfinite(commanded_accel) ||
      !std::isfinite(dt)) {
    throw ValidationError("step_vehicle: non-finite input");
  }
  detail::require(dt > 0.0, "step_vehicle: dt must be positive");
  detail::require(state.v >= 0.0, "step_vehicle: negative speed");

  VehicleState next = state;
  const double v_end = state.v + commanded_accel * dt;
  if (v_end >= 0.0) {
    next.s = state.s + state.v * dt + 0.5 * commanded_accel * dt * dt;
    next.v = v_end;
    next.a = commanded_accel;
  } else {
    const double t_stop = state.v / -commanded_accel;
    next.s = state.s + state.v * t_stop + 0.5 * commanded_accel * t_stop * t_stop;
    next.v = 0.0;
    next.a = 0.0;
  }
  return next;
}

/// Front-bumper-to-rear-bumper distance from `rear` to `lead`; negative when
/// the bodies overlap longitudinally.
inline double gap(const VehicleState& rear, const VehicleState& lead, double rear_len,
                  double lead_len) {
  (void)rear_len;  // positions are front bumpers, so only the lead's length matters
  return lead.s - rear.s - lead_len;
}

inline double time_headway(double distance, double v0A) {
  if (!(v0A > 0.0)) throw DomainError("time_headway: ego speed must be positive");
  return distance / v0A;
}

/// Time to collision, or nullopt when the vehicles are not closing.
inline std::optional<double> ttc(const VehicleState& rear, const VehicleState& lead,
                                 double gap_m) {
  const double closing = rear.v - lead.v;
  if (!(closing > 0.0)) return std::nullopt;
  return gap_m / closing;
}

/// Geometry and timing of a scenario. Defaults come from `defaults_for`.
struct ScenarioConfig {
  double gap_ab = 20.0;  ///< initial bumper gap A->B (m)
  double gap_ac = 42.0;  ///< initial bumper gap A->C (m)
  double gap_ad = 45.0;  ///< initial bumper gap A->D (m)
  double speed_b = 33.33;
  double speed_c = 22.22;
  double lead_decel = -8.0;           ///< C's braking in the rear-end scenario (m/s^2)
  double lane_change_duration = 2.0;  ///< lateral maneuver time (s)
  double dt = 0.01;
  double horizon = 10.0;
  double vehicle_length = 5.0;
  double lane_width = 3.5;
  double min_ego_speed = 19.0;
  double max_ego_speed = 34.0;
  /// Headways divide by the initial ego speed when true, by the
  /// instantaneous ego speed otherwise.
  bool headway_uses_initial_speed = true;
  /// Lane the ego moves into when it steers (and MOBIL's candidate lane).
  std::optional<int> target_lane = 1;

  static ScenarioConfig defaults_for(ScenarioKind kind) {
    ScenarioConfig c;
    switch (kind) {
      case ScenarioKind::CutIn:
        c.gap_ab = 20.0;
        c.speed_b = 33.33;
        break;
      case ScenarioKind::RearEnd:
        c.gap_ab = 10.0;
        c.gap_ac = 42.0;
        c.speed_b = 22.22;
        c.speed_c = 22.22;
        break;
      case ScenarioKind::LaneChange:
        c.gap_ab = 5.0;
        c.gap_ac = 20.0;
        c.gap_ad = 45.0;
        c.speed_b = 22.22;
        c.speed_c = 22.22;
        break;
    }
    return c;
  }

  void validate() const {
    auto finite_positive = [](double x) { return std::isfinite(x) && x > 0.0; };
    detail::require(finite_positive(dt), "scenario: dt must be positive");
    detail::require(finite_positive(horizon) && horizon >= dt,
                    "scenario: horizon must be at least one timestep");
    detail::require(finite_positive(vehicle_length), "scenario: vehicle_length must be positive");
    detail::require(finite_positive(lane_width), "scenario: lane_width must be positive");
    detail::require(finite_positive(lane_change_duration),
                    "scenario: lane_change_duration must be positive");
    detail::require(std::isfinite(lead_decel) && lead_decel < 0.0,
                    "scenario: lead_decel must be negative");
    detail::require(std::isfinite(speed_b) && speed_b >= 0.0 && std::isfinite(speed_c) &&
                        speed_c >= 0.0,
                    "scenario: surrounding speeds must be non-negative");
    detail::require(std::isfinite(gap_ab) && std::isfinite(gap_ac) && std::isfinite(gap_ad),
                    "scenario: gaps must be finite");
    detail::require(min_ego_speed < max_ego_speed, "scenario: empty ego speed range");
  }
};

struct Frame {
  std::array<VehicleState, kMaxVehicles> vehicles{};

  const VehicleState& operator[](VehicleId id) const { return vehicles[index_of(id)]; }
  VehicleState& operator[](VehicleId id) { return vehicles[index_of(id)]; }
  bool operator==(const Frame&) const = default;
};

/// Uniformly sampled trajectories of every vehicle in one scenario
/// realization. Frame 0 is the disturbance onset.
struct ScenarioTimeline {
  ScenarioKind kind = ScenarioKind::CutIn;
  double dt = 0.01;
  double ego_v0 = 0.0;
  ScenarioConfig config{};
  std::vector<Frame> frames;

  double horizon() const { return frames.empty() ? 0.0 : dt * double(frames.size() - 1); }
  bool has(VehicleId id) const { return vehicle_present(kind, id); }
  double time_of(std::size_t frame) const { return dt * double(frame); }

  bool operator==(const ScenarioTimeline& other) const {
    return kind == other.kind && dt == other.dt && ego_v0 == other.ego_v0 &&
           frames == other.frames;
  }
};

namespace detail {

/// Closed-form state of a vehicle braking (or accelerating) from t = 0.
inline VehicleState constant_accel_state(double s0, double v0, double accel, double t, double y,
                                         int lane) {
  VehicleState st{s0, y, v0, accel, lane};
  if (accel < 0.0) {
    const double t_stop = v0 / -accel;
    if (t >= t_stop) {
      st.s = s0 + v0 * t_stop + 0.5 * accel * t_stop * t_stop;
      st.v = 0.0;
      st.a = 0.0;
      return st;
    }
  }
  st.s = s0 + v0 * t + 0.5 * accel * t * t;
  st.v = v0 + accel * t;
  return st;
}

/// Lateral position of a constant-rate lane change starting at t_start.
inline double lane_change_y(double y_from, double y_to, double t_start, double duration,
                            double t) {
  if (t <= t_start) return y_from;
  if (t >= t_start + duration) return y_to;
  return y_from + (y_to - y_from) * (t - t_start) / duration;
}

inline int lane_of(double y, double lane_width) {
  return static_cast<int>(std::lround(y / lane_width));
}

}  // namespace detail

/// Builds the open-loop timeline of a scenario. The ego vehicle holds its
/// initial speed in lane 0; the harness replaces its trajectory once a
/// decision is taken.
inline ScenarioTimeline make_scenario(ScenarioKind kind, double ego_v0,
                                      const ScenarioConfig& config) {
  config.validate();
  if (!std::isfinite(ego_v0) || ego_v0 <= 0.0) {
    throw ValidationError("make_scenario: ego speed must be positive");
  }
  if (ego_v0 < config.min_ego_speed || ego_v0 > config.max_ego_speed) {
    throw ValidationError("make_scenario: ego speed " + std::to_string(ego_v0) +
                          " m/s outside [" + std::to_string(config.min_ego_speed) + ", " +
                          std::to_string(config.max_ego_speed) + "]");
  }

  ScenarioTimeline tl;
  tl.kind = kind;
  tl.dt = config.dt;
  tl.ego_v0 = ego_v0;
  tl.config = config;

  const auto n_frames = static_cast<std::size_t>(std::llround(config.horizon / config.dt)) + 1;
  tl.frames.resize(n_frames);
  const double L = config.vehicle_length;
  const double W = config.lane_width;
  const double T = config.lane_change_duration;

  for (std::size_t k = 0; k < n_frames; ++k) {
    const double t = config.dt * double(k);
    Frame& f = tl.frames[k];
    f[VehicleId::A] = VehicleState{ego_v0 * t, 0.0, ego_v0, 0.0, 0};

    switch (kind) {
      case ScenarioKind::CutIn: {
        const double y = detail::lane_change_y(W, 0.0, 0.0, T, t);
        f[VehicleId::B] = VehicleState{L + config.gap_ab + config.speed_b * t, y, config.speed_b,
                                       0.0, detail::lane_of(y, W)};
        break;
      }
      case ScenarioKind::RearEnd: {
        f[VehicleId::B] =
            VehicleState{L + config.gap_ab + config.speed_b * t, W, config.speed_b, 0.0, 1};
        f[VehicleId::C] = detail::constant_accel_state(L + config.gap_ac, config.speed_c,
                                                       config.lead_decel, t, 0.0, 0);
        break;
      }
      case ScenarioKind::LaneChange: {
        f[VehicleId::B] =
            VehicleState{L + config.gap_ab + config.speed_b * t, W, config.speed_b, 0.0, 1};
        const double y = detail::lane_change_y(0.0, -W, 0.0, T, t);
        f[VehicleId::C] = VehicleState{L + config.gap_ac + config.speed_c * t, y,
                                       config.speed_c, 0.0, detail::lane_of(y, W)};
        f[VehicleId::D] = VehicleState{L + config.gap_ad, 0.0, 0.0, 0.0, 0};
        break;
      }
    }
  }
  return tl;
}

inline ScenarioTimeline make_scenario(ScenarioKind kind, double ego_v0) {
  return make_scenario(kind, ego_v0, ScenarioConfig::defaults_for(kind));
}

/// Distances and headways from the ego vehicle to every other vehicle of the
/// scenario at one instant. Absent vehicles leave their fields empty.
struct KinematicSnapshot {
  double v0A = 0.0;
  std::optional<double> sAB, sAC, sAD;
  std::optional<double> hAB, hAC, hAD;
};

/// Linearly interpolated state of vehicle `id` at time t.
inline VehicleState state_at(const ScenarioTimeline& tl, VehicleId id, double t) {
  const double horizon = tl.horizon();
  constexpr double kSlack = 1e-9;
  if (!(t >= -kSlack && t <= horizon + kSlack)) {
    throw ValidationError("time " + std::to_string(t) + " s outside timeline [0, " +
                          std::to_string(horizon) + "]");
  }
  t = std::clamp(t, 0.0, horizon);
  const double pos = t / tl.dt;
  auto k = static_cast<std::size_t>(pos);
  if (k >= tl.frames.size() - 1) return tl.frames.back()[id];
  const double w = pos - double(k);
  const VehicleState& p = tl.frames[k][id];
  const VehicleState& q = tl.frames[k + 1][id];
  VehicleState out = w < 0.5 ? p : q;
  out.s = p.s + w * (q.s - p.s);
  out.y = p.y + w * (q.y - p.y);
  out.v = p.v + w * (q.v - p.v);
  return out;
}

inline KinematicSnapshot snapshot(const ScenarioTimeline& tl, double t) {
  KinematicSnapshot snap;
  snap.v0A = tl.ego_v0;
  const VehicleState ego = state_at(tl, VehicleId::A, t);
  const double divisor = tl.config.headway_uses_initial_speed ? tl.ego_v0 : ego.v;
  const double L = tl.config.vehicle_length;

  auto fill = [&](VehicleId id, std::optional<double>& s, std::optional<double>& h) {
    if (!tl.has(id)) return;
    const double d = gap(ego, state_at(tl, id, t), L, L);
    s = d;
    h = time_headway(d, divisor);
  };
  fill(VehicleId::B, snap.sAB, snap.hAB);
  fill(VehicleId::C, snap.sAC, snap.hAC);
  fill(VehicleId::D, snap.sAD, snap.hAD);
  return snap;
}

struct CollisionResult {
  bool collided = false;
  std::optional<double> time;        ///< first frame time with contact
  std::optional<VehicleId> with;     ///< vehicle hit
};

/// True iff the ego overlaps another vehicle longitudinally (gap <= 0) while
/// laterally within half a lane width of it.
inline CollisionResult detect_collision(const ScenarioTimeline& tl) {
  const double L = tl.config.vehicle_length;
  const double lateral_limit = 0.5 * tl.config.lane_width;
  for (std::size_t k = 0; k < tl.frames.size(); ++k) {
    const Frame& f = tl.frames[k];
    const VehicleState& ego = f[VehicleId::A];
    for (VehicleId id : {VehicleId::B, VehicleId::C, VehicleId::D}) {
      if (!tl.has(id)) continue;
      const VehicleState& other = f[id];
      if (std::abs(other.y - ego.y) >= lateral_limit) continue;
      const double g = other.s >= ego.s ? gap(ego, other, L, L) : gap(other, ego, L, L);
      if (g <= 0.0) return {true, tl.time_of(k), id};
    }
  }
  return {};
}

// ---- JSON -----------------------------------------------------------------

/// A scenario document as read from JSON: kind, ego speed, and geometry.
struct ScenarioDocument {
  ScenarioKind kind = ScenarioKind::CutIn;
  std::optional<double> ego_v0;
  ScenarioConfig config{};
};

inline ScenarioConfig scenario_config_from_json(const nlohmann::json& j, ScenarioKind kind) {
  ScenarioConfig c = ScenarioConfig::defaults_for(kind);
  try {
    if (j.contains("initial_gaps")) {
      const auto& g = j.at("initial_gaps");
      c.gap_ab = g.value("AB", c.gap_ab);
      c.gap_ac = g.value("AC", c.gap_ac);
      c.gap_ad = g.value("AD", c.gap_ad);
    }
    if (j.contains("surrounding_speeds")) {
      const auto& s = j.at("surrounding_speeds");
      c.speed_b = s.value("B", c.speed_b);
      c.speed_c = s.value("C", c.speed_c);
    }
    c.lead_decel = j.value("lead_decel", c.lead_decel);
    c.lane_change_duration = j.value("lane_change_duration", c.lane_change_duration);
    c.dt = j.value("dt", c.dt);
    c.horizon = j.value("horizon", c.horizon);
    c.vehicle_length = j.value("vehicle_length", c.vehicle_length);
    c.lane_width = j.value("lane_width", c.lane_width);
    c.headway_uses_initial_speed =
        j.value("headway_uses_initial_speed", c.headway_uses_initial_speed);
    if (j.contains("ego_speed_bounds")) {
      c.min_ego_speed = j.at("ego_speed_bounds").at(0).get<double>();
      c.max_ego_speed = j.at("ego_speed_bounds").at(1).get<double>();
    }
    if (j.contains("target_lane")) {
      if (j.at("target_lane").is_null()) {
        c.target_lane.reset();
      } else {
        c.target_lane = j.at("target_lane").get<int>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ScenarioDocument scenario_document_from_json(const nlohmann::json& j) {
  ScenarioDocument doc;
  try {
    doc.kind = parse_scenario_kind(j.at("kind").get<std::string>());
    if (j.contains("ego_v0")) doc.ego_v0 = j.at("ego_v0").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario document: ") + e.what());
  }
  doc.config = scenario_config_from_json(j, doc.kind);
  return doc;
}

inline nlohmann::json to_json(ScenarioKind kind, const ScenarioConfig& c) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind));
  j["initial_gaps"] = {{"AB", c.gap_ab}, {"AC", c.gap_ac}, {"AD", c.gap_ad}};
  j["surrounding_speeds"] = {{"B", c.speed_b}, {"C", c.speed_c}};
  j["lead_decel"] = c.lead_decel;
  j["lane_change_duration"] = c.lane_change_duration;
  j["dt"] = c.dt;
  j["horizon"] = c.horizon;
  j["vehicle_length"] = c.vehicle_length;
  j["lane_width"] = c.lane_width;
  return j;
}

}  // namespace ddmdrive
