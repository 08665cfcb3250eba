#pragma once

// Drift-diffusion decision model for brake-vs-steer evasive decisions.
//
// Evidence x(t) starts at a speed-dependent bias Z, holds there during a
// Gaussian non-decision period, then integrates dx = g(t) dt + sigma dW until
// it crosses +b(t) (steer) or -b(t) (brake). Drift and boundary are affine /
// sigmoid functions of the scenario kinematics, optionally modulated by the
// driver's risk sensitivity R_s.

#include <algorithm>
#include <concepts>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddmdrive/ddm_params.hpp"
#include "ddmdrive/error.hpp"
#include "ddmdrive/kinematics.hpp"
#include "ddmdrive/parallel.hpp"
#include "ddmdrive/random.hpp"

namespace ddmdrive {

enum class Choice { Brake, Steer, None };

inline std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::Brake: return "brake";
    case Choice::Steer: return "steer";
    case Choice::None: return "none";
  }
  return "?";
}

inline Choice parse_choice(std::string_view text) {
  if (text == "brake") return Choice::Brake;
  if (text == "steer") return Choice::Steer;
  if (text == "none") return Choice::None;
  throw ValidationError("unknown choice '" + std::string(text) + "'");
}

namespace detail {

inline double need(const std::optional<double>& v, const char* name, ScenarioKind kind) {
  if (!v) {
    throw ValidationError(std::string("snapshot lacks ") + name + " required by the " +
                          std::string(to_string(kind)) + " model");
  }
  return *v;
}

inline double weight(const std::optional<double>& w, const char* name) {
  if (!w) throw ValidationError(std::string("DdmParams: missing ") + name);
  return *w;
}

/// Kinematic part shared by drift and boundary (everything but the offsets).
inline double kinematic_term(ScenarioKind kind, const KinematicSnapshot& snap,
                             const DdmParams& p) {
  const double hAB = need(snap.hAB, "hAB", kind);
  const double sAB = need(snap.sAB, "sAB", kind);
  switch (kind) {
    case ScenarioKind::CutIn:
      return hAB + p.kappa * sAB + p.gamma * snap.v0A;
    case ScenarioKind::RearEnd:
      return hAB + weight(p.beta, "beta") * sAB +
             weight(p.delta, "delta") * need(snap.hAC, "hAC", kind) +
             p.kappa * need(snap.sAC, "sAC", kind) + p.gamma * snap.v0A;
    case ScenarioKind::LaneChange:
      return hAB + weight(p.beta, "beta") * sAB +
             weight(p.delta, "delta") * need(snap.hAD, "hAD", kind) +
             p.kappa * need(snap.sAD, "sAD", kind) + p.gamma * snap.v0A;
  }
  return 0.0;
}

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// Mean evidence rate g (evidence units per second).
inline double drift_rate(ScenarioKind kind, const KinematicSnapshot& snap, const DdmParams& p) {
  return p.alpha * (detail::kinematic_term(kind, snap, p) - p.theta);
}

/// Upper boundary magnitude b; the lower boundary is -b.
inline double boundary(ScenarioKind kind, const KinematicSnapshot& snap, const DdmParams& p) {
  double arg = detail::kinematic_term(kind, snap, p) - p.tau;
  if (kind == ScenarioKind::LaneChange && p.boundary_subtracts_theta) arg -= p.theta;
  return p.b0 * detail::logistic(p.k * arg);
}

/// Starting evidence Z in (-b0, b0); negative values lean towards braking.
inline double initial_bias(const DdmParams& p, double v0A) {
  return 2.0 * p.b0 * detail::logistic(p.b_z * (v0A - p.nu)) - p.b0;
}

/// Gaussian non-decision time, redrawn until strictly positive.
inline double sample_nondecision_time(const DdmParams& p, Rng& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double t = p.mu_nd + p.sigma_nd * standard_normal(rng);
    if (t > 0.0) return t;
  }
  throw NumericalError("sample_nondecision_time: no positive draw in 10000 attempts");
}

struct RiskAdjusted {
  double drift;
  double bound;
  double bias;
};

/// Couples a risk-sensitivity score into drift, boundary and bias:
/// g + lambda R_s, b exp(-eta R_s), Z + rho R_s with Z kept inside (-b', b').
inline RiskAdjusted apply_risk_sensitivity(double g, double b, double Z, double risk,
                                           const DdmParams& p) {
  detail::require(risk >= -1.0 && risk <= 1.0, "apply_risk_sensitivity: R_s must be in [-1, 1]");
  RiskAdjusted out{g + p.lambda * risk, b * std::exp(-p.eta * risk), Z + p.rho * risk};
  const double limit = std::nextafter(out.bound, 0.0);
  out.bias = std::clamp(out.bias, -limit, limit);
  return out;
}

/// Drift and boundary magnitude at one instant.
struct CoefficientPoint {
  double drift;
  double bound;
};

/// A two-boundary evidence accumulation process: start point, time-varying
/// drift/boundary, constant noise, and a non-decision latency distribution.
template <typename M>
concept DecisionProcess = requires(const M& m, double t, Rng& rng) {
  { m.start() } -> std::convertible_to<double>;
  { m.at(t) } -> std::same_as<CoefficientPoint>;
  { m.noise_scale() } -> std::convertible_to<double>;
  { m.bound_ceiling() } -> std::convertible_to<double>;
  { m.time_limit() } -> std::convertible_to<double>;
  { m.nominal_onset() } -> std::convertible_to<double>;
  { m.sample_nondecision(rng) } -> std::convertible_to<double>;
};

/// Evaluates risk-adjusted drift and boundary along a scenario timeline.
class DdmEvaluator {
 public:
  DdmEvaluator(const ScenarioTimeline& timeline, const DdmParams& params, double risk)
      : timeline_(&timeline), params_(params), risk_(risk) {
    params_.validate();
    if (timeline.kind != params.kind) {
      throw ValidationError("timeline is " + std::string(to_string(timeline.kind)) +
                            " but parameters are for " + std::string(to_string(params.kind)));
    }
    detail::require(risk >= -1.0 && risk <= 1.0, "R_s must be in [-1, 1]");
    drift_shift_ = params_.lambda * risk;
    bound_scale_ = std::exp(-params_.eta * risk);
  }

  CoefficientPoint at(double t) const {
    const KinematicSnapshot snap = snapshot(*timeline_, t);
    return {drift_rate(params_.kind, snap, params_) + drift_shift_,
            boundary(params_.kind, snap, params_) * bound_scale_};
  }

  /// Risk-adjusted starting evidence, clamped against the boundary at t = 0.
  double start() const {
    const KinematicSnapshot snap = snapshot(*timeline_, 0.0);
    return apply_risk_sensitivity(drift_rate(params_.kind, snap, params_),
                                  boundary(params_.kind, snap, params_),
                                  initial_bias(params_, timeline_->ego_v0), risk_, params_)
        .bias;
  }

  double noise_scale() const { return params_.noise_scale; }
  double bound_ceiling() const { return params_.b0 * bound_scale_; }
  double time_limit() const { return timeline_->horizon(); }
  double nominal_onset() const { return params_.mu_nd; }
  double sample_nondecision(Rng& rng) const { return sample_nondecision_time(params_, rng); }

  const DdmParams& params() const { return params_; }
  const ScenarioTimeline& timeline() const { return *timeline_; }
  double risk() const { return risk_; }

 private:
  const ScenarioTimeline* timeline_;
  DdmParams params_;
  double risk_;
  double drift_shift_ = 0.0;
  double bound_scale_ = 1.0;
};

/// Constant drift, constant symmetric boundaries, fixed non-decision time.
struct ConstantDiffusion {
  double drift = 0.0;
  double bound = 1.0;
  double start_point = 0.0;
  double noise = 1.0;
  double nondecision = 0.0;
  double limit = 1e9;

  double start() const { return start_point; }
  CoefficientPoint at(double) const { return {drift, bound}; }
  double noise_scale() const { return noise; }
  double bound_ceiling() const { return bound; }
  double time_limit() const { return limit; }
  double nominal_onset() const { return nondecision; }
  double sample_nondecision(Rng&) const { return nondecision; }
};

struct TracePoint {
  double t;
  double x;
  double bound;
};

struct DecisionOutcome {
  Choice choice = Choice::None;
  std::optional<double> rt;  ///< non-decision time + first passage; absent for None
  double t_nd = 0.0;
  std::vector<TracePoint> trace;
};

struct SimulationOptions {
  double dt = 0.001;
  /// Absolute decision horizon (s); clipped to the timeline length.
  double horizon = 10.0;
  bool record_trace = false;
  /// Also absorb on crossings between grid times, drawn from the Brownian
  /// bridge of each step. Plain discrete monitoring misses them and biases
  /// choices towards the nearer boundary by O(sqrt(dt)).
  bool bridge_correction = true;
};

/// One Monte Carlo decision: non-decision period with evidence frozen at Z,
/// then Euler-Maruyama accumulation until a boundary is crossed.
template <DecisionProcess Model>
DecisionOutcome simulate_trial(const Model& model, Rng& rng, const SimulationOptions& opt = {}) {
  detail::require(opt.dt > 0.0, "simulate_trial: dt must be positive");
  const double horizon = std::min(opt.horizon, model.time_limit());
  const double sigma = model.noise_scale();
  const double noise_step = sigma * std::sqrt(opt.dt);

  DecisionOutcome out;
  out.t_nd = model.sample_nondecision(rng);
  double x = model.start();

  if (opt.record_trace) {
    const double b_start = model.at(0.0).bound;
    out.trace.push_back({0.0, x, b_start});
    const double t_end = std::min(out.t_nd, horizon);
    for (std::int64_t i = 1; double(i) * opt.dt < t_end; ++i) {
      const double t = double(i) * opt.dt;
      out.trace.push_back({t, x, model.at(t).bound});
    }
  }
  if (out.t_nd > horizon) return out;

  auto absorb = [&](double t, double bound) {
    if (x >= bound) {
      out.choice = Choice::Steer;
    } else if (x <= -bound) {
      out.choice = Choice::Brake;
    } else {
      return false;
    }
    out.rt = t;
    return true;
  };

  auto point = model.at(out.t_nd);
  if (opt.record_trace) out.trace.push_back({out.t_nd, x, point.bound});
  if (absorb(out.t_nd, point.bound)) return out;

  const double bridge_scale = -2.0 / (sigma * sigma * opt.dt);
  // below this exponent the bridge crossing probability is under 1e-13
  constexpr double negligible = -30.0;
  for (std::int64_t i = 1;; ++i) {
    const double t = out.t_nd + double(i) * opt.dt;
    if (t > horizon) break;
    const double x_prev = x;
    const double b_prev = point.bound;
    x += point.drift * opt.dt + noise_step * standard_normal(rng);
    point = model.at(t);
    if (absorb(t, point.bound)) {
      if (opt.record_trace) out.trace.push_back({t, x, point.bound});
      return out;
    }
    if (opt.bridge_correction) {
      const double e_up = bridge_scale * (b_prev - x_prev) * (point.bound - x);
      const double e_lo = bridge_scale * (b_prev + x_prev) * (point.bound + x);
      if (e_up < negligible && e_lo < negligible) {
        if (opt.record_trace) out.trace.push_back({t, x, point.bound});
        continue;
      }
      const double p_up = std::exp(e_up);
      const double p_lo = std::exp(e_lo);
      if (p_up + p_lo > 1e-12) {
        const double u = uniform01(rng);
        if (u < p_up || u < p_up + p_lo) {
          out.choice = u < p_up ? Choice::Steer : Choice::Brake;
          out.rt = t;
          x = out.choice == Choice::Steer ? point.bound : -point.bound;
          if (opt.record_trace) out.trace.push_back({t, x, point.bound});
          return out;
        }
      }
    }
    if (opt.record_trace) out.trace.push_back({t, x, point.bound});
  }
  return out;
}

inline DecisionOutcome simulate_trial(const ScenarioTimeline& timeline, const DdmParams& params,
                                      double risk, Rng& rng, bool record_trace = false) {
  SimulationOptions opt;
  opt.record_trace = record_trace;
  return simulate_trial(DdmEvaluator(timeline, params, risk), rng, opt);
}

/// Sample quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double q) {
  detail::require(!values.empty(), "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * double(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - double(lo)) * (values[hi] - values[lo]);
}

inline const std::vector<double>& default_quantile_levels() {
  static const std::vector<double> levels{0.1, 0.3, 0.5, 0.7, 0.9};
  return levels;
}

struct ChoiceSummary {
  std::size_t n_trials = 0;
  std::size_t n_brake = 0;
  std::size_t n_steer = 0;
  std::size_t n_none = 0;
  double p_brake = 0.0;
  double p_steer = 0.0;
  double p_none = 0.0;
  std::vector<double> quantile_levels;
  std::vector<double> brake_rt_quantiles;  ///< empty when no brake decisions
  std::vector<double> steer_rt_quantiles;
  std::optional<double> mean_rt;  ///< over decided trials
  std::vector<DecisionOutcome> outcomes;

  bool operator==(const ChoiceSummary& o) const {
    return n_brake == o.n_brake && n_steer == o.n_steer && n_none == o.n_none &&
           brake_rt_quantiles == o.brake_rt_quantiles &&
           steer_rt_quantiles == o.steer_rt_quantiles && mean_rt == o.mean_rt;
  }
};

struct BatchOptions {
  SimulationOptions simulation{};
  std::size_t workers = 1;
  bool keep_outcomes = false;
};

inline ChoiceSummary summarize(std::vector<DecisionOutcome> outcomes, bool keep_outcomes) {
  ChoiceSummary s;
  s.n_trials = outcomes.size();
  s.quantile_levels = default_quantile_levels();
  std::vector<double> brake, steer;
  double rt_sum = 0.0;
  for (const auto& o : outcomes) {
    switch (o.choice) {
      case Choice::Brake: ++s.n_brake; brake.push_back(*o.rt); rt_sum += *o.rt; break;
      case Choice::Steer: ++s.n_steer; steer.push_back(*o.rt); rt_sum += *o.rt; break;
      case Choice::None: ++s.n_none; break;
    }
  }
  const double n = double(s.n_trials);
  if (s.n_trials > 0) {
    s.p_brake = double(s.n_brake) / n;
    s.p_steer = double(s.n_steer) / n;
    s.p_none = double(s.n_none) / n;
  }
  for (double q : s.quantile_levels) {
    if (!brake.empty()) s.brake_rt_quantiles.push_back(quantile(brake, q));
    if (!steer.empty()) s.steer_rt_quantiles.push_back(quantile(steer, q));
  }
  if (s.n_brake + s.n_steer > 0) s.mean_rt = rt_sum / double(s.n_brake + s.n_steer);
  if (keep_outcomes) s.outcomes = std::move(outcomes);
  return s;
}

/// Runs n_trials independent decisions; trial i draws from the stream
/// derive_seed(master_seed, i), so results do not depend on `workers`.
inline ChoiceSummary choice_probabilities(const ScenarioTimeline& timeline,
                                          const DdmParams& params, double risk,
                                          std::size_t n_trials, std::uint64_t master_seed,
                                          const BatchOptions& opt = {}) {
  detail::require(n_trials >= 1, "choice_probabilities: n_trials must be at least 1");
  const DdmEvaluator model(timeline, params, risk);
  std::vector<DecisionOutcome> outcomes(n_trials);
  parallel_for(n_trials, opt.workers, [&](std::size_t i) {
    Rng rng = make_rng(master_seed, i);
    outcomes[i] = simulate_trial(model, rng, opt.simulation);
  });
  return summarize(std::move(outcomes), opt.keep_outcomes);
}

}  // namespace ddmdrive
