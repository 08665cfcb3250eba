#pragma once

// Maximum-likelihood calibration of DdmParams against trial data.
//
// The likelihood of a trial is the probability mass the model puts in its
// (choice, 50 ms response-time bin) cell. Masses come from the grid
// first-passage solver; the Gaussian non-decision time is folded in with a
// discrete kernel on the same bin grid. Because drift and boundary depend on
// kinematic time, the passage distribution depends on when accumulation
// starts, so the kernel is split into a few groups of equal weight and each
// group uses a table solved from its own onset.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ddmdrive/ddm.hpp"
#include "ddmdrive/ddm_params.hpp"
#include "ddmdrive/error.hpp"
#include "ddmdrive/first_passage.hpp"
#include "ddmdrive/parallel.hpp"
#include "ddmdrive/random.hpp"
#include "ddmdrive/trial.hpp"

namespace ddmdrive {

inline double bic(double loglik, std::size_t k, std::size_t n) {
  detail::require(n >= 1, "bic: n must be at least 1");
  return double(k) * std::log(double(n)) - 2.0 * loglik;
}

// ---- differential evolution ------------------------------------------------

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct DeConfig {
  std::size_t np = 0;  ///< population size; 0 means 15 x dimension
  double F = 0.8;
  double CR = 0.9;
  std::size_t generations = 300;
  std::uint64_t seed = 2024;
  std::size_t workers = 1;
  /// Stop once the population's objective values agree: std <= atol + tol*|mean|.
  /// Zero for both disables the check and always runs every generation.
  double tol = 0.0;
  double atol = 0.0;
};

struct DeResult {
  std::vector<double> best_point;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> trace;  ///< best value after initialisation, then per generation
  std::size_t evaluations = 0;
  std::size_t generations_run = 0;
};

namespace detail {

inline void check_box(const std::vector<Interval>& box) {
  require(!box.empty(), "differential_evolution: empty search box");
  for (const auto& iv : box) {
    require(std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.lo < iv.hi,
            "differential_evolution: invalid bounds [" + std::to_string(iv.lo) + ", " +
                std::to_string(iv.hi) + "]");
  }
}

inline double reflect_into(double v, const Interval& iv, Rng& rng) {
  if (v < iv.lo) v = iv.lo + (iv.lo - v);
  if (v > iv.hi) v = iv.hi - (v - iv.hi);
  if (v < iv.lo || v > iv.hi) v = iv.lo + uniform01(rng) * (iv.hi - iv.lo);
  return v;
}

inline double checked_value(double v) {
  if (std::isnan(v)) throw NumericalError("differential_evolution: objective returned NaN");
  return v;
}

}  // namespace detail

/// DE/rand/1/bin minimiser. Mutants leaving the box are reflected back in;
/// selection is elitist, so the best value never increases. All random draws
/// happen on the calling thread and objective values are stored by index, so
/// the result does not depend on `workers`.
inline DeResult differential_evolution(const std::function<double(const std::vector<double>&)>& objective,
                                       const std::vector<Interval>& box, const DeConfig& config) {
  detail::check_box(box);
  const std::size_t dim = box.size();
  const std::size_t np = config.np == 0 ? 15 * dim : config.np;
  detail::require(np >= 4, "differential_evolution: population size must be at least 4");
  detail::require(config.F > 0.0 && config.F <= 2.0, "differential_evolution: F must be in (0, 2]");
  detail::require(config.CR >= 0.0 && config.CR <= 1.0,
                  "differential_evolution: CR must be in [0, 1]");

  Rng rng = make_rng(config.seed, 0);
  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  for (auto& member : pop) {
    for (std::size_t d = 0; d < dim; ++d) {
      member[d] = box[d].lo + uniform01(rng) * (box[d].hi - box[d].lo);
    }
  }
  std::vector<double> value(np);
  parallel_for(np, config.workers,
               [&](std::size_t i) { value[i] = detail::checked_value(objective(pop[i])); });

  DeResult result;
  result.evaluations = np;
  auto record_best = [&] {
    const auto best = std::min_element(value.begin(), value.end()) - value.begin();
    result.best_value = value[std::size_t(best)];
    result.best_point = pop[std::size_t(best)];
    result.trace.push_back(result.best_value);
  };
  record_best();

  std::vector<std::vector<double>> trial(np, std::vector<double>(dim));
  std::vector<double> trial_value(np);
  std::uniform_int_distribution<std::size_t> pick(0, np - 1);
  std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);

  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t r1, r2, r3;
      do r1 = pick(rng); while (r1 == i);
      do r2 = pick(rng); while (r2 == i || r2 == r1);
      do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t forced = pick_dim(rng);
      for (std::size_t d = 0; d < dim; ++d) {
        if (d == forced || uniform01(rng) < config.CR) {
          const double v = pop[r1][d] + config.F * (pop[r2][d] - pop[r3][d]);
          trial[i][d] = detail::reflect_into(v, box[d], rng);
        } else {
          trial[i][d] = pop[i][d];
        }
      }
    }
    parallel_for(np, config.workers, [&](std::size_t i) {
      trial_value[i] = detail::checked_value(objective(trial[i]));
    });
    result.evaluations += np;
    for (std::size_t i = 0; i < np; ++i) {
      if (trial_value[i] <= value[i]) {
        pop[i] = trial[i];
        value[i] = trial_value[i];
      }
    }
    record_best();
    result.generations_run = gen + 1;

    if (config.tol > 0.0 || config.atol > 0.0) {
      const double mean = std::accumulate(value.begin(), value.end(), 0.0) / double(np);
      double var = 0.0;
      for (double v : value) var += (v - mean) * (v - mean);
      if (std::isfinite(mean) && std::sqrt(var / double(np)) <= config.atol + config.tol * std::abs(mean)) {
        break;
      }
    }
  }
  return result;
}

// ---- parameter bounds --------------------------------------------------------

/// Search box over named DDM parameters plus fixed overrides. Names listed in
/// `fixed` are pinned and do not count towards the searched dimension k.
/// Dimensions flagged `log` are searched uniformly in log|x|; their bounds
/// must not straddle zero.
struct SearchDim {
  std::string name;
  Interval range;
  bool log = false;
};

struct ParamBounds {
  std::vector<SearchDim> search;
  std::map<std::string, double> fixed;

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& d : search) out.push_back(d.name);
    return out;
  }
  std::size_t k() const { return search.size(); }

  const SearchDim* find(const std::string& name) const {
    for (const auto& d : search) {
      if (d.name == name) return &d;
    }
    return nullptr;
  }

  /// Box in search coordinates.
  std::vector<Interval> box() const {
    std::vector<Interval> out;
    for (const auto& d : search) {
      if (!d.log) {
        out.push_back(d.range);
      } else {
        const double a = std::log(std::abs(d.range.lo));
        const double b = std::log(std::abs(d.range.hi));
        out.push_back({std::min(a, b), std::max(a, b)});
      }
    }
    return out;
  }

  /// Parameter value of search coordinate u along dimension i.
  double value(std::size_t i, double u) const {
    const auto& d = search[i];
    if (!d.log) return u;
    return d.range.lo < 0.0 ? -std::exp(u) : std::exp(u);
  }

  void validate() const {
    for (const auto& d : search) {
      detail::require(std::isfinite(d.range.lo) && std::isfinite(d.range.hi) &&
                          d.range.lo < d.range.hi,
                      "bounds for '" + d.name + "' must satisfy lower < upper");
      if (d.log) {
        detail::require(d.range.lo > 0.0 || d.range.hi < 0.0,
                        "log-scaled bounds for '" + d.name + "' must not include zero");
      }
    }
  }
};

/// One order of magnitude either side of each reference value, keeping its
/// sign, searched on a log scale; zero-valued references get [-1, 1].
inline ParamBounds default_bounds(const DdmParams& reference) {
  ParamBounds b;
  for (const auto& name : free_parameter_names(reference.kind)) {
    const double v = parameter_value(reference, name);
    SearchDim d{name, {-1.0, 1.0}, false};
    if (v > 0.0) d = {name, {v / 10.0, v * 10.0}, true};
    if (v < 0.0) d = {name, {v * 10.0, v / 10.0}, true};
    b.search.push_back(d);
  }
  return b;
}

/// Checks that `bounds` covers exactly the free parameters of `kind`.
inline void check_bounds_cover(const ParamBounds& bounds, ScenarioKind kind) {
  const auto free = free_parameter_names(kind);
  for (const auto& name : free) {
    const bool searched = bounds.find(name) != nullptr;
    const bool pinned = bounds.fixed.count(name) > 0;
    detail::require(searched || pinned,
                    "bounds do not cover free parameter '" + name + "' of the " +
                        std::string(to_string(kind)) + " model");
    detail::require(!(searched && pinned), "parameter '" + name + "' is both searched and fixed");
  }
  for (const auto& d : bounds.search) {
    detail::require(std::find(free.begin(), free.end(), d.name) != free.end(),
                    "'" + d.name + "' is not a free parameter of the " +
                        std::string(to_string(kind)) + " model");
  }
  bounds.validate();
}

inline DdmParams params_at(const DdmParams& base, const ParamBounds& bounds,
                           const std::vector<double>& point) {
  DdmParams p = base;
  for (const auto& [name, value] : bounds.fixed) parameter_ref(p, name) = value;
  for (std::size_t i = 0; i < bounds.search.size(); ++i) {
    parameter_ref(p, bounds.search[i].name) = bounds.value(i, point[i]);
  }
  return p;
}

// ---- likelihood ----------------------------------------------------------------

struct LikelihoodOptions {
  double rt_bin = 0.05;  ///< response-time cell width (s)
  double horizon = 10.0;  ///< decision horizon (s); later decisions count as none
  /// Evidence cells per boundary half-width at accumulation onset.
  double cells_per_bound = 24.0;
  /// Upper limit on the evidence grid size (cells across the widest boundary).
  double max_cells = 800.0;
  double dt = 0.005;
  std::size_t onset_groups = 3;
  double survival_tol = 1e-9;
  double floor = 1e-12;  ///< probability floor applied before taking logs
};

/// Probability of each (choice, RT bin) cell plus the censored mass for one
/// scenario condition.
struct LikelihoodTable {
  double rt_bin = 0.05;
  std::vector<double> brake;
  std::vector<double> steer;
  double none = 0.0;
  double floor = 1e-12;

  double cell(Choice c, std::optional<double> rt) const {
    if (c == Choice::None) return none;
    if (!rt || !(*rt > 0.0)) return 0.0;
    const auto bin = static_cast<std::size_t>(std::floor(*rt / rt_bin));
    const auto& v = c == Choice::Brake ? brake : steer;
    return bin < v.size() ? v[bin] : 0.0;
  }

  double log_cell(Choice c, std::optional<double> rt) const {
    return std::log(std::max(cell(c, rt), floor));
  }

  double total(Choice c) const {
    if (c == Choice::None) return none;
    const auto& v = c == Choice::Brake ? brake : steer;
    return std::accumulate(v.begin(), v.end(), 0.0);
  }
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Discrete non-decision kernel on multiples of `bin`: node i carries the
/// probability of (i - 1/2, i + 1/2] bins, truncated to positive times and
/// renormalised.
inline std::vector<std::pair<std::size_t, double>> nondecision_kernel(double mu, double sigma,
                                                                      double bin) {
  std::vector<std::pair<std::size_t, double>> nodes;
  const double lo_t = std::max(0.0, mu - 6.0 * sigma);
  const double hi_t = mu + 6.0 * sigma;
  const auto first = static_cast<std::size_t>(std::floor(lo_t / bin + 0.5));
  const auto last = static_cast<std::size_t>(std::floor(hi_t / bin + 0.5));
  double total = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const double a = std::max(0.0, (double(i) - 0.5) * bin);
    const double b = (double(i) + 0.5) * bin;
    const double w = normal_cdf((b - mu) / sigma) - normal_cdf((a - mu) / sigma);
    if (w > 0.0) {
      nodes.emplace_back(i, w);
      total += w;
    }
  }
  if (!(total > 0.0)) throw NumericalError("non-decision kernel has no mass");
  for (auto& [i, w] : nodes) w /= total;
  return nodes;
}

}  // namespace detail

/// Builds the cell probabilities of one condition. Throws ConfigError when
/// the grid cannot resolve the model (boundary too narrow at onset).
template <DecisionProcess Model>
LikelihoodTable likelihood_table(const Model& model, double mu_nd, double sigma_nd,
                                 const LikelihoodOptions& opt = {}) {
  detail::require(opt.rt_bin > 0.0, "likelihood: rt_bin must be positive");
  detail::require(opt.onset_groups >= 1, "likelihood: need at least one onset group");
  const double bin = opt.rt_bin;
  const auto n_bins = static_cast<std::size_t>(std::ceil(opt.horizon / bin - 1e-9));
  LikelihoodTable table;
  table.rt_bin = bin;
  table.floor = opt.floor;
  table.brake.assign(n_bins, 0.0);
  table.steer.assign(n_bins, 0.0);

  const auto kernel = detail::nondecision_kernel(mu_nd, sigma_nd, bin);
  const double horizon = std::min(opt.horizon, model.time_limit());

  // Split the kernel into contiguous groups of roughly equal weight.
  const std::size_t groups = std::min(opt.onset_groups, kernel.size());
  std::vector<std::vector<std::size_t>> members(groups);
  double cum = 0.0;
  for (std::size_t q = 0; q < kernel.size(); ++q) {
    const double mid = cum + 0.5 * kernel[q].second;
    members[std::min(groups - 1, static_cast<std::size_t>(mid * double(groups)))].push_back(q);
    cum += kernel[q].second;
  }
  for (const auto& group : members) {
    if (group.empty()) continue;
    double w_sum = 0.0, t_sum = 0.0;
    for (std::size_t q : group) {
      w_sum += kernel[q].second;
      t_sum += kernel[q].second * double(kernel[q].first) * bin;
    }
    const double onset = t_sum / w_sum;
    if (onset < horizon) {
      GridConfig grid;
      grid.dt = opt.dt;
      grid.horizon = horizon;
      grid.onset = onset;
      grid.survival_tol = opt.survival_tol;
      const double b_onset = model.at(onset).bound;
      grid.dx = std::max(b_onset / opt.cells_per_bound,
                         2.0 * std::max(model.bound_ceiling(), b_onset) / opt.max_cells);
      if (!(grid.dx <= 0.25 * b_onset)) {
        throw ConfigError("likelihood: boundary " + std::to_string(b_onset) +
                          " at onset is too narrow for the evidence grid");
      }
      const FirstPassageTable fp = first_passage_distribution(model, grid);

      // Passage mass spread over bins assuming the non-decision time is
      // uniform inside its kernel cell; index 0 is bin offset -1.
      const std::size_t span = static_cast<std::size_t>(std::ceil(horizon / bin)) + 3;
      std::vector<double> up(span, 0.0), lo(span, 0.0);
      for (std::size_t r = 0; r < fp.size(); ++r) {
        const double u = fp.t[r] / bin - 0.5;
        const double j0 = std::floor(u);
        const double f = u - j0;
        const auto j = static_cast<std::size_t>(j0 + 1.0);
        if (j + 1 >= span) break;
        up[j] += fp.upper[r] * (1.0 - f);
        up[j + 1] += fp.upper[r] * f;
        lo[j] += fp.lower[r] * (1.0 - f);
        lo[j + 1] += fp.lower[r] * f;
      }
      for (std::size_t q : group) {
        const auto [node, w] = kernel[q];
        for (std::size_t j = 0; j < span; ++j) {
          if (up[j] == 0.0 && lo[j] == 0.0) continue;
          const std::size_t b = (node + j == 0) ? 0 : node + j - 1;
          if (b >= n_bins) break;
          table.steer[b] += w * up[j];
          table.brake[b] += w * lo[j];
        }
      }
    }
  }
  const double decided = table.total(Choice::Brake) + table.total(Choice::Steer);
  table.none = std::max(0.0, 1.0 - decided);
  return table;
}

inline LikelihoodTable likelihood_table(const ScenarioTimeline& timeline, const DdmParams& p,
                                        double risk, const LikelihoodOptions& opt = {}) {
  return likelihood_table(DdmEvaluator(timeline, p, risk), p.mu_nd, p.sigma_nd, opt);
}

/// Log-likelihood of one trial, floored at log(opt.floor).
inline double trial_loglik(const TrialRecord& trial, const DdmParams& p, double risk,
                           const LikelihoodOptions& opt = {},
                           const ScenarioConfig* scenario = nullptr) {
  if (trial.kind != p.kind) {
    throw ValidationError("trial is " + std::string(to_string(trial.kind)) +
                          " but parameters are for " + std::string(to_string(p.kind)));
  }
  const ScenarioConfig cfg = scenario ? *scenario : ScenarioConfig::defaults_for(trial.kind);
  const ScenarioTimeline tl = make_scenario(trial.kind, trial.v0A, cfg);
  try {
    return likelihood_table(tl, p, risk, opt).log_cell(trial.choice, trial.rt);
  } catch (const ConfigError&) {
    return std::log(opt.floor);
  }
}

// ---- calibrate --------------------------------------------------------------------

struct CalibrationConfig {
  ParamBounds bounds;
  DeConfig de;
  LikelihoodOptions likelihood;
  std::optional<ScenarioConfig> scenario;  ///< defaults_for(kind) when absent
  double risk = 0.0;
};

struct CalibrationResult {
  DdmParams best_params;
  double loglik = 0.0;
  double bic = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
  std::vector<double> trace;  ///< best BIC per generation
  std::size_t evaluations = 0;
};

/// Trials grouped by initial speed; one likelihood table per group.
class TrialLikelihood {
 public:
  TrialLikelihood(const std::vector<TrialRecord>& trials, ScenarioKind kind,
                  const ScenarioConfig& scenario, double risk, LikelihoodOptions opt)
      : kind_(kind), risk_(risk), opt_(opt) {
    std::map<double, std::size_t> index;
    for (const auto& t : trials) {
      if (t.kind != kind) continue;
      auto [it, inserted] = index.emplace(t.v0A, conditions_.size());
      if (inserted) {
        conditions_.push_back({make_scenario(kind, t.v0A, scenario), {}});
      }
      conditions_[it->second].trials.push_back(&t);
      ++n_;
    }
    detail::require(n_ >= 1, "calibrate: no " + std::string(to_string(kind)) + " trials");
  }

  std::size_t n() const { return n_; }

  double operator()(const DdmParams& p) const {
    double total = 0.0;
    const double floor_log = std::log(opt_.floor);
    for (const auto& c : conditions_) {
      try {
        const LikelihoodTable table = likelihood_table(c.timeline, p, risk_, opt_);
        for (const TrialRecord* t : c.trials) total += table.log_cell(t->choice, t->rt);
      } catch (const ConfigError&) {
        total += floor_log * double(c.trials.size());
      } catch (const ValidationError&) {
        // Parameters outside the model's domain (e.g. sigma_nd <= 0 pinned by
        // the caller) score as impossible.
        total += floor_log * double(c.trials.size());
      }
    }
    return total;
  }

 private:
  struct Condition {
    ScenarioTimeline timeline;
    std::vector<const TrialRecord*> trials;
  };
  ScenarioKind kind_;
  double risk_;
  LikelihoodOptions opt_;
  std::vector<Condition> conditions_;
  std::size_t n_ = 0;
};

/// Fits the searched parameters of `base` by minimising BIC with
/// differential evolution. Parameters outside the search box keep their
/// value from `base` (or from `bounds.fixed`).
inline CalibrationResult calibrate(const std::vector<TrialRecord>& trials, ScenarioKind kind,
                                   const DdmParams& base, const CalibrationConfig& config) {
  detail::require(base.kind == kind, "calibrate: base parameters are for another scenario");
  check_bounds_cover(config.bounds, kind);
  const ScenarioConfig scenario = config.scenario.value_or(ScenarioConfig::defaults_for(kind));
  const TrialLikelihood loglik(trials, kind, scenario, config.risk, config.likelihood);
  const std::size_t k = config.bounds.k();
  const std::size_t n = loglik.n();

  auto objective = [&](const std::vector<double>& x) {
    return bic(loglik(params_at(base, config.bounds, x)), k, n);
  };
  const DeResult de = differential_evolution(objective, config.bounds.box(), config.de);

  CalibrationResult r;
  r.best_params = params_at(base, config.bounds, de.best_point);
  r.loglik = loglik(r.best_params);
  r.k = k;
  r.n = n;
  r.bic = bic(r.loglik, k, n);
  r.trace = de.trace;
  r.evaluations = de.evaluations;
  return r;
}

/// BIC of fixed parameters on a dataset, with k free parameters.
inline double dataset_bic(const std::vector<TrialRecord>& trials, const DdmParams& p, std::size_t k,
                          const LikelihoodOptions& opt = {},
                          std::optional<ScenarioConfig> scenario = std::nullopt, double risk = 0.0) {
  const TrialLikelihood loglik(trials, p.kind,
                               scenario.value_or(ScenarioConfig::defaults_for(p.kind)), risk, opt);
  return bic(loglik(p), k, loglik.n());
}

// ---- JSON -------------------------------------------------------------------------

/// Reads {bounds, fixed, NP, F, CR, generations, seed, rt_bin_s, tol, workers}.
/// Parameters missing from "bounds" fall back to `defaults`.
inline CalibrationConfig calibration_config_from_json(const nlohmann::json& j,
                                                      const ParamBounds& defaults) {
  CalibrationConfig c;
  c.bounds = defaults;
  try {
    const bool log_scale = j.value("log_scale", true);
    if (j.contains("bounds")) {
      for (auto& [name, range] : j.at("bounds").items()) {
        detail::require<ConfigError>(range.is_array() && range.size() == 2,
                                     "bounds." + name + " must be [lower, upper]");
        SearchDim d{name, {range.at(0).get<double>(), range.at(1).get<double>()}, false};
        d.log = log_scale && (d.range.lo > 0.0 || d.range.hi < 0.0);
        auto& s = c.bounds.search;
        auto it = std::find_if(s.begin(), s.end(), [&](const SearchDim& e) { return e.name == name; });
        if (it != s.end()) {
          *it = d;
        } else {
          s.push_back(d);
        }
      }
    }
    if (!log_scale) {
      for (auto& d : c.bounds.search) d.log = false;
    }
    if (j.contains("fixed")) {
      for (auto& [name, value] : j.at("fixed").items()) {
        c.bounds.fixed[name] = value.get<double>();
        auto& s = c.bounds.search;
        s.erase(std::remove_if(s.begin(), s.end(), [&](const SearchDim& e) { return e.name == name; }),
                s.end());
      }
    }
    c.de.np = j.value("NP", c.de.np);
    c.de.F = j.value("F", c.de.F);
    c.de.CR = j.value("CR", c.de.CR);
    c.de.generations = j.value("generations", c.de.generations);
    c.de.seed = j.value("seed", c.de.seed);
    c.de.tol = j.value("tol", c.de.tol);
    c.de.workers = j.value("workers", c.de.workers);
    c.likelihood.rt_bin = j.value("rt_bin_s", c.likelihood.rt_bin);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("calibration config: ") + e.what());
  }
  return c;
}

inline nlohmann::json to_json(const CalibrationResult& r) {
  nlohmann::json j;
  j["best_params"] = r.best_params;
  j["loglik"] = r.loglik;
  j["bic"] = r.bic;
  j["k"] = r.k;
  j["n"] = r.n;
  j["evaluations"] = r.evaluations;
  j["generations"] = r.trace.empty() ? 0 : r.trace.size() - 1;
  return j;
}

inline void write_trace_csv(std::ostream& out, const std::vector<double>& trace) {
  out << "generation,best_bic\n";
  for (std::size_t g = 0; g < trace.size(); ++g) out << g << ',' << format_double(trace[g]) << '\n';
}

}  // namespace ddmdrive
