#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ddmdrive/error.hpp"
#include "ddmdrive/kinematics.hpp"

namespace ddmdrive {

/// Free parameters of the scenario-specific drift-diffusion model plus the
/// risk-sensitivity coupling and the evidence noise scale.
///
/// Drift and boundary share the kinematic weights. For the cut-in scenario
/// `kappa` weighs sAB and `beta` / `delta` must be absent; for the other two
/// scenarios `beta` weighs sAB, `delta` the headway to C (rear-end) or D
/// (lane change), and `kappa` the matching distance.
struct DdmParams {
  ScenarioKind kind = ScenarioKind::CutIn;
  double alpha = 0.0;
  std::optional<double> beta;
  std::optional<double> delta;
  double kappa = 0.0;
  double gamma = 0.0;
  double theta = 0.0;
  double b0 = 1.0;
  double k = 0.0;
  double tau = 0.0;
  double mu_nd = 0.3;
  double sigma_nd = 0.1;
  double b_z = 0.0;
  double nu = 0.0;
  double lambda = 0.0;
  double eta = 0.0;
  double rho = 0.0;
  double noise_scale = 1.0;
  /// Lane-change boundary subtracts theta in its exponent (as in the
  /// published lane-change boundary). Ignored for the other scenarios.
  bool boundary_subtracts_theta = true;

  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    for (double x : {alpha, kappa, gamma, theta, b0, k, tau, mu_nd, sigma_nd, b_z, nu, lambda, eta,
                     rho, noise_scale}) {
      detail::require(finite(x), "DdmParams: non-finite parameter");
    }
    detail::require(b0 > 0.0, "DdmParams: b0 must be positive");
    detail::require(sigma_nd > 0.0, "DdmParams: sigma_nd must be positive");
    detail::require(k >= 0.0, "DdmParams: k must be non-negative");
    detail::require(noise_scale > 0.0, "DdmParams: noise_scale must be positive");
    if (kind == ScenarioKind::CutIn) {
      detail::require(!beta && !delta, "DdmParams: beta/delta are not used by the cut-in model");
    } else {
      detail::require(beta.has_value() && delta.has_value(),
                      "DdmParams: beta and delta are required for " +
                          std::string(to_string(kind)));
      detail::require(finite(*beta) && finite(*delta), "DdmParams: non-finite parameter");
    }
  }

  bool operator==(const DdmParams&) const = default;
};

/// Names of the parameters searched during calibration, in a fixed order.
inline std::vector<std::string> free_parameter_names(ScenarioKind kind) {
  if (kind == ScenarioKind::CutIn) {
    return {"alpha", "kappa", "gamma", "theta", "b0", "k",
            "tau",   "mu_nd", "sigma_nd", "b_z", "nu"};
  }
  return {"alpha", "beta", "delta", "kappa", "gamma",    "theta", "b0",
          "k",     "tau",  "mu_nd", "sigma_nd", "b_z", "nu"};
}

inline double& parameter_ref(DdmParams& p, std::string_view name) {
  if (name == "alpha") return p.alpha;
  if (name == "kappa") return p.kappa;
  if (name == "gamma") return p.gamma;
  if (name == "theta") return p.theta;
  if (name == "b0") return p.b0;
  if (name == "k") return p.k;
  if (name == "tau") return p.tau;
  if (name == "mu_nd") return p.mu_nd;
  if (name == "sigma_nd") return p.sigma_nd;
  if (name == "b_z") return p.b_z;
  if (name == "nu") return p.nu;
  if (name == "lambda") return p.lambda;
  if (name == "eta") return p.eta;
  if (name == "rho") return p.rho;
  if (name == "noise_scale") return p.noise_scale;
  if (name == "beta" || name == "delta") {
    auto& slot = name == "beta" ? p.beta : p.delta;
    if (!slot) {
      if (p.kind == ScenarioKind::CutIn) {
        throw ValidationError("parameter '" + std::string(name) + "' is not used by cut-in");
      }
      slot = 0.0;
    }
    return *slot;
  }
  throw ValidationError("unknown DDM parameter '" + std::string(name) + "'");
}

inline double parameter_value(const DdmParams& p, std::string_view name) {
  DdmParams copy = p;
  return parameter_ref(copy, name);
}

inline void to_json(nlohmann::json& j, const DdmParams& p) {
  j = nlohmann::json{{"scenario_kind", std::string(to_string(p.kind))},
                     {"alpha", p.alpha},
                     {"kappa", p.kappa},
                     {"gamma", p.gamma},
                     {"theta", p.theta},
                     {"b0", p.b0},
                     {"k", p.k},
                     {"tau", p.tau},
                     {"mu_nd", p.mu_nd},
                     {"sigma_nd", p.sigma_nd},
                     {"b_z", p.b_z},
                     {"nu", p.nu},
                     {"lambda", p.lambda},
                     {"eta", p.eta},
                     {"rho", p.rho},
                     {"noise_scale", p.noise_scale}};
  j["beta"] = p.beta ? nlohmann::json(*p.beta) : nlohmann::json(nullptr);
  j["delta"] = p.delta ? nlohmann::json(*p.delta) : nlohmann::json(nullptr);
  if (p.kind == ScenarioKind::LaneChange) {
    j["boundary_subtracts_theta"] = p.boundary_subtracts_theta;
  }
}

inline void from_json(const nlohmann::json& j, DdmParams& p) {
  try {
    p = DdmParams{};
    p.kind = parse_scenario_kind(j.at("scenario_kind").get<std::string>());
    p.alpha = j.at("alpha").get<double>();
    p.kappa = j.at("kappa").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.theta = j.at("theta").get<double>();
    p.b0 = j.at("b0").get<double>();
    p.k = j.at("k").get<double>();
    p.tau = j.at("tau").get<double>();
    p.mu_nd = j.at("mu_nd").get<double>();
    p.sigma_nd = j.at("sigma_nd").get<double>();
    p.b_z = j.at("b_z").get<double>();
    p.nu = j.at("nu").get<double>();
    p.lambda = j.value("lambda", 0.0);
    p.eta = j.value("eta", 0.0);
    p.rho = j.value("rho", 0.0);
    p.noise_scale = j.value("noise_scale", 1.0);
    p.boundary_subtracts_theta = j.value("boundary_subtracts_theta", true);
    if (j.contains("beta") && !j.at("beta").is_null()) p.beta = j.at("beta").get<double>();
    if (j.contains("delta") && !j.at("delta").is_null()) p.delta = j.at("delta").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("DdmParams JSON: ") + e.what());
  }
  p.validate();
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline DdmParams load_params(const std::filesystem::path& path) {
  return read_json_file(path).get<DdmParams>();
}

/// Fixture file name for a scenario inside a fixtures directory.
inline std::filesystem::path fixture_path(const std::filesystem::path& dir, ScenarioKind kind) {
  return dir / (std::string(to_string(kind)) + ".json");
}

}  // namespace ddmdrive
