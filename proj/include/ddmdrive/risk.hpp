#pragma once

// Multivariate Gaussian model of evasive-behavior features and the scalar
// risk-sensitivity score derived from it.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "ddmdrive/error.hpp"
#include "ddmdrive/trial.hpp"

namespace ddmdrive {

struct BehaviorSample {
  double vb = 0.0;  ///< braking-initiation speed (m/s)
  double ax = 0.0;  ///< peak longitudinal acceleration magnitude (m/s^2)
  double ay = 0.0;  ///< peak lateral acceleration magnitude (m/s^2)
};

/// Feature names understood by `feature_vector`: "vb", "ax", "ay".
inline const std::vector<std::string>& default_features() {
  static const std::vector<std::string> names{"ax", "ay"};
  return names;
}

inline Eigen::VectorXd feature_vector(const BehaviorSample& s,
                                      const std::vector<std::string>& names) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto& n = names[i];
    double v = 0.0;
    if (n == "vb") v = s.vb;
    else if (n == "ax") v = s.ax;
    else if (n == "ay") v = s.ay;
    else throw ValidationError("unknown behavior feature '" + n + "'");
    detail::require(std::isfinite(v) && v >= 0.0, "behavior feature " + n +
                                                      " must be finite and non-negative");
    x(static_cast<Eigen::Index>(i)) = v;
  }
  return x;
}

struct MgdModel {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  std::size_t n = 0;
  std::vector<std::string> feature_names;
  bool singular = false;
  std::string diagnostic;

  Eigen::Index dim() const { return mu.size(); }
};

namespace detail {

inline Eigen::LLT<Eigen::MatrixXd> checked_cholesky(const Eigen::MatrixXd& sigma) {
  require(sigma.rows() == sigma.cols() && sigma.rows() > 0, "covariance must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw DomainError("covariance matrix is not positive definite");
  }
  // LLT happily factors matrices that are numerically singular.
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  if (!(diag.minCoeff() > 1e-10 * diag.maxCoeff())) {
    throw DomainError("covariance matrix is singular");
  }
  return llt;
}

inline double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace detail

inline double mgd_log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                          const Eigen::MatrixXd& sigma) {
  detail::require(x.size() == mu.size() && sigma.rows() == mu.size(),
                  "mgd: dimension mismatch");
  const auto llt = detail::checked_cholesky(sigma);
  const Eigen::VectorXd w = llt.matrixL().solve(x - mu);
  const double m = double(mu.size());
  return -0.5 * m * std::log(2.0 * std::numbers::pi) - 0.5 * detail::log_det(llt) -
         0.5 * w.squaredNorm();
}

inline double mgd_pdf(const Eigen::VectorXd& x, const MgdModel& model) {
  return std::exp(mgd_log_pdf(x, model.mu, model.sigma));
}

/// Log-likelihood of `samples` (one per row) under N(mu, sigma).
inline double log_likelihood(const Eigen::MatrixXd& samples, const Eigen::VectorXd& mu,
                             const Eigen::MatrixXd& sigma) {
  detail::require(samples.rows() >= 1, "log_likelihood: need at least one sample");
  detail::require(samples.cols() == mu.size() && sigma.rows() == mu.size(),
                  "log_likelihood: dimension mismatch");
  const auto llt = detail::checked_cholesky(sigma);
  const double n = double(samples.rows());
  const double m = double(mu.size());
  const Eigen::MatrixXd centered = (samples.rowwise() - mu.transpose()).transpose();
  const double quad = llt.matrixL().solve(centered).squaredNorm();
  return -0.5 * n * m * std::log(2.0 * std::numbers::pi) - 0.5 * n * detail::log_det(llt) -
         0.5 * quad;
}

/// Maximum-likelihood fit: sample mean and the 1/N covariance (1/(N-1) when
/// `unbiased`). A singular estimate is returned flagged, not thrown.
inline MgdModel fit_mgd(const Eigen::MatrixXd& samples, std::vector<std::string> feature_names = {},
                        bool unbiased = false) {
  const auto n = samples.rows();
  detail::require(n >= 2, "fit_mgd: need at least two samples");
  detail::require(samples.allFinite(), "fit_mgd: non-finite sample");
  MgdModel model;
  model.n = static_cast<std::size_t>(n);
  model.mu = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mu.transpose();
  model.sigma = centered.transpose() * centered / double(unbiased ? n - 1 : n);
  model.sigma = 0.5 * (model.sigma + model.sigma.transpose());
  if (feature_names.empty()) {
    for (Eigen::Index i = 0; i < samples.cols(); ++i) feature_names.push_back("x" + std::to_string(i));
  }
  detail::require(feature_names.size() == std::size_t(samples.cols()),
                  "fit_mgd: feature name count does not match sample dimension");
  model.feature_names = std::move(feature_names);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.sigma, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-12 * std::max(hi, 1e-300)) || hi <= 0.0) {
    model.singular = true;
    model.diagnostic = "covariance estimate is singular (smallest eigenvalue " +
                       std::to_string(lo) +
                       "); add a ridge term, e.g. sigma + 1e-6 * I, before evaluating densities";
  }
  return model;
}

inline Eigen::MatrixXd sample_matrix(const std::vector<BehaviorSample>& samples,
                                     const std::vector<std::string>& names) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(samples.size()),
                    static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = feature_vector(samples[i], names).transpose();
  }
  return m;
}

inline MgdModel fit_mgd(const std::vector<BehaviorSample>& samples,
                        const std::vector<std::string>& names = default_features(),
                        bool unbiased = false) {
  return fit_mgd(sample_matrix(samples, names), names, unbiased);
}

enum class SensitivityLevel { Low, Medium, High };

inline std::string_view to_string(SensitivityLevel level) {
  switch (level) {
    case SensitivityLevel::Low: return "low";
    case SensitivityLevel::Medium: return "medium";
    case SensitivityLevel::High: return "high";
  }
  return "?";
}

struct SensitivityAssignment {
  double R_s = 0.0;
  SensitivityLevel level = SensitivityLevel::Medium;
  double percentile = 0.5;
};

inline SensitivityAssignment assignment_from_percentile(double percentile) {
  SensitivityAssignment a;
  a.percentile = percentile;
  a.R_s = 2.0 * percentile - 1.0;
  if (percentile < 1.0 / 3.0) a.level = SensitivityLevel::Low;
  else if (percentile > 2.0 / 3.0) a.level = SensitivityLevel::High;
  else a.level = SensitivityLevel::Medium;
  return a;
}

/// Unit aggression direction: equal positive weight on every acceleration
/// feature, zero on vb.
inline Eigen::VectorXd default_aggression_direction(const std::vector<std::string>& names) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "ax" || names[i] == "ay") u(static_cast<Eigen::Index>(i)) = 1.0;
  }
  return u;
}

/// Standardized aggression score z = u' L^-1 (x - mu) with Sigma = L L'.
/// Whitening by the Cholesky factor makes z invariant to per-feature unit
/// changes; z = 1 for x = mu + L u.
inline double aggression_score(const Eigen::VectorXd& x, const MgdModel& model,
                               std::optional<Eigen::VectorXd> direction = std::nullopt) {
  detail::require(x.size() == model.dim(), "classify: feature dimension mismatch");
  Eigen::VectorXd u = direction ? *direction : default_aggression_direction(model.feature_names);
  detail::require(u.size() == model.dim(), "classify: direction dimension mismatch");
  detail::require((u.array() >= 0.0).all() && u.norm() > 0.0,
                  "classify: aggression direction needs non-negative weights");
  u.normalize();
  const auto llt = detail::checked_cholesky(model.sigma);
  const Eigen::VectorXd w = llt.matrixL().solve(x - model.mu);
  return u.dot(w);
}

inline SensitivityAssignment classify_sensitivity(const Eigen::VectorXd& x, const MgdModel& model,
                                                  std::optional<Eigen::VectorXd> direction = std::nullopt) {
  const double z = aggression_score(x, model, std::move(direction));
  return assignment_from_percentile(0.5 * std::erfc(-z / std::numbers::sqrt2));
}

inline SensitivityAssignment classify_sensitivity(const BehaviorSample& s, const MgdModel& model) {
  return classify_sensitivity(feature_vector(s, model.feature_names), model);
}

inline std::optional<BehaviorSample> behavior_of(const TrialRecord& t) {
  if (!t.ax || !t.ay) return std::nullopt;
  return BehaviorSample{t.vb.value_or(0.0), *t.ax, *t.ay};
}

/// Per-scenario population model over the trials' behavior features. Trials
/// without features are skipped; "vb" in `names` requires vb on every trial.
inline MgdModel scenario_population_fit(const std::vector<TrialRecord>& trials, ScenarioKind kind,
                                        const std::vector<std::string>& names = default_features(),
                                        bool unbiased = false) {
  const bool need_vb = std::find(names.begin(), names.end(), "vb") != names.end();
  std::vector<BehaviorSample> samples;
  for (const auto& t : trials) {
    if (t.kind != kind) continue;
    if (!t.ax || !t.ay || (need_vb && !t.vb)) continue;
    samples.push_back(*behavior_of(t));
  }
  if (samples.size() < 2) {
    throw ValidationError("scenario_population_fit: " + std::to_string(samples.size()) + " " +
                          std::string(to_string(kind)) +
                          " trial(s) with behavior features; need at least 2");
  }
  return fit_mgd(samples, names, unbiased);
}

inline nlohmann::json to_json(const MgdModel& m) {
  nlohmann::json j;
  j["feature_names"] = m.feature_names;
  j["mu"] = std::vector<double>(m.mu.data(), m.mu.data() + m.mu.size());
  std::vector<double> rows;
  for (Eigen::Index r = 0; r < m.sigma.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.sigma.cols(); ++c) rows.push_back(m.sigma(r, c));
  }
  j["sigma"] = rows;
  j["n"] = m.n;
  j["singular"] = m.singular;
  if (!m.diagnostic.empty()) j["diagnostic"] = m.diagnostic;
  return j;
}

inline MgdModel mgd_from_json(const nlohmann::json& j) {
  MgdModel m;
  try {
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto mu = j.at("mu").get<std::vector<double>>();
    const auto sigma = j.at("sigma").get<std::vector<double>>();
    const auto d = static_cast<Eigen::Index>(mu.size());
    detail::require(sigma.size() == mu.size() * mu.size(), "MgdModel JSON: sigma must be d*d");
    detail::require(m.feature_names.size() == mu.size(), "MgdModel JSON: feature_names size");
    m.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), d);
    m.sigma = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        sigma.data(), d, d);
    m.n = j.value("n", std::size_t{0});
    m.singular = j.value("singular", false);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("MgdModel JSON: ") + e.what());
  }
  return m;
}

}  // namespace ddmdrive
