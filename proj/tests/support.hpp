#pragma once

// Independent reference computations used as test oracles. Nothing here
// calls into the library's numerical code.

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include "ddmdrive/ddm_params.hpp"
#include "ddmdrive/kinematics.hpp"

namespace oracle {

/// Probability that a Brownian motion with drift g and noise sigma, started
/// at z, reaches +b before -b. Uses the scale function s(x) = exp(-2gx/sigma^2).
inline double hit_upper_first(double g, double b, double z, double sigma) {
  if (g == 0.0) return (z + b) / (2.0 * b);
  const double c = -2.0 * g / (sigma * sigma);
  auto s = [&](double x) { return std::exp(c * x); };
  return (s(z) - s(-b)) / (s(b) - s(-b));
}

/// Mean absorption time for zero drift: (b^2 - z^2) / sigma^2.
inline double mean_exit_time_zero_drift(double b, double z, double sigma) {
  return (b * b - z * z) / (sigma * sigma);
}

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Moments {
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;  ///< 1/N normalisation
};

inline Moments sample_moments(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size(), m = rows.front().size();
  Moments out{std::vector<double>(m, 0.0), std::vector<std::vector<double>>(m, std::vector<double>(m, 0.0))};
  for (const auto& r : rows)
    for (std::size_t j = 0; j < m; ++j) out.mean[j] += r[j] / double(n);
  for (const auto& r : rows)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        out.cov[a][b] += (r[a] - out.mean[a]) * (r[b] - out.mean[b]) / double(n);
  return out;
}

/// Bivariate normal density written out by hand.
inline double bivariate_pdf(double x, double y, double mx, double my, double sxx, double sxy,
                            double syy) {
  const double det = sxx * syy - sxy * sxy;
  const double dx = x - mx, dy = y - my;
  const double q = (syy * dx * dx - 2.0 * sxy * dx * dy + sxx * dy * dy) / det;
  return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det));
}

}  // namespace oracle

namespace testdata {

inline std::filesystem::path fixtures() { return DDMDRIVE_FIXTURES_DIR; }

inline ddmdrive::DdmParams fixture(ddmdrive::ScenarioKind kind) {
  return ddmdrive::load_params(ddmdrive::fixture_path(fixtures(), kind));
}

}  // namespace testdata
