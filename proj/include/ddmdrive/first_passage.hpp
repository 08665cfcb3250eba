#pragma once

// Grid solver for the first-passage time distribution of a two-boundary
// diffusion with time-varying drift and boundaries.
//
// The evidence axis is discretized into nodes spaced dx apart and anchored
// at the start point, so the initial mass sits exactly on a node. Between
// neighbouring nodes probability moves with Scharfetter-Gummel fluxes, which
// reproduce the exponential steady profile of constant-coefficient
// advection-diffusion exactly at the nodes. The cell next to each boundary is
// shortened so the absorbing boundary sits at its true (off-grid) position;
// the grid is re-cut every step as the boundary moves. Time stepping is
// backward Euler on node masses, so every step conserves mass exactly
// (absorbed + surviving = 1 up to round-off) and masses stay non-negative.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ddmdrive/ddm.hpp"
#include "ddmdrive/error.hpp"

namespace ddmdrive {

struct GridConfig {
  double dx = 0.005;  ///< evidence resolution
  double dt = 0.001;  ///< time step (s)
  double horizon = 10.0;  ///< absolute time horizon (s), onset included
  /// Kinematic time at which accumulation starts; defaults to the model's
  /// mean non-decision time.
  std::optional<double> onset;
  /// Stop early once the surviving mass drops below this.
  double survival_tol = 1e-12;
};

/// Per-step absorbed probability. Row 0 is the accumulation onset (mass
/// absorbed immediately when the start point is already outside the
/// boundaries); row n covers the step ending at accumulation time n*dt.
struct FirstPassageTable {
  double dt = 0.0;
  double onset = 0.0;
  std::vector<double> t;
  std::vector<double> upper;
  std::vector<double> lower;
  std::vector<double> survive;

  std::size_t size() const { return t.size(); }
  double total_upper() const { return sum(upper); }
  double total_lower() const { return sum(lower); }
  double final_survival() const { return survive.empty() ? 1.0 : survive.back(); }

  void write_csv(std::ostream& out) const {
    out << "t,p_upper,p_lower,p_survive\n";
    out.precision(12);
    for (std::size_t i = 0; i < t.size(); ++i) {
      out << t[i] << ',' << upper[i] << ',' << lower[i] << ',' << survive[i] << '\n';
    }
  }

 private:
  static double sum(const std::vector<double>& v) {
    // Kahan summation; tables can have 10^4+ tiny entries.
    double s = 0.0, c = 0.0;
    for (double x : v) {
      const double y = x - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    return s;
  }
};

namespace detail {

/// Bernoulli function z / (e^z - 1).
inline double bernoulli(double z) {
  if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z;
  if (z > 700.0) return 0.0;
  return z / std::expm1(z);
}

/// Solves a tridiagonal system in place (Thomas algorithm). `sub[i]` couples
/// row i to i-1, `sup[i]` row i to i+1. The systems built here are column
/// diagonally dominant, so no pivoting is needed.
inline void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag,
                              std::vector<double>& sup, std::vector<double>& rhs,
                              std::size_t first, std::size_t last) {
  for (std::size_t i = first + 1; i <= last; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[last] /= diag[last];
  for (std::size_t i = last; i-- > first;) {
    rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
  }
}

}  // namespace detail

template <DecisionProcess Model>
FirstPassageTable first_passage_distribution(const Model& model, const GridConfig& grid = {}) {
  detail::require<ConfigError>(grid.dx > 0.0 && std::isfinite(grid.dx),
                               "grid: dx must be positive");
  detail::require<ConfigError>(grid.dt > 0.0 && std::isfinite(grid.dt),
                               "grid: dt must be positive");
  const double onset = grid.onset.value_or(model.nominal_onset());
  const double horizon = std::min(grid.horizon, model.time_limit());
  detail::require<ConfigError>(onset >= 0.0 && onset <= horizon,
                               "grid: accumulation onset outside the time horizon");

  const double sigma = model.noise_scale();
  const double diffusion = 0.5 * sigma * sigma;
  const double z0 = model.start();
  const double dx = grid.dx;

  FirstPassageTable table;
  table.dt = grid.dt;
  table.onset = onset;

  CoefficientPoint point = model.at(onset);
  if (dx > 0.25 * point.bound) {
    throw ConfigError("grid too coarse: dx = " + std::to_string(dx) +
                      " exceeds a quarter of the boundary (" + std::to_string(point.bound) +
                      ") at accumulation onset");
  }

  // Nodes x_i = z0 + (i - origin) dx spanning the widest possible boundary.
  const double ceiling = std::max(model.bound_ceiling(), point.bound);
  const auto below = static_cast<std::size_t>(std::ceil((ceiling + z0) / dx)) + 2;
  const auto above = static_cast<std::size_t>(std::ceil((ceiling - z0) / dx)) + 2;
  const std::size_t n = below + above + 1;
  const std::size_t origin = below;
  auto x_of = [&](std::size_t i) { return z0 + (double(i) - double(origin)) * dx; };

  std::vector<double> mass(n, 0.0);
  std::vector<double> sub(n), diag(n), sup(n), volume(n);

  auto record = [&](double t, double up, double lo, double surv) {
    table.t.push_back(t);
    table.upper.push_back(up);
    table.lower.push_back(lo);
    table.survive.push_back(surv);
  };

  if (z0 >= point.bound) {
    record(0.0, 1.0, 0.0, 0.0);
    return table;
  }
  if (z0 <= -point.bound) {
    record(0.0, 0.0, 1.0, 0.0);
    return table;
  }
  mass[origin] = 1.0;
  record(0.0, 0.0, 0.0, 1.0);

  const auto steps = static_cast<std::size_t>(std::floor((horizon - onset) / grid.dt + 1e-9));
  double surviving = 1.0;

  for (std::size_t step = 1; step <= steps; ++step) {
    const double tau = double(step) * grid.dt;
    point = model.at(onset + tau);
    const double b = std::max(point.bound, 0.0);
    const double g = point.drift;

    // Interior nodes lie strictly inside (-b, b).
    const double eps = 1e-12 * dx;
    double absorbed_up = 0.0, absorbed_lo = 0.0;
    std::size_t lo = n, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = x_of(i);
      if (x >= b - eps) {
        absorbed_up += mass[i];
        mass[i] = 0.0;
      } else if (x <= -b + eps) {
        absorbed_lo += mass[i];
        mass[i] = 0.0;
      } else {
        lo = std::min(lo, i);
        hi = std::max(hi, i);
      }
    }

    if (lo > hi) {
      record(tau, absorbed_up, absorbed_lo, 0.0);
      surviving = 0.0;
      break;
    }

    const double h_up = b - x_of(hi);
    const double h_lo = x_of(lo) + b;
    for (std::size_t i = lo; i <= hi; ++i) {
      const double left = i == lo ? h_lo : dx;
      const double right = i == hi ? h_up : dx;
      volume[i] = 0.5 * (left + right);
    }

    // Density flux coefficients across a link of length h: upward carries
    // D/h * B(-g h / D) of the lower node, downward D/h * B(g h / D) of the
    // upper node.
    auto flux_up = [&](double h) { return diffusion / h * detail::bernoulli(-g * h / diffusion); };
    auto flux_dn = [&](double h) { return diffusion / h * detail::bernoulli(g * h / diffusion); };
    const double up_dx = flux_up(dx);
    const double dn_dx = flux_dn(dx);
    const double exit_up = flux_up(h_up);
    const double exit_lo = flux_dn(h_lo);

    for (std::size_t i = lo; i <= hi; ++i) {
      const double out_up = (i == hi ? exit_up : up_dx) / volume[i];
      const double out_dn = (i == lo ? exit_lo : dn_dx) / volume[i];
      diag[i] = 1.0 + grid.dt * (out_up + out_dn);
      sub[i] = i > lo ? -grid.dt * up_dx / volume[i - 1] : 0.0;
      sup[i] = i < hi ? -grid.dt * dn_dx / volume[i + 1] : 0.0;
    }
    detail::solve_tridiagonal(sub, diag, sup, mass, lo, hi);

    absorbed_up += grid.dt * exit_up / volume[hi] * mass[hi];
    absorbed_lo += grid.dt * exit_lo / volume[lo] * mass[lo];
    surviving = std::max(0.0, surviving - absorbed_up - absorbed_lo);
    record(tau, absorbed_up, absorbed_lo, surviving);
    if (surviving < grid.survival_tol) break;
  }
  return table;
}

/// Convenience overload for the scenario model.
inline FirstPassageTable first_passage_distribution(const ScenarioTimeline& timeline,
                                                    const DdmParams& params, double risk,
                                                    const GridConfig& grid = {}) {
  return first_passage_distribution(DdmEvaluator(timeline, params, risk), grid);
}

}  // namespace ddmdrive
