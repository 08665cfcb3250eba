#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ddmdrive/first_passage.hpp"
#include "ddmdrive/harness.hpp"
#include "support.hpp"

using namespace ddmdrive;

namespace {

ConstantDiffusion constant(double g, double b, double z, double sigma = 1.0) {
  ConstantDiffusion m;
  m.drift = g;
  m.bound = b;
  m.start_point = z;
  m.noise = sigma;
  m.limit = 60.0;
  return m;
}

GridConfig fine() {
  GridConfig c;
  c.dx = 0.01;
  c.dt = 0.001;
  c.horizon = 60.0;
  c.survival_tol = 1e-13;
  return c;
}

}  // namespace

TEST(FirstPassage, ChoiceSplitMatchesClosedForm) {
  for (double g : {-1.0, 0.0, 1.0}) {
    for (double b : {0.5, 1.0}) {
      for (double z : {-b / 2, 0.0, b / 2}) {
        const auto t = first_passage_distribution(constant(g, b, z), fine());
        EXPECT_NEAR(t.total_upper(), oracle::hit_upper_first(g, b, z, 1.0), 1e-3)
            << g << ' ' << b << ' ' << z;
        EXPECT_NEAR(t.total_lower(), 1.0 - oracle::hit_upper_first(g, b, z, 1.0), 1e-3);
      }
    }
  }
}

TEST(FirstPassage, NonUnitNoise) {
  const auto t = first_passage_distribution(constant(0.7, 0.4, 0.1, 0.35), fine());
  EXPECT_NEAR(t.total_upper(), oracle::hit_upper_first(0.7, 0.4, 0.1, 0.35), 1e-3);
}

TEST(FirstPassage, MeanExitTimeZeroDrift) {
  const double b = 1.0, z = 0.3;
  const auto t = first_passage_distribution(constant(0.0, b, z), fine());
  double mean = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) mean += t.t[i] * (t.upper[i] + t.lower[i]);
  EXPECT_NEAR(mean, oracle::mean_exit_time_zero_drift(b, z, 1.0), 0.01);
}

TEST(FirstPassage, StartOnBoundary) {
  const auto up = first_passage_distribution(constant(0.0, 1.0, 1.0), fine());
  ASSERT_EQ(up.size(), 1u);
  EXPECT_EQ(up.upper[0], 1.0);
  EXPECT_EQ(up.lower[0], 0.0);
  const auto lo = first_passage_distribution(constant(0.0, 1.0, -1.0), fine());
  EXPECT_EQ(lo.lower[0], 1.0);
}

TEST(FirstPassage, ConservesMass) {
  const auto p = testdata::fixture(ScenarioKind::RearEnd);
  const auto tl = make_scenario(ScenarioKind::RearEnd, 23.32);
  GridConfig c;
  c.dx = 0.01;
  c.dt = 0.002;
  const auto t = first_passage_distribution(tl, p, 0.0, c);
  double absorbed = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_GE(t.upper[i], 0.0);
    EXPECT_GE(t.lower[i], 0.0);
    absorbed += t.upper[i] + t.lower[i];
    EXPECT_NEAR(absorbed + t.survive[i], 1.0, 1e-9);
    EXPECT_LE(absorbed, 1.0 + 1e-12);
  }
}

TEST(FirstPassage, AbsorbsEverythingEventually) {
  GridConfig c = fine();
  double prev = 0.0;
  for (double h : {0.5, 2.0, 8.0, 40.0}) {
    c.horizon = h;
    const auto t = first_passage_distribution(constant(0.2, 1.0, 0.0), c);
    const double total = t.total_upper() + t.total_lower();
    EXPECT_GE(total, prev - 1e-12);
    EXPECT_LE(total, 1.0 + 1e-12);
    prev = total;
  }
  EXPECT_NEAR(prev, 1.0, 1e-9);
}

TEST(FirstPassage, TimeStepConvergence) {
  // backward Euler in time: halving dt should roughly halve the error
  for (ScenarioKind kind : kAllScenarios) {
    const auto p = testdata::fixture(kind);
    const auto tl = make_scenario(kind, default_speed_groups(kind)[1]);
    std::vector<double> lower;
    for (double dt : {0.004, 0.002, 0.001}) {
      GridConfig c;
      c.dx = 0.01;
      c.dt = dt;
      lower.push_back(first_passage_distribution(tl, p, 0.0, c).total_lower());
    }
    const double coarse = std::abs(lower[0] - lower[1]);
    const double finer = std::abs(lower[1] - lower[2]);
    EXPECT_LT(finer, 0.01) << to_string(kind);
    if (coarse > 1e-6) { EXPECT_LT(finer, 0.7 * coarse) << to_string(kind); }
  }
}

TEST(FirstPassage, TooCoarseGridNamesTheBound) {
  GridConfig c;
  c.dx = 0.3;
  try {
    first_passage_distribution(constant(0.0, 1.0, 0.0), c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("quarter of the boundary"), std::string::npos);
  }
  c.dx = -1.0;
  EXPECT_THROW(first_passage_distribution(constant(0.0, 1.0, 0.0), c), ConfigError);
}

TEST(FirstPassage, CsvExport) {
  GridConfig c = fine();
  c.horizon = 0.01;
  const auto t = first_passage_distribution(constant(0.0, 1.0, 0.0), c);
  std::ostringstream out;
  t.write_csv(out);
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,p_upper,p_lower,p_survive");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), std::ptrdiff_t(t.size() + 1));
}

TEST(FirstPassage, AgreesWithMonteCarloOnScenario) {
  const auto p = testdata::fixture(ScenarioKind::CutIn);
  const auto tl = make_scenario(ScenarioKind::CutIn, 33.85);
  GridConfig c;
  c.dx = 0.005;
  c.dt = 0.001;
  const auto t = first_passage_distribution(tl, p, 0.0, c);
  const auto mc = choice_probabilities(tl, p, 0.0, 4000, 17);
  // fixed onset on the grid vs sampled onset in MC; cut-in coefficients are
  // nearly flat in time so both agree to sampling error
  EXPECT_NEAR(mc.p_brake, t.total_lower(), 3.5 * std::sqrt(0.25 / 4000) + 0.01);
}
