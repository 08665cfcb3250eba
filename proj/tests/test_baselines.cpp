#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ddmdrive/baselines.hpp"
#include "ddmdrive/harness.hpp"
#include "ddmdrive/random.hpp"
#include "support.hpp"

using namespace ddmdrive;

namespace {

VehicleState at(double s, double v, int lane = 0) {
  VehicleState x;
  x.s = s;
  x.v = v;
  x.lane = lane;
  return x;
}

IdmParams idm_with(double v0) {
  IdmParams p;
  p.v0 = v0;
  return p;
}

GippsParams gipps_with(double v) {
  GippsParams p;
  p.desired_speed = v;
  return p;
}

}  // namespace

TEST(Idm, FreeFlowIdentities) {
  const IdmParams p = idm_with(30.0);
  EXPECT_EQ(idm_accel(at(0, 30.0), std::nullopt, p), 0.0);
  EXPECT_EQ(idm_accel(at(0, 0.0), std::nullopt, p), p.a);
  EXPECT_NEAR(idm_accel(at(0, 15.0), std::nullopt, p), p.a * (1.0 - 1.0 / 16.0), 1e-15);
}

TEST(Idm, EquilibriumSpacing) {
  const IdmParams p = idm_with(30.0);
  for (double v : {5.0, 12.0, 20.0, 28.0}) {
    const double s_star = p.s0 + v * p.T;
    // exact equilibrium: s = s* / sqrt(1 - (v/v0)^delta)
    const double s_eq = s_star / std::sqrt(1.0 - std::pow(v / 30.0, p.delta));
    EXPECT_NEAR(idm_accel(at(0, v), Leader{at(100, v), s_eq}, p), 0.0, 1e-12) << v;
    // at gap s0 + vT only the free-road term is left
    EXPECT_NEAR(idm_accel(at(0, v), Leader{at(100, v), s_star}, p), -p.a * std::pow(v / 30.0, p.delta),
                1e-12);
  }
  // well below the desired speed that residue is negligible
  EXPECT_NEAR(idm_accel(at(0, 8.0), Leader{at(100, 8.0), p.s0 + 8.0 * p.T}, p), 0.0, 0.01);
}

TEST(Idm, ClosedGapBrakesHardest) {
  const IdmParams p = idm_with(25.0);
  EXPECT_EQ(idm_accel(at(0, 20.0), Leader{at(5, 20.0), 0.0}, p), -p.max_decel);
  EXPECT_EQ(idm_accel(at(0, 20.0), Leader{at(5, 20.0), -3.0}, p), -p.max_decel);
}

TEST(Idm, MonotoneInApproachRateAndGap) {
  const IdmParams p = idm_with(30.0);
  Rng rng(7);
  for (int rep = 0; rep < 500; ++rep) {
    const double v = 1.0 + 30.0 * uniform01(rng);
    const double gap = 1.0 + 80.0 * uniform01(rng);
    const double dv1 = -5.0 + 10.0 * uniform01(rng);
    const double dv2 = dv1 + 0.01 + uniform01(rng);
    const auto a1 = idm_accel(at(0, v), Leader{at(gap, v - dv1), gap}, p);
    const auto a2 = idm_accel(at(0, v), Leader{at(gap, v - dv2), gap}, p);
    const double s_star1 = p.s0 + v * p.T + v * dv1 / (2.0 * std::sqrt(p.a * p.b));
    if (s_star1 > 0.0) { EXPECT_LT(a2, a1); }
    if (s_star1 != 0.0) {
      const double further = gap + 0.01 + uniform01(rng);
      EXPECT_GT(idm_accel(at(0, v), Leader{at(further, v - dv1), further}, p), a1);
    }
  }
}

TEST(Gipps, FreeRoadApproachesDesiredSpeed) {
  const GippsParams p = gipps_with(30.0);
  double v = 20.0;
  for (int i = 0; i < 400; ++i) {
    const double next = gipps_speed(at(0, v), Leader{at(1e6, 30.0), 1e6}, p, p.tau);
    EXPECT_GE(next, v);
    EXPECT_LE(next, 30.0);
    v = next;
  }
  EXPECT_NEAR(v, 30.0, 1e-3);
  EXPECT_EQ(gipps_speed(at(0, 30.0), std::nullopt, p, p.tau), 30.0);
}

TEST(Gipps, StationaryLeaderAtMinimumGap) {
  const GippsParams p = gipps_with(30.0);
  for (double v : {0.5, 3.0, 10.0, 25.0}) {
    EXPECT_EQ(gipps_speed(at(0, v), Leader{at(50, 0.0), p.s0}, p, p.tau), 0.0) << v;
  }
}

TEST(Gipps, NeverAboveAccelerationBranch) {
  const GippsParams p = gipps_with(30.0);
  Rng rng(9);
  for (int rep = 0; rep < 1000; ++rep) {
    const VehicleState ego = at(0, 35.0 * uniform01(rng));
    const double gap = 60.0 * uniform01(rng);
    const Leader lead{at(gap, 35.0 * uniform01(rng)), gap};
    const double v = gipps_speed(ego, lead, p, p.tau);
    EXPECT_LE(v, gipps_acceleration_branch(ego, p));
    EXPECT_GE(v, 0.0);
  }
}

TEST(Gipps, BranchTie) {
  const GippsParams p = gipps_with(30.0);
  const VehicleState ego = at(0, 20.0);
  const double v_acc = gipps_acceleration_branch(ego, p);
  // safe branch grows with the gap; bisect for the tie
  double lo = p.s0, hi = 200.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double safe = *gipps_safe_branch(ego, Leader{at(mid, 20.0), mid}, p);
    (safe < v_acc ? lo : hi) = mid;
  }
  const Leader lead{at(lo, 20.0), lo};
  EXPECT_NEAR(*gipps_safe_branch(ego, lead, p), v_acc, 1e-9);
  EXPECT_NEAR(gipps_speed(ego, lead, p, p.tau), v_acc, 1e-9);
}

TEST(Mobil, ZeroIncentiveStays) {
  MobilNeighbors n;
  const VehicleState ego = at(0, 25.0);
  EXPECT_FALSE(mobil_decide(ego, n, idm_with(25.0), MobilParams{}));
}

TEST(Mobil, SelfishGainChanges) {
  MobilNeighbors n;
  n.current_lead = Leader{at(20, 15.0), 15.0};  // slow car close ahead
  MobilParams p;
  p.politeness = 0.0;
  const VehicleState ego = at(0, 25.0);
  const IdmParams idm = idm_with(25.0);
  // hand check of the incentive: target lane empty gives a = 0
  const double gain = 0.0 - idm_accel(ego, n.current_lead, idm);
  ASSERT_GT(gain, p.threshold);
  EXPECT_TRUE(mobil_decide(ego, n, idm, p));
}

TEST(Mobil, SafetyVeto) {
  MobilNeighbors n;
  n.current_lead = Leader{at(10, 5.0), 5.0};
  n.new_follower = at(-8, 33.0, 1);
  n.ego_gap_to_new_follower = 3.0;
  const VehicleState ego = at(0, 20.0);
  const IdmParams idm = idm_with(25.0);
  MobilParams p;
  p.politeness = 0.0;
  ASSERT_LT(idm_accel(*n.new_follower, Leader{ego, 3.0}, idm_with(33.0)), -p.b_safe);
  EXPECT_FALSE(mobil_decide(ego, n, idm, p));
  p.b_safe = 1e6;
  EXPECT_TRUE(mobil_decide(ego, n, idm, p));
}

TEST(Mobil, InvariantToConstantShift) {
  Rng rng(13);
  MobilParams p;
  p.b_safe = 1e9;  // the veto compares against an absolute level, so keep it out of play
  int changes = 0;
  for (int rep = 0; rep < 400; ++rep) {
    const VehicleState ego = at(0, 15.0 + 15.0 * uniform01(rng));
    MobilNeighbors n;
    auto maybe_lead = [&](int lane) -> std::optional<Leader> {
      if (uniform01(rng) < 0.3) return std::nullopt;
      const double gap = 2.0 + 60.0 * uniform01(rng);
      return Leader{at(gap + 5.0, 10.0 + 20.0 * uniform01(rng), lane), gap};
    };
    n.current_lead = maybe_lead(0);
    n.target_lead = maybe_lead(1);
    if (uniform01(rng) < 0.7) {
      n.new_follower = at(-20.0, 15.0 + 15.0 * uniform01(rng), 1);
      n.ego_gap_to_new_follower = 3.0 + 30.0 * uniform01(rng);
      n.new_follower_lead_before = n.target_lead;
    }
    if (uniform01(rng) < 0.7) {
      n.old_follower = at(-20.0, 15.0 + 15.0 * uniform01(rng), 0);
      n.ego_gap_to_old_follower = 3.0 + 30.0 * uniform01(rng);
      n.old_follower_lead_after = n.current_lead;
    }
    p.politeness = uniform01(rng);
    const double shift = -5.0 + 10.0 * uniform01(rng);
    auto base = [&](const VehicleState& v, const std::optional<Leader>& lead) {
      return idm_accel(v, lead, idm_with(30.0));
    };
    auto shifted = [&](const VehicleState& v, const std::optional<Leader>& lead) {
      return base(v, lead) + shift;
    };
    const bool a = mobil_decide(ego, n, base, p);
    EXPECT_EQ(a, mobil_decide(ego, n, shifted, p));
    changes += a;
  }
  EXPECT_GT(changes, 0);
  EXPECT_LT(changes, 400);
}

TEST(RunBaseline, IdmNeverSteersInCutIn) {
  for (double v : default_speed_groups(ScenarioKind::CutIn)) {
    const auto o = run_baseline(make_scenario(ScenarioKind::CutIn, v), BaselineModel::Idm, {});
    EXPECT_NE(o.decision.choice, Choice::Steer) << v;
    EXPECT_FALSE(o.collision.collided) << v;
    for (const auto& f : o.rollout.frames) EXPECT_EQ(f[VehicleId::A].y, 0.0);
  }
  // at 29.39 the peak IDM deceleration stays just above the brake threshold
  for (double v : {25.82, 31.69, 33.85}) {
    const auto o = run_baseline(make_scenario(ScenarioKind::CutIn, v), BaselineModel::Idm, {});
    EXPECT_EQ(o.decision.choice, Choice::Brake) << v;
  }
}

TEST(RunBaseline, GippsBehindHardBrakingLead) {
  const auto o = run_baseline(make_scenario(ScenarioKind::RearEnd, 22.22), BaselineModel::Gipps, {});
  EXPECT_FALSE(o.collision.collided);
  EXPECT_EQ(o.decision.choice, Choice::Brake);
  for (double v : default_speed_groups(ScenarioKind::RearEnd)) {
    EXPECT_FALSE(
        run_baseline(make_scenario(ScenarioKind::RearEnd, v), BaselineModel::Gipps, {}).collision.collided)
        << v;
  }
}

TEST(RunBaseline, MobilVetoKeepsLane) {
  auto cfg = ScenarioConfig::defaults_for(ScenarioKind::RearEnd);
  cfg.gap_ab = -20.0;  // B trails the ego in the target lane
  cfg.horizon = 1.5;   // B stays behind for this long
  const auto tl = make_scenario(ScenarioKind::RearEnd, 25.8, cfg);
  BaselineParams p;
  const auto free = run_baseline(tl, BaselineModel::Mobil, p);
  EXPECT_EQ(free.decision.choice, Choice::Steer);
  p.mobil.b_safe = 1e-3;
  const auto vetoed = run_baseline(tl, BaselineModel::Mobil, p);
  EXPECT_NE(vetoed.decision.choice, Choice::Steer);
  for (const auto& f : vetoed.rollout.frames) EXPECT_EQ(f[VehicleId::A].y, 0.0);
}

TEST(RunBaseline, RtIsTheLabelFrame) {
  const auto tl = make_scenario(ScenarioKind::RearEnd, 19.56);
  BaselineParams p;
  const auto o = run_baseline(tl, BaselineModel::Idm, p);
  ASSERT_EQ(o.decision.choice, Choice::Brake);
  ASSERT_TRUE(o.decision.rt.has_value());
  const auto k = static_cast<std::size_t>(std::llround(*o.decision.rt / tl.dt));
  EXPECT_LT(o.rollout.frames[k + 1][VehicleId::A].a, p.brake_threshold);
  for (std::size_t i = 1; i <= k; ++i) EXPECT_GE(o.rollout.frames[i][VehicleId::A].a, p.brake_threshold);
  EXPECT_EQ(o.decision.t_nd, 0.0);
}

TEST(RunBaseline, Deterministic) {
  for (ScenarioKind kind : kAllScenarios) {
    for (BaselineModel m : {BaselineModel::Idm, BaselineModel::Gipps, BaselineModel::Mobil}) {
      const auto tl = make_scenario(kind, default_speed_groups(kind)[2]);
      const auto a = run_baseline(tl, m, {});
      const auto b = run_baseline(tl, m, {});
      EXPECT_EQ(a.decision.choice, b.decision.choice);
      EXPECT_EQ(a.decision.rt, b.decision.rt);
      EXPECT_EQ(a.collision.collided, b.collision.collided);
      for (std::size_t k = 0; k < a.rollout.frames.size(); ++k) {
        ASSERT_EQ(a.rollout.frames[k][VehicleId::A], b.rollout.frames[k][VehicleId::A]);
      }
    }
  }
}

TEST(RunBaseline, MobilNeedsTargetLane) {
  auto cfg = ScenarioConfig::defaults_for(ScenarioKind::CutIn);
  cfg.target_lane = std::nullopt;
  const auto tl = make_scenario(ScenarioKind::CutIn, 29.39, cfg);
  EXPECT_THROW(run_baseline(tl, BaselineModel::Mobil, {}), ValidationError);
  EXPECT_NO_THROW(run_baseline(tl, BaselineModel::Idm, {}));
}

TEST(BaselineModelNames, ParseAndPrint) {
  for (BaselineModel m : {BaselineModel::Idm, BaselineModel::Gipps, BaselineModel::Mobil}) {
    EXPECT_EQ(parse_baseline_model(to_string(m)), m);
  }
  EXPECT_THROW(parse_baseline_model("ACC"), ValidationError);
}

TEST(BaselineJson, FixtureMatchesDefaults) {
  const auto p = baseline_params_from_json(read_json_file(testdata::fixtures() / "baselines.json"));
  const BaselineParams d;
  EXPECT_EQ(to_json(p), to_json(d));
  EXPECT_EQ(to_json(baseline_params_from_json(to_json(p))), to_json(p));
  EXPECT_THROW(baseline_params_from_json(nlohmann::json::parse(R"({"mobil": {"politeness": 2}})")),
               ValidationError);
  EXPECT_THROW(baseline_params_from_json(nlohmann::json::parse(R"({"gipps": {"b_max": 3}})")),
               ValidationError);
  EXPECT_THROW(baseline_params_from_json(nlohmann::json::parse(R"({"idm": {"T": "long"}})")),
               ValidationError);
}
