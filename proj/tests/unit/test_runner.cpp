#include <gtest/gtest.h>

#include <sstream>

#include "ppcdom/error.hpp"
#include "ppcdom/io.hpp"
#include "ppcdom/runner.hpp"
#include "ppcdom/scenario.hpp"
#include "small_scenario.hpp"

using namespace ppcdom;

TEST(Method, Names) {
  for (Method m : {Method::kPpcRbf, Method::kBaselineRbf, Method::kPpcBroyden, Method::kBaselineBroyden}) {
    EXPECT_EQ(parse_method(to_string(m)), m);
  }
  EXPECT_TRUE(uses_barrier(Method::kPpcBroyden));
  EXPECT_FALSE(uses_barrier(Method::kBaselineRbf));
  EXPECT_TRUE(uses_rbf(Method::kBaselineRbf));
  EXPECT_THROW(parse_method("pid"), ConfigError);
}

TEST(Describe, Quantiles) {
  const Statistics s = describe({4.0, 1.0, 3.0, 2.0, 5.0});
  EXPECT_EQ(s.median, 3.0);
  EXPECT_EQ(s.q1, 2.0);
  EXPECT_EQ(s.q3, 4.0);
  EXPECT_EQ(describe({1.0, 2.0}).median, 1.5);
  EXPECT_EQ(describe({7.0}).iqr(), 0.0);
}

TEST(Babble, SampleShapesAndBounds) {
  const Scenario s = parse_scenario(small_scenario_json());
  const ScenarioSetup setup = prepare(s);
  const std::vector<BabbleSample> log = babble(setup.initial, setup.keypoints, s, 7);
  ASSERT_EQ(log.size(), 30u);
  for (const BabbleSample& b : log) {
    EXPECT_EQ(b.x.size(), kControlDim + 3 * setup.keypoints.size());
    EXPECT_EQ(b.pdot.size(), 3 * setup.keypoints.size());
    EXPECT_LE(b.u.cwiseAbs().maxCoeff(), s.controller.speed_limit);
  }
  const std::vector<BabbleSample> again = babble(setup.initial, setup.keypoints, s, 7);
  EXPECT_EQ(again.back().pdot, log.back().pdot);
}

TEST(Run, TrivialTask) {
  Scenario s = parse_scenario(small_scenario_json("[]", 2.0));
  s.noise_std = 0.0;
  for (Method m : {Method::kPpcRbf, Method::kBaselineBroyden}) {
    const RunResult r = run(s, m, 3);
    EXPECT_TRUE(r.success) << r.failure;
    EXPECT_EQ(r.convergence_time, 0.0);
    EXPECT_EQ(r.violation_count, 0);
    for (const StepRecord& step : r.log.steps) EXPECT_LE(step.u.norm(), 1e-12);
  }
}

TEST(Run, SmallTaskConvergesInsideTheFunnel) {
  const Scenario s = parse_scenario(small_scenario_json());
  const RunResult r = run(s, Method::kPpcRbf, 1);
  EXPECT_TRUE(r.completed) << r.failure;
  EXPECT_TRUE(r.success) << r.failure;
  EXPECT_EQ(r.violation_count, 0);
  EXPECT_EQ(r.appendix_failures, 0);
  EXPECT_EQ(r.negative_ze, 0);
  ASSERT_FALSE(r.log.steps.empty());
  EXPECT_EQ(r.log.steps.size(), static_cast<std::size_t>(std::lround(4.0 / s.dt)));
  for (const StepRecord& step : r.log.steps) {
    EXPECT_TRUE(std::isfinite(step.stability.v1));
    EXPECT_LT(step.xi.maxCoeff(), 1.0);
  }
  EXPECT_LT(r.final_error_inf, s.resolved_success_threshold());
}

TEST(Run, Deterministic) {
  const Scenario s = parse_scenario(small_scenario_json());
  for (Method m : {Method::kPpcRbf, Method::kPpcBroyden}) {
    std::ostringstream a;
    std::ostringstream b;
    write_csv(run(s, m, 5).log, a);
    write_csv(run(s, m, 5).log, b);
    EXPECT_EQ(a.str(), b.str());
  }
  std::ostringstream c;
  std::ostringstream d;
  write_csv(run(s, Method::kPpcRbf, 5).log, c);
  write_csv(run(s, Method::kPpcRbf, 6).log, d);
  EXPECT_NE(c.str(), d.str());
}

TEST(Run, StageResetReanchorsTheFunnel) {
  const Scenario base = load_scenario("task_b");
  Scenario s = base;
  s.stages[0].duration = 2.0;
  s.stages[1].duration = 2.0;
  s.stage_pause = 1.0;
  const RunResult r = run(s, Method::kPpcRbf, 2);
  ASSERT_TRUE(r.completed) << r.failure;
  int resets = 0;
  for (std::size_t i = 1; i < r.log.steps.size(); ++i) {
    const StepRecord& prev = r.log.steps[i - 1];
    const StepRecord& cur = r.log.steps[i];
    if (cur.t0 != prev.t0) {
      ++resets;
      EXPECT_EQ(cur.stage, 1);
      EXPECT_NEAR(cur.t0[0], cur.stability.t, 1e-12);
      for (Eigen::Index c = 0; c < cur.upper.size(); ++c) EXPECT_DOUBLE_EQ(cur.upper[c], cur.mu0[c]);
    }
  }
  EXPECT_EQ(resets, 1);
}

TEST(Compare, SingleAndDuplicatedMethods) {
  const Scenario s = parse_scenario(small_scenario_json());
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const ComparisonSummary single = compare(s, {Method::kBaselineRbf}, seeds, 1);
  ASSERT_EQ(single.methods.size(), 1u);
  EXPECT_EQ(single.methods[0].runs, 3);
  EXPECT_EQ(single.methods[0].results.size(), 3u);
  EXPECT_TRUE(single.methods[0].results[0].log.steps.empty());

  const ComparisonSummary twice = compare(s, {Method::kPpcRbf, Method::kPpcRbf}, {3, 1, 2}, 2);
  ASSERT_EQ(twice.methods.size(), 2u);
  const MethodSummary& a = twice.methods[0];
  const MethodSummary& b = twice.methods[1];
  EXPECT_EQ(a.steady_state_error.median, b.steady_state_error.median);
  EXPECT_EQ(a.steady_state_error.iqr(), b.steady_state_error.iqr());
  EXPECT_EQ(a.convergence_time.median, b.convergence_time.median);
  EXPECT_EQ(a.success_rate, b.success_rate);
  EXPECT_EQ(a.results[0].seed, 1u);
  EXPECT_EQ(a.results[2].seed, 3u);
}
