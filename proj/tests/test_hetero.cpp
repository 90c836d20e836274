#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "hk/hetero_engine.hpp"
#include "hk/sync_engine.hpp"
#include "oracles.hpp"

namespace {

using hk::ConfidenceBounds;
using hk::HeteroStatus;
using hk::OpinionProfile;

OpinionProfile line(std::vector<double> v) { return OpinionProfile::scalar(v); }

TEST(ThreeAgentExample, ScenarioData) {
  const auto s = hk::three_agent_example();
  EXPECT_EQ(s.name, "paper-example-1");
  EXPECT_EQ(s.profile, line({-1.0, 1.0 / 3.0, 1.0}));
  EXPECT_EQ(s.bounds, ConfidenceBounds({0.5, 2.0, 0.5}));
}

TEST(ThreeAgentExample, MiddleAgentDecaysGeometrically) {
  const auto s = hk::three_agent_example();
  hk::HeteroOptions options;
  options.cap = 25;
  const auto trace = hk::run_hetero(s.profile, s.bounds, options);
  ASSERT_EQ(trace.profiles.size(), 26u);
  for (std::size_t t = 0; t <= 25; ++t) {
    const auto& x = trace.profiles[t];
    EXPECT_EQ(x(0, 0), -1.0);
    EXPECT_EQ(x(2, 0), 1.0);
    EXPECT_NEAR(x(1, 0), std::pow(3.0, -static_cast<double>(t + 1)), 1e-12) << "t=" << t;
  }
}

TEST(ThreeAgentExample, NoFiniteTerminationAndUnboundedSilence) {
  const auto s = hk::three_agent_example();
  hk::HeteroOptions options;
  options.cap = 100;
  options.movement_tol = 0.0;
  const auto trace = hk::run_hetero(s.profile, s.bounds, options);
  EXPECT_EQ(trace.status, HeteroStatus::cap);
  EXPECT_FALSE(trace.terminated());
  const auto report = hk::silence_report(trace);
  EXPECT_EQ(report.max_streak, (std::vector<std::size_t>{100, 0, 100}));
  EXPECT_EQ(report.global_max, 100u);
  EXPECT_FALSE(report.finite_termination);
  EXPECT_EQ(report.unbounded_agents, (std::vector<std::size_t>{0, 2}));
}

TEST(ThreeAgentExample, AsymptoticDetectionNearLimit) {
  const auto s = hk::three_agent_example();
  const auto trace = hk::run_hetero(s.profile, s.bounds);
  EXPECT_EQ(trace.status, HeteroStatus::asymptotic);
  EXPECT_FALSE(trace.terminated());
  EXPECT_NEAR(trace.final_profile(1, 0), 0.0, 1e-12);
}

TEST(ThreeAgentExample, UnderflowGivesStationaryNotFixedPoint) {
  // Without asymptotic detection the middle opinion underflows to zero; no
  // agent moves again yet the middle agent still observes three opinions.
  const auto s = hk::three_agent_example();
  hk::HeteroOptions options;
  options.movement_tol = 0.0;
  const auto trace = hk::run_hetero(s.profile, s.bounds, options);
  EXPECT_EQ(trace.status, HeteroStatus::stationary);
  EXPECT_FALSE(trace.terminated());
  EXPECT_EQ(trace.final_profile, line({-1.0, 0.0, 1.0}));
  EXPECT_EQ(hk::silence_report(trace).global_max, trace.steps);
}

TEST(RunHetero, DenseClusterHasNoSilence) {
  const auto trace = hk::run_hetero(line({0.0, 0.1, 0.2, 0.3}), ConfidenceBounds({0.5, 0.4, 0.6, 0.5}));
  EXPECT_EQ(trace.status, HeteroStatus::fixed_point);
  const auto report = hk::silence_report(trace);
  EXPECT_TRUE(report.finite_termination);
  EXPECT_EQ(report.global_max, 0u);
  for (std::size_t k : report.max_streak) EXPECT_LT(k, std::max<std::size_t>(report.run_length, 1));
}

TEST(RunHetero, HomogeneousRunMatchesSync) {
  const auto x = line({0.0, 0.5, 1.0});
  const auto trace = hk::run_hetero(x, ConfidenceBounds::uniform(3, 0.6));
  const auto sync = hk::run_sync(x, 0.6);
  EXPECT_TRUE(trace.terminated());
  EXPECT_EQ(trace.steps, sync.termination_time);
  EXPECT_EQ(trace.profiles, sync.profiles);
}

TEST(RunHetero, StreakResetsWhenAgentSeesOthers) {
  // Agent 2 starts isolated, is reached after the others drift toward it.
  const auto trace = hk::run_hetero(line({0.0, 0.4, 1.0}), ConfidenceBounds({0.5, 0.7, 0.5}));
  const auto report = hk::silence_report(trace);
  EXPECT_TRUE(report.finite_termination);
  EXPECT_LE(report.max_streak[2], trace.steps);
  EXPECT_EQ(trace.silence_streak.size(), 3u);
}

TEST(RunHetero, SizeMismatch) {
  EXPECT_THROW(hk::run_hetero(line({0.0, 1.0}), ConfidenceBounds({1.0})), hk::SizeError);
  EXPECT_THROW(hk::hetero_sync_step(line({0.0, 1.0}), ConfidenceBounds({1.0, 1.0, 1.0})), hk::SizeError);
}

TEST(HeteroStatus, Names) {
  EXPECT_EQ(hk::to_string(HeteroStatus::fixed_point), "fixed_point");
  EXPECT_EQ(hk::to_string(HeteroStatus::stationary), "stationary");
  EXPECT_EQ(hk::to_string(HeteroStatus::asymptotic), "asymptotic");
  EXPECT_EQ(hk::to_string(HeteroStatus::cap), "cap");
}

}  // namespace
