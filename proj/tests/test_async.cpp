#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "hk/async_engine.hpp"
#include "hk/game.hpp"
#include "oracles.hpp"

namespace {

using hk::OpinionProfile;
using hk::Scheduler;

OpinionProfile line(std::vector<double> v) { return OpinionProfile::scalar(v); }

TEST(AsyncStep, Examples) {
  EXPECT_EQ(hk::async_step(line({0.0, 1.0, 5.0}), 1.5, 1), line({0.0, 0.5, 5.0}));
  EXPECT_EQ(hk::async_step(line({0.0, 1.0, 5.0}), 1.5, 2), line({0.0, 1.0, 5.0}));
  EXPECT_ANY_THROW(hk::async_step(line({0.0, 1.0}), 1.0, 2));
}

TEST(AsyncStep, NoSnappingOfNearlyCoincidentAgents) {
  // The updater lands within 1e-9 of agent 0 but nothing else moves.
  const auto x = line({0.0, 1e-10, 2e-10});
  const auto next = hk::async_step(x, 1.0, 2);
  EXPECT_EQ(next(0, 0), 0.0);
  EXPECT_EQ(next(1, 0), 1e-10);
}

TEST(Scheduler, UniformIsReproducibleAndCoversAgents) {
  Scheduler a = Scheduler::uniform(42), b = Scheduler::uniform(42), c = Scheduler::uniform(43);
  std::vector<std::size_t> sa, sb, sc;
  for (int k = 0; k < 200; ++k) {
    sa.push_back(a.next(5));
    sb.push_back(b.next(5));
    sc.push_back(c.next(5));
  }
  EXPECT_EQ(sa, sb);
  EXPECT_NE(sa, sc);
  EXPECT_EQ(std::set<std::size_t>(sa.begin(), sa.end()).size(), 5u);
}

TEST(Scheduler, RoundRobinAndScripted) {
  Scheduler rr = Scheduler::round_robin(4);
  EXPECT_EQ(rr.next(3), 1u);
  EXPECT_EQ(rr.next(3), 2u);
  EXPECT_EQ(rr.next(3), 0u);
  Scheduler s = Scheduler::scripted({2, 0});
  EXPECT_EQ(s.next(3), 2u);
  EXPECT_EQ(s.next(3), 0u);
  EXPECT_EQ(s.next(3), 2u);
  EXPECT_THROW(Scheduler::scripted({}), hk::DomainError);
  Scheduler bad = Scheduler::scripted({5});
  EXPECT_THROW(bad.next(3), hk::SizeError);
}

TEST(DeriveSeed, DistinctPerIndexAndStream) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 100; ++i)
    for (std::uint64_t s = 0; s < 2; ++s) seen.insert(hk::derive_seed(7, i, s));
  EXPECT_EQ(seen.size(), 200u);
  EXPECT_EQ(hk::derive_seed(7, 3, 1), hk::derive_seed(7, 3, 1));
  EXPECT_NE(hk::derive_seed(7, 3, 1), hk::derive_seed(8, 3, 1));
}

TEST(DeltaEquilibrium, Examples) {
  const auto x = line({0.0, 0.05, 3.0, 3.05});
  const auto p = hk::is_delta_equilibrium(x, 1.0, 0.1);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->clusters, (std::vector<hk::AgentSet>{{0, 1}, {2, 3}}));
  EXPECT_NEAR(p->diameters[0], 0.05, 1e-15);
  EXPECT_NEAR(p->hull_distances(0, 1), 2.95, 1e-12);
  EXPECT_FALSE(hk::is_delta_equilibrium(x, 1.0, 0.04).has_value());
  EXPECT_TRUE(hk::is_delta_equilibrium(line({0.0}), 0.3, 0.01).has_value());
}

TEST(DeltaEquilibrium, HullsMustBeFartherThanEps) {
  // Two tight clusters whose hulls are exactly eps apart are one component.
  EXPECT_FALSE(hk::is_delta_equilibrium(line({0.0, 0.125, 1.125, 1.25}), 1.0, 0.25).has_value());
  EXPECT_TRUE(hk::is_delta_equilibrium(line({0.0, 0.125, 1.25, 1.375}), 1.0, 0.25).has_value());
}

TEST(CountSwitches, Examples) {
  const auto g = hk::build_neighborhoods(line({0.0, 1.0, 5.0}), 1.5);
  EXPECT_FALSE(hk::count_switches(g, g));
  EXPECT_FALSE(hk::count_switches(g, hk::build_neighborhoods(line({0.0, 0.5, 5.0}), 1.5)));
  EXPECT_TRUE(hk::count_switches(g, hk::build_neighborhoods(line({0.0, 1.0, 2.0}), 1.5)));
}

TEST(RunAsync, TwoAgentsRoundRobinHitsAtStepSix) {
  const auto trace = hk::run_async(line({0.0, 0.5}), 1.0, Scheduler::round_robin(), 0.01);
  EXPECT_TRUE(trace.complete);
  ASSERT_TRUE(trace.hitting_time.has_value());
  EXPECT_EQ(*trace.hitting_time, 6u);
  EXPECT_DOUBLE_EQ(std::fabs(trace.final_profile(1, 0) - trace.final_profile(0, 0)), 0.0078125);
  EXPECT_EQ(trace.potentials.size(), 7u);
  EXPECT_TRUE(trace.events.switch_times.empty());
}

TEST(RunAsync, AlreadyAtEquilibriumHitsAtZero) {
  const auto trace = hk::run_async(line({0.0, 3.0}), 1.0, Scheduler::uniform(1), 0.1);
  ASSERT_TRUE(trace.hitting_time.has_value());
  EXPECT_EQ(*trace.hitting_time, 0u);
  EXPECT_EQ(trace.steps, 0u);
}

TEST(RunAsync, GapHalvesEachStepAndNeverCloses) {
  hk::AsyncOptions options;
  options.cap = 40;
  options.keep_profiles = true;
  // Dyadic start: every midpoint is exact for the first 40 steps.
  const auto trace = hk::run_async(line({0.0, 0.5}), 1.0, Scheduler::round_robin(), 1e-300, options);
  EXPECT_FALSE(trace.complete);
  ASSERT_EQ(trace.profiles.size(), 41u);
  for (std::size_t t = 0; t < trace.profiles.size(); ++t) {
    const auto& x = trace.profiles[t];
    EXPECT_EQ(std::fabs(x(1, 0) - x(0, 0)), std::ldexp(0.5, -static_cast<int>(t))) << "t=" << t;
  }
}

TEST(RunAsync, PotentialMonotoneWithGainFloor) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = oracle::random_profile(rng, 8, 2);
    const auto trace = hk::run_async(x, 0.3, Scheduler::uniform(trial), 0.03);
    ASSERT_TRUE(trace.complete);
    for (std::size_t t = 0; t < trace.steps; ++t) {
      EXPECT_GE(trace.potentials[t + 1] - trace.potentials[t], trace.gain_floors[t] - 1e-9);
      EXPECT_GE(trace.potentials[t + 1], trace.potentials[t] - 1e-9);
    }
  }
}

TEST(RunAsync, RecordedPotentialMatchesGame) {
  hk::AsyncOptions options;
  options.keep_profiles = true;
  const auto trace = hk::run_async(line({0.0, 0.2, 0.45, 1.0}), 0.3, Scheduler::uniform(5), 0.03, options);
  for (std::size_t t = 0; t <= trace.steps; ++t)
    EXPECT_NEAR(trace.potentials[t], hk::potential(hk::GameState(trace.profiles[t], 0.3)), 1e-12);
}

TEST(Enumeration, ExpectedGainAtLeastFloor) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = oracle::random_profile(rng, 2 + trial % 7, 1 + trial % 3);
    const auto e = hk::enumerate_updater_gains(x, 0.35);
    EXPECT_GE(e.expected_gain, e.expected_floor - 1e-9);
    double mean = 0.0;
    for (double g : e.gains) mean += g;
    EXPECT_NEAR(e.expected_gain, mean / static_cast<double>(e.gains.size()), 1e-12);
  }
}

TEST(Bounds, ClosedForms) {
  EXPECT_DOUBLE_EQ(hk::hitting_time_bound(2, 1.0, 0.1), 2.0 * 512.0 * 100.0);
  EXPECT_DOUBLE_EQ(hk::switch_count_bound(2), 16.0 * 512.0);
  EXPECT_DOUBLE_EQ(hk::scalar_hitting_bound(2), 32.0 * 9.0 + 2.0);
  EXPECT_NEAR(hk::scalar_hitting_bound(3), std::pow(3.0, 5.0 + 2.0 * std::log(4.0) / std::log(3.0)) + 3.0, 1e-6);
}

hk::MonteCarloConfig mc_config(std::size_t n, std::size_t d, std::size_t workers) {
  hk::MonteCarloConfig c;
  c.n = n;
  c.d = d;
  c.eps = 0.3;
  c.delta = 0.03;
  c.trials = 64;
  c.seed = 99;
  c.workers = workers;
  c.generator = [n, d](std::uint64_t s) {
    std::mt19937_64 rng(s);
    return oracle::random_profile(rng, n, d);
  };
  return c;
}

TEST(MonteCarlo, SingleAgentHitsImmediately) {
  const auto s = hk::monte_carlo_hitting(mc_config(1, 1, 1));
  EXPECT_EQ(s.completed, 64u);
  EXPECT_EQ(s.max_hit, 0u);
  EXPECT_DOUBLE_EQ(s.mean_hit, 0.0);
}

TEST(MonteCarlo, TwoAgentsWithinEps) {
  auto c = mc_config(2, 1, 2);
  c.generator = [](std::uint64_t) { return line({0.0, 0.15}); };
  const auto s = hk::monte_carlo_hitting(c);
  EXPECT_EQ(s.incomplete, 0u);
  EXPECT_TRUE(s.all_within_bounds);
  EXPECT_LT(s.mean_hit, 2.0 * 512.0 * 100.0);
  // The gap halves on every update, so exactly three updates hit delta = 0.03.
  for (const auto& t : s.per_trial) EXPECT_EQ(t.steps, 3u);
}

TEST(MonteCarlo, ResultIndependentOfWorkerCount) {
  const auto a = hk::monte_carlo_hitting(mc_config(5, 2, 1));
  const auto b = hk::monte_carlo_hitting(mc_config(5, 2, 4));
  ASSERT_EQ(a.per_trial.size(), b.per_trial.size());
  for (std::size_t k = 0; k < a.per_trial.size(); ++k) {
    EXPECT_EQ(a.per_trial[k].index, k);
    EXPECT_EQ(a.per_trial[k].steps, b.per_trial[k].steps);
    EXPECT_EQ(a.per_trial[k].switches, b.per_trial[k].switches);
  }
  EXPECT_EQ(a.mean_hit, b.mean_hit);
  EXPECT_EQ(a.mean_switches, b.mean_switches);
}

TEST(MonteCarlo, ScalarCaseFlag) {
  auto c = mc_config(3, 1, 1);
  c.delta = c.eps / 3.0;
  EXPECT_TRUE(hk::monte_carlo_hitting(c).scalar_case);
  EXPECT_FALSE(hk::monte_carlo_hitting(mc_config(3, 1, 1)).scalar_case);
}

}  // namespace
