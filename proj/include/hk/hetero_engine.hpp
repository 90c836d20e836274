#pragma once

// Synchronous dynamics with per-agent confidence radii. Visibility can be
// one-sided, so the communication graph may be asymmetric. Runs track how
// long each agent stays silent (sees nobody but itself).

#include <cstdint>
#include <string>
#include <vector>

#include "hk/core.hpp"

namespace hk {

inline constexpr double kDefaultMovementTol = 1e-12;

// x_i(t+1) = mean over N_i(t); coincident agents that see each other are then
// snapped to their common mean.
OpinionProfile hetero_sync_step(const OpinionProfile& profile, const ConfidenceBounds& bounds,
                                double tol = kCoincidenceTol);

enum class HeteroStatus {
  fixed_point,  // settled: nobody observes a distinct opinion
  stationary,   // a step moved nobody although some agent still observes others
  asymptotic,   // largest per-coordinate move fell below movement_tol
  cap,          // step cap reached first
};

std::string to_string(HeteroStatus status);

struct HeteroOptions {
  std::uint64_t cap = 10'000;
  double movement_tol = kDefaultMovementTol;  // 0 disables asymptotic detection
  double tol = kCoincidenceTol;
  bool keep_profiles = true;
};

struct HeteroRunTrace {
  explicit HeteroRunTrace(const OpinionProfile& start) : final_profile(start) {}

  ConfidenceBounds bounds{std::vector<double>{1.0}};
  std::vector<OpinionProfile> profiles;          // x(0) .. x(steps) when keep_profiles
  OpinionProfile final_profile;
  std::size_t steps = 0;                         // executed steps
  HeteroStatus status = HeteroStatus::cap;
  std::vector<double> max_movement;              // per step, largest |coordinate change|
  std::vector<std::size_t> silence_streak;       // current streak per agent at the end
  std::vector<std::size_t> max_silence_streak;   // longest streak per agent
  EventLog events;

  // Exact finite termination.
  bool terminated() const noexcept { return status == HeteroStatus::fixed_point; }
};

// Silence is counted over the profiles x(0) .. x(steps-1) that each executed a
// step, so an agent silent for a whole run of k steps has streak k.
HeteroRunTrace run_hetero(const OpinionProfile& initial, const ConfidenceBounds& bounds,
                          const HeteroOptions& options = {});

struct SilenceReport {
  std::vector<std::size_t> max_streak;  // per agent
  std::size_t global_max = 0;           // empirical T*
  std::size_t run_length = 0;           // executed steps
  bool finite_termination = false;
  // Agents whose streak lasted the entire run.
  std::vector<std::size_t> unbounded_agents;
};

SilenceReport silence_report(const HeteroRunTrace& trace);

struct Scenario {
  std::string name;
  OpinionProfile profile;
  ConfidenceBounds bounds;
};

// Named "paper-example-1": x = (-1, 1/3, 1), eps = (1/2, 2, 1/2). The middle
// agent sees both ends, the ends see only themselves.
Scenario three_agent_example();

}  // namespace hk
