#pragma once

// Asynchronous homogeneous dynamics: at each step one agent, chosen by a
// scheduler, moves to the mean of its eps-neighborhood while everyone else
// stays put. The process approaches its limit only asymptotically, so runs stop
// at a delta-equilibrium.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "hk/core.hpp"

namespace hk {

inline constexpr std::uint64_t kDefaultAsyncCap = 10'000'000;

// Seed for stream `stream` of trial `index`, mixed from `master` with the
// SplitMix64 finalizer.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream);

class Scheduler {
 public:
  enum class Kind { uniform, round_robin, scripted };

  // i.i.d. uniform agent draws from a 64-bit Mersenne Twister, reduced mod n.
  static Scheduler uniform(std::uint64_t seed);
  static Scheduler round_robin(std::size_t start = 0);
  // Replays `sequence` cyclically. Throws DomainError if empty.
  static Scheduler scripted(std::vector<std::size_t> sequence);

  Kind kind() const noexcept { return kind_; }

  // Next updater for an n-agent profile. The round-robin start is taken mod n;
  // a scripted entry >= n throws SizeError.
  std::size_t next(std::size_t n);

 private:
  explicit Scheduler(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::mt19937_64 rng_;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> sequence_;
};

// Agents within eps of agent i (itself included), ascending.
AgentSet neighborhood_of(const OpinionProfile& profile, double eps, std::size_t i);

// Row i_star replaced by the mean of N_{i_star}; other rows untouched.
OpinionProfile async_step(const OpinionProfile& profile, double eps, std::size_t i_star);

// Components of the eps-graph when each has diameter < delta and every pair
// of component hulls is farther apart than eps; nullopt otherwise.
std::optional<ClusterPartition> is_delta_equilibrium(const OpinionProfile& profile, double eps, double delta);

// True iff the two graphs have different edge sets (a switching time).
bool count_switches(const CommunicationGraph& prev, const CommunicationGraph& next);

struct AsyncOptions {
  std::uint64_t cap = kDefaultAsyncCap;
  bool keep_profiles = false;  // store every intermediate profile
};

struct AsyncRunTrace {
  explicit AsyncRunTrace(const OpinionProfile& start) : initial(start), final_profile(start) {}

  double eps = 0.0;
  double delta = 0.0;
  std::uint64_t cap = 0;
  OpinionProfile initial;
  OpinionProfile final_profile;
  std::vector<OpinionProfile> profiles;  // x(0) .. x(steps) when keep_profiles
  std::size_t steps = 0;
  std::vector<std::size_t> updaters;     // i*(t) for t = 0 .. steps-1
  std::vector<double> potentials;        // U(t) for t = 0 .. steps
  std::vector<double> gain_floors;       // 2 |N_i*| |move|^2 for each step
  std::vector<std::size_t> neighborhood_sizes;  // |N_i*(t)| for each step
  EventLog events;
  std::optional<std::size_t> hitting_time;
  bool complete = false;                 // delta-equilibrium reached before the cap
  ClusterPartition final_partition;      // filled when complete
};

AsyncRunTrace run_async(const OpinionProfile& initial, double eps, Scheduler scheduler, double delta,
                        const AsyncOptions& options = {});

// Potential gain for each possible updater at a fixed profile, and the
// expected-gain comparison over a uniformly chosen updater.
struct UpdaterEnumeration {
  std::vector<double> gains;       // U(after i moves) - U(now)
  std::vector<double> moves_sq;    // |best_response(i) - x_i|^2
  double expected_gain = 0.0;      // (1/n) sum gains
  double expected_floor = 0.0;     // (2/n) sum moves_sq
};

UpdaterEnumeration enumerate_updater_gains(const OpinionProfile& profile, double eps);

// Bound on the expected steps to a delta-equilibrium: 2 n^9 (eps/delta)^2.
double hitting_time_bound(std::size_t n, double eps, double delta);
// 16 n^9.
double switch_count_bound(std::size_t n);
// n^(5 + 2 log_n(n+1)) + n, written as n^5 (n+1)^2 + n so that n = 1 is defined.
double scalar_hitting_bound(std::size_t n);

struct MonteCarloConfig {
  std::size_t n = 0;
  std::size_t d = 0;
  double eps = 0.0;
  double delta = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::uint64_t cap = kDefaultAsyncCap;
  std::size_t workers = 0;  // 0 selects the available hardware parallelism
  // Initial profile for a trial, from that trial's profile seed.
  std::function<OpinionProfile(std::uint64_t)> generator;
};

struct TrialResult {
  std::size_t index = 0;
  std::uint64_t profile_seed = 0;
  std::uint64_t schedule_seed = 0;
  bool complete = false;
  std::size_t steps = 0;
  std::size_t switches = 0;
  bool gains_ok = false;  // every realized gain >= floor - 1e-9
};

struct MonteCarloSummary {
  std::size_t n = 0;
  std::size_t d = 0;
  double eps = 0.0;
  double delta = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t completed = 0;
  std::size_t incomplete = 0;
  double mean_hit = 0.0;        // over completed trials
  std::size_t max_hit = 0;
  double mean_switches = 0.0;
  std::size_t max_switches = 0;
  double bound_hit = 0.0;
  double bound_switches = 0.0;
  bool scalar_case = false;     // d = 1 and delta = eps / n
  double bound_scalar = 0.0;
  bool gains_ok = false;
  bool all_within_bounds = false;
  std::vector<TrialResult> per_trial;  // sorted by index
};

MonteCarloSummary monte_carlo_hitting(const MonteCarloConfig& config);

}  // namespace hk
