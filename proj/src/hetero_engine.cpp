#include "hk/hetero_engine.hpp"

#include <algorithm>
#include <cmath>

namespace hk {

OpinionProfile hetero_sync_step(const OpinionProfile& profile, const ConfidenceBounds& bounds, double tol) {
  const CommunicationGraph graph = build_neighborhoods(profile, bounds);
  Matrix next(profile.agents(), profile.dimension());
  for (std::size_t i = 0; i < profile.agents(); ++i) {
    const Point m = neighborhood_mean(profile, graph, i);
    std::copy(m.begin(), m.end(), next.row(i).begin());
  }
  return snap_coincident(OpinionProfile(std::move(next)), bounds, tol);
}

std::string to_string(HeteroStatus status) {
  switch (status) {
    case HeteroStatus::fixed_point:
      return "fixed_point";
    case HeteroStatus::stationary:
      return "stationary";
    case HeteroStatus::asymptotic:
      return "asymptotic";
    case HeteroStatus::cap:
      return "cap";
  }
  return "unknown";
}

HeteroRunTrace run_hetero(const OpinionProfile& initial, const ConfidenceBounds& bounds,
                          const HeteroOptions& options) {
  const std::size_t n = initial.agents();
  if (bounds.size() != n) throw SizeError("run_hetero: bounds length does not match agent count");
  if (options.cap < 1) throw DomainError("run_hetero: cap must be >= 1");
  if (!(options.movement_tol >= 0.0)) throw DomainError("run_hetero: movement_tol must be >= 0");

  HeteroRunTrace trace(initial);
  trace.bounds = bounds;
  trace.silence_streak.assign(n, 0);
  trace.max_silence_streak.assign(n, 0);
  if (options.keep_profiles) trace.profiles.push_back(initial);

  OpinionProfile x = initial;
  for (std::size_t t = 0;; ++t) {
    if (is_settled(x, bounds, options.tol)) {
      trace.status = HeteroStatus::fixed_point;
      break;
    }
    if (t >= options.cap) {
      trace.status = HeteroStatus::cap;
      break;
    }

    const CommunicationGraph graph = build_neighborhoods(x, bounds);
    const AgentSet silent = isolated_agents(graph);
    trace.events.singleton_counts.push_back(silent.size());
    std::vector<char> is_silent(n, 0);
    for (std::size_t i : silent) is_silent[i] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      trace.silence_streak[i] = is_silent[i] ? trace.silence_streak[i] + 1 : 0;
      trace.max_silence_streak[i] = std::max(trace.max_silence_streak[i], trace.silence_streak[i]);
    }

    OpinionProfile y = hetero_sync_step(x, bounds, options.tol);
    double moved = 0.0;
    for (std::size_t k = 0; k < x.matrix().values().size(); ++k)
      moved = std::max(moved, std::abs(y.matrix().values()[k] - x.matrix().values()[k]));
    trace.max_movement.push_back(moved);
    const auto links = merge_links(x, y, options.tol);
    if (!links.empty()) trace.events.merging_times.push_back(t);
    for (const auto& [a, b] : links) trace.events.merge_events.push_back({t, a, b});
    if (!(build_neighborhoods(y, bounds) == graph)) trace.events.switch_times.push_back(t + 1);

    x = std::move(y);
    trace.steps = t + 1;
    if (options.keep_profiles) trace.profiles.push_back(x);
    // x was not settled, yet the step reproduced it bit for bit.
    if (moved == 0.0) {
      trace.status = HeteroStatus::stationary;
      break;
    }
    if (moved < options.movement_tol) {
      trace.status = HeteroStatus::asymptotic;
      break;
    }
  }
  trace.final_profile = x;
  return trace;
}

SilenceReport silence_report(const HeteroRunTrace& trace) {
  SilenceReport r;
  r.max_streak = trace.max_silence_streak;
  r.run_length = trace.steps;
  r.finite_termination = trace.terminated();
  for (std::size_t i = 0; i < r.max_streak.size(); ++i) {
    r.global_max = std::max(r.global_max, r.max_streak[i]);
    if (r.run_length > 0 && r.max_streak[i] == r.run_length) r.unbounded_agents.push_back(i);
  }
  return r;
}

Scenario three_agent_example() {
  return {"paper-example-1", OpinionProfile::scalar({-1.0, 1.0 / 3.0, 1.0}), ConfidenceBounds({0.5, 2.0, 0.5})};
}

}  // namespace hk
