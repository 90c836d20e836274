#include "hk/async_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "hk/audit.hpp"
#include "hk/game.hpp"

namespace hk {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ClusterPartition partition_of(std::vector<AgentSet> clusters,
                              std::vector<double> diameters) {
  ClusterPartition p;
  const std::size_t m = clusters.size();
  p.hull_distances = Matrix(m, m);
  p.clusters = std::move(clusters);
  p.diameters = std::move(diameters);
  return p;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(2 * index + stream + 1));
}

Scheduler Scheduler::uniform(std::uint64_t seed) {
  Scheduler s(Kind::uniform);
  s.rng_.seed(seed);
  return s;
}

Scheduler Scheduler::round_robin(std::size_t start) {
  Scheduler s(Kind::round_robin);
  s.cursor_ = start;
  return s;
}

Scheduler Scheduler::scripted(std::vector<std::size_t> sequence) {
  if (sequence.empty()) throw DomainError("Scheduler: scripted sequence is empty");
  Scheduler s(Kind::scripted);
  s.sequence_ = std::move(sequence);
  return s;
}

std::size_t Scheduler::next(std::size_t n) {
  if (n == 0) throw SizeError("Scheduler: no agents");
  switch (kind_) {
    case Kind::uniform:
      return static_cast<std::size_t>(rng_() % n);
    case Kind::round_robin: {
      const std::size_t i = cursor_ % n;
      cursor_ = i + 1;
      return i;
    }
    case Kind::scripted: {
      const std::size_t i = sequence_[cursor_];
      cursor_ = (cursor_ + 1) % sequence_.size();
      if (i >= n) throw SizeError("Scheduler: scripted agent " + std::to_string(i) + " out of range");
      return i;
    }
  }
  return 0;
}

AgentSet neighborhood_of(const OpinionProfile& profile, double eps, std::size_t i) {
  if (i >= profile.agents()) throw SizeError("neighborhood_of: agent index out of range");
  AgentSet out;
  for (std::size_t j = 0; j < profile.agents(); ++j)
    if (j == i || distance(profile.opinion(i), profile.opinion(j)) <= eps) out.push_back(j);
  return out;
}

OpinionProfile async_step(const OpinionProfile& profile, double eps, std::size_t i_star) {
  const AgentSet members = neighborhood_of(profile, eps, i_star);
  if (members.size() == 1) return profile;
  return profile.with_opinion(i_star, mean_of(profile, members));
}

std::optional<ClusterPartition> is_delta_equilibrium(const OpinionProfile& profile, double eps, double delta) {
  if (!(delta > 0.0)) throw DomainError("is_delta_equilibrium: delta must be > 0");
  std::vector<AgentSet> clusters = connected_components(build_neighborhoods(profile, eps));
  std::vector<Matrix> points;
  std::vector<double> diameters;
  for (const AgentSet& c : clusters) {
    points.push_back(select_rows(profile.matrix(), c));
    diameters.push_back(set_diameter(points.back()));
    if (!(diameters.back() < delta)) return std::nullopt;
  }
  ClusterPartition p = partition_of(std::move(clusters), std::move(diameters));
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      const double gap = hull_distance(points[a], points[b]);
      if (!(gap > eps)) return std::nullopt;
      p.hull_distances(a, b) = p.hull_distances(b, a) = gap;
    }
  return p;
}

bool count_switches(const CommunicationGraph& prev, const CommunicationGraph& next) {
  if (prev.size() != next.size()) throw SizeError("count_switches: graph size mismatch");
  return !(prev == next);
}

AsyncRunTrace run_async(const OpinionProfile& initial, double eps, Scheduler scheduler, double delta,
                        const AsyncOptions& options) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("run_async: eps must be finite and > 0");
  if (!(delta > 0.0)) throw DomainError("run_async: delta must be > 0");
  if (options.cap < 1) throw DomainError("run_async: cap must be >= 1");

  AsyncRunTrace trace(initial);
  trace.eps = eps;
  trace.delta = delta;
  trace.cap = options.cap;
  if (options.keep_profiles) trace.profiles.push_back(initial);

  OpinionProfile x = initial;
  CommunicationGraph graph = build_neighborhoods(x, eps);
  trace.potentials.push_back(potential(GameState(x, eps)));
  trace.events.singleton_counts.push_back(isolated_agents(graph).size());

  std::optional<ClusterPartition> eq = is_delta_equilibrium(x, eps, delta);
  std::size_t t = 0;
  while (!eq && t < options.cap) {
    const std::size_t i = scheduler.next(x.agents());
    const std::size_t neighbors = graph.neighborhood_size(i);
    OpinionProfile y = async_step(x, eps, i);
    CommunicationGraph next_graph = build_neighborhoods(y, eps);

    trace.updaters.push_back(i);
    trace.neighborhood_sizes.push_back(neighbors);
    trace.gain_floors.push_back(2.0 * static_cast<double>(neighbors) * squared_distance(x.opinion(i), y.opinion(i)));
    trace.potentials.push_back(potential(GameState(y, eps)));
    for (const auto& [a, b] : merge_links(x, y)) trace.events.merge_events.push_back({t, a, b});
    if (!trace.events.merge_events.empty() && trace.events.merge_events.back().t == t)
      trace.events.merging_times.push_back(t);
    ++t;
    if (count_switches(graph, next_graph)) trace.events.switch_times.push_back(t);
    trace.events.singleton_counts.push_back(isolated_agents(next_graph).size());

    x = std::move(y);
    graph = std::move(next_graph);
    if (options.keep_profiles) trace.profiles.push_back(x);
    eq = is_delta_equilibrium(x, eps, delta);
  }

  trace.steps = t;
  trace.final_profile = x;
  if (eq) {
    trace.complete = true;
    trace.hitting_time = t;
    trace.final_partition = std::move(*eq);
  }
  return trace;
}

UpdaterEnumeration enumerate_updater_gains(const OpinionProfile& profile, double eps) {
  const GameState state(profile, eps);
  const double before = potential(state);
  const std::size_t n = profile.agents();
  UpdaterEnumeration out;
  double gain_sum = 0.0;
  double move_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const OpinionProfile y = async_step(profile, eps, i);
    out.gains.push_back(potential(GameState(y, eps)) - before);
    out.moves_sq.push_back(squared_distance(profile.opinion(i), y.opinion(i)));
    gain_sum += out.gains.back();
    move_sum += out.moves_sq.back();
  }
  out.expected_gain = gain_sum / static_cast<double>(n);
  out.expected_floor = 2.0 * move_sum / static_cast<double>(n);
  return out;
}

double hitting_time_bound(std::size_t n, double eps, double delta) {
  const double ratio = eps / delta;
  return 2.0 * std::pow(static_cast<double>(n), 9.0) * ratio * ratio;
}

double switch_count_bound(std::size_t n) { return 16.0 * std::pow(static_cast<double>(n), 9.0); }

double scalar_hitting_bound(std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::pow(nn, 5.0) * (nn + 1.0) * (nn + 1.0) + nn;
}

MonteCarloSummary monte_carlo_hitting(const MonteCarloConfig& config) {
  if (config.trials < 1) throw DomainError("monte_carlo_hitting: trials must be >= 1");
  if (!config.generator) throw DomainError("monte_carlo_hitting: no initial-profile generator");

  std::vector<TrialResult> results(config.trials);
  std::atomic<std::size_t> next_trial{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next_trial.fetch_add(1);
      if (k >= config.trials) return;
      try {
        TrialResult r;
        r.index = k;
        r.profile_seed = derive_seed(config.seed, k, 0);
        r.schedule_seed = derive_seed(config.seed, k, 1);
        const OpinionProfile x0 = config.generator(r.profile_seed);
        AsyncOptions options;
        options.cap = config.cap;
        const AsyncRunTrace trace = run_async(x0, config.eps, Scheduler::uniform(r.schedule_seed), config.delta, options);
        r.complete = trace.complete;
        r.steps = trace.steps;
        r.switches = trace.events.switch_times.size();
        r.gains_ok = true;
        for (std::size_t t = 0; t < trace.steps; ++t)
          if (trace.potentials[t + 1] - trace.potentials[t] < trace.gain_floors[t] - kAuditTol) r.gains_ok = false;
        results[k] = r;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next_trial = config.trials;
        return;
      }
    }
  };

  std::size_t workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, config.trials);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  MonteCarloSummary s;
  s.n = config.n;
  s.d = config.d;
  s.eps = config.eps;
  s.delta = config.delta;
  s.trials = config.trials;
  s.seed = config.seed;
  s.bound_hit = hitting_time_bound(config.n, config.eps, config.delta);
  s.bound_switches = switch_count_bound(config.n);
  s.scalar_case = config.d == 1 &&
                  std::abs(config.delta - config.eps / static_cast<double>(config.n)) <= 1e-12 * config.eps;
  s.bound_scalar = scalar_hitting_bound(config.n);
  s.gains_ok = true;

  double hit_sum = 0.0;
  double switch_sum = 0.0;
  for (const TrialResult& r : results) {
    s.gains_ok = s.gains_ok && r.gains_ok;
    s.max_switches = std::max(s.max_switches, r.switches);
    switch_sum += static_cast<double>(r.switches);
    if (!r.complete) {
      ++s.incomplete;
      continue;
    }
    ++s.completed;
    hit_sum += static_cast<double>(r.steps);
    s.max_hit = std::max(s.max_hit, r.steps);
  }
  s.mean_hit = s.completed ? hit_sum / static_cast<double>(s.completed) : 0.0;
  s.mean_switches = switch_sum / static_cast<double>(config.trials);
  s.all_within_bounds = s.incomplete == 0 && static_cast<double>(s.max_hit) <= s.bound_hit &&
                        static_cast<double>(s.max_switches) <= s.bound_switches &&
                        (!s.scalar_case || s.mean_hit <= s.bound_scalar);
  s.per_trial = std::move(results);
  return s;
}

}  // namespace hk
