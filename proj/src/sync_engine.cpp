#include "hk/sync_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hk/spectral.hpp"

namespace hk {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr std::uint64_t kSyncCapCeiling = 10'000'000;

bool all_components_trivial(const OpinionProfile& x, const std::vector<AgentSet>& components, double eps) {
  for (const AgentSet& c : components)
    if (!is_delta_trivial(select_rows(x.matrix(), c), eps)) return false;
  return true;
}

}  // namespace

UpdateMatrix::UpdateMatrix(Matrix a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols()) throw SizeError("UpdateMatrix: matrix must be square");
  if (a_.empty()) throw DomainError("UpdateMatrix: empty matrix");
  for (std::size_t i = 0; i < a_.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a_.cols(); ++j) {
      const double v = a_(i, j);
      if (!std::isfinite(v) || v < 0.0) throw DomainError("UpdateMatrix: entries must be finite and >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw DomainError("UpdateMatrix: row " + std::to_string(i) + " does not sum to 1");
  }
}

UpdateMatrix averaging_matrix(const CommunicationGraph& graph) {
  const std::size_t n = graph.size();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / static_cast<double>(graph.neighborhood_size(i));
    for (std::size_t j = 0; j < n; ++j)
      if (graph.observes(i, j)) a(i, j) = w;
  }
  return UpdateMatrix(std::move(a));
}

UpdateMatrix sync_matrix(const OpinionProfile& profile, double eps) {
  return averaging_matrix(build_neighborhoods(profile, eps));
}

OpinionProfile averaging_step(const OpinionProfile& profile, const CommunicationGraph& graph, double tol) {
  if (graph.size() != profile.agents()) throw SizeError("averaging_step: graph size mismatch");
  Matrix next(profile.agents(), profile.dimension());
  for (std::size_t i = 0; i < profile.agents(); ++i) {
    const Point m = neighborhood_mean(profile, graph, i);
    std::copy(m.begin(), m.end(), next.row(i).begin());
  }
  return snap_coincident(OpinionProfile(std::move(next)), tol);
}

OpinionProfile sync_step(const OpinionProfile& profile, double eps, double tol) {
  return averaging_step(profile, build_neighborhoods(profile, eps), tol);
}

double lyapunov_V(const OpinionProfile& profile, double eps, std::span<const std::size_t> members) {
  const double cap = eps * eps;
  double v = 0.0;
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b)
      v += 2.0 * std::min(squared_distance(profile.opinion(members[a]), profile.opinion(members[b])), cap);
  return v;
}

double lyapunov_V(const OpinionProfile& profile, double eps) {
  AgentSet all(profile.agents());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return lyapunov_V(profile, eps, all);
}

double total_squared_movement(const OpinionProfile& a, const OpinionProfile& b,
                              std::span<const std::size_t> members) {
  if (a.agents() != b.agents() || a.dimension() != b.dimension())
    throw SizeError("total_squared_movement: shape mismatch");
  double s = 0.0;
  for (std::size_t i : members) s += squared_distance(a.opinion(i), b.opinion(i));
  return s;
}

double total_squared_movement(const OpinionProfile& a, const OpinionProfile& b) {
  AgentSet all(a.agents());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return total_squared_movement(a, b, all);
}

double termination_bound(std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::pow(nn, 8.0) + nn;
}

std::uint64_t default_sync_cap(std::size_t n) {
  const double bound = termination_bound(n);
  if (bound >= static_cast<double>(kSyncCapCeiling)) return kSyncCapCeiling;
  return static_cast<std::uint64_t>(bound);
}

SyncRunTrace run_sync(const OpinionProfile& initial, double eps, const SyncOptions& options) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("run_sync: eps must be finite and > 0");
  const std::size_t n = initial.agents();
  const ConfidenceBounds bounds = ConfidenceBounds::uniform(n, eps);

  SyncRunTrace trace;
  trace.eps = eps;
  trace.tol = options.tol;
  trace.cap = options.cap == 0 ? default_sync_cap(n) : options.cap;
  trace.profiles.push_back(initial);

  CommunicationGraph previous_graph(n);
  for (std::size_t t = 0;; ++t) {
    const OpinionProfile& x = trace.profiles.back();
    const CommunicationGraph graph = build_neighborhoods(x, eps);
    const std::vector<AgentSet> components = connected_components(graph);

    SyncStepRecord record;
    record.t = t;
    record.lyapunov = lyapunov_V(x, eps);
    record.singletons = isolated_agents(graph).size();
    record.connected = components.size() == 1;
    record.epsilon_trivial = all_components_trivial(x, components, eps);
    trace.events.singleton_counts.push_back(record.singletons);
    trace.singleton_accumulator += std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(record.singletons, 2000)));
    if (t > 0 && !(graph == previous_graph)) trace.events.switch_times.push_back(t);
    previous_graph = graph;

    if (is_settled(x, bounds, options.tol)) {
      trace.steps.push_back(record);
      trace.termination_time = t;
      trace.complete = true;
      break;
    }
    if (t >= trace.cap) {
      trace.steps.push_back(record);
      trace.termination_time = t;
      trace.complete = false;
      break;
    }

    OpinionProfile next = averaging_step(x, graph, options.tol);
    const auto links = merge_links(x, next, options.tol);
    record.merges = links.size();
    if (!links.empty()) trace.events.merging_times.push_back(t);
    for (const auto& [a, b] : links) trace.events.merge_events.push_back({t, a, b});
    trace.steps.push_back(record);
    trace.profiles.push_back(std::move(next));
  }
  return trace;
}

LyapunovAudit lyapunov_decrease_audit(const SyncRunTrace& trace) {
  LyapunovAudit audit;
  audit.monotone.tag = "lem6";
  audit.floor.tag = "thm2";
  const double eps = trace.eps;
  for (std::size_t t = 0; t + 1 < trace.profiles.size(); ++t) {
    const OpinionProfile& x = trace.profiles[t];
    const OpinionProfile& y = trace.profiles[t + 1];
    const double drop = trace.steps[t].lyapunov - trace.steps[t + 1].lyapunov;
    audit.monotone.require_at_most(t, "V(t+1) <= V(t)", trace.steps[t + 1].lyapunov, trace.steps[t].lyapunov);
    audit.monotone.require_at_least(t, "V(t)-V(t+1) >= 4 sum |dx|^2", drop, 4.0 * total_squared_movement(x, y));

    const CommunicationGraph graph = build_neighborhoods(x, eps);
    const auto links = merge_links(x, y, trace.tol);
    for (const AgentSet& c : connected_components(graph)) {
      if (is_delta_trivial(select_rows(x.matrix(), c), eps)) continue;
      const bool merging = std::any_of(links.begin(), links.end(), [&](const auto& link) {
        return std::binary_search(c.begin(), c.end(), link.first);
      });
      if (merging) continue;
      const double nc = static_cast<double>(c.size());
      const double local_drop = lyapunov_V(x, eps, c) - lyapunov_V(y, eps, c);
      audit.floor.require_at_least(t, "component V decrease >= eps^2/n_c^6", local_drop,
                                   eps * eps / std::pow(nc, 6.0));
    }
  }
  return audit;
}

bool singleton_bound_audit(const SyncRunTrace& trace) {
  const double n = static_cast<double>(trace.profiles.front().agents());
  return trace.singleton_accumulator < 8.0 * std::pow(n, 6.0);
}

AuditReport contraction_audit(const SyncRunTrace& trace) {
  AuditReport report;
  report.tag = "lem4";
  for (std::size_t t = 0; t + 1 < trace.profiles.size(); ++t) {
    const UpdateMatrix a = sync_matrix(trace.profiles[t], trace.eps);
    const ContractionCheck c = contraction_check(a.matrix(), trace.profiles[t]);
    report.require_at_most(t, "diam(x(t+1)) <= (1-mu) diam(x(t))", set_diameter(trace.profiles[t + 1].matrix()),
                           (1.0 - c.mu) * c.diameter_before);
  }
  return report;
}

}  // namespace hk
