#include "hk/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hk {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;  // root is always the smallest member
  }

  std::vector<AgentSet> groups() {
    std::vector<AgentSet> out;
    std::vector<std::size_t> slot(parent_.size(), parent_.size());
    for (std::size_t v = 0; v < parent_.size(); ++v) {
      const std::size_t r = find(v);
      if (slot[r] == parent_.size()) {
        slot[r] = out.size();
        out.emplace_back();
      }
      out[slot[r]].push_back(v);
    }
    return out;
  }

 private:
  std::vector<std::size_t> parent_;
};

void require_same_agents(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw SizeError(std::string(what) + ": agent count mismatch (" + std::to_string(a) + " vs " +
                    std::to_string(b) + ")");
}

}  // namespace

OpinionProfile::OpinionProfile(Matrix opinions) : x_(std::move(opinions)) {
  if (x_.rows() == 0 || x_.cols() == 0) throw SizeError("OpinionProfile: need n >= 1 and d >= 1");
  for (double v : x_.values())
    if (!std::isfinite(v)) throw DomainError("OpinionProfile: non-finite opinion");
}

OpinionProfile OpinionProfile::from_rows(const std::vector<std::vector<double>>& rows) {
  return OpinionProfile(Matrix::from_rows(rows));
}

OpinionProfile OpinionProfile::scalar(const std::vector<double>& values) {
  Matrix m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(i, 0) = values[i];
  return OpinionProfile(std::move(m));
}

OpinionProfile OpinionProfile::with_opinion(std::size_t i, std::span<const double> value) const {
  if (value.size() != dimension()) throw SizeError("with_opinion: dimension mismatch");
  Matrix m = x_;
  std::copy(value.begin(), value.end(), m.row(i).begin());
  return OpinionProfile(std::move(m));
}

ConfidenceBounds::ConfidenceBounds(std::vector<double> radii) : radii_(std::move(radii)) {
  if (radii_.empty()) throw DomainError("ConfidenceBounds: empty");
  for (double e : radii_)
    if (!(e > 0.0) || !std::isfinite(e)) throw DomainError("ConfidenceBounds: radii must be finite and > 0");
}

ConfidenceBounds ConfidenceBounds::uniform(std::size_t n, double eps) {
  return ConfidenceBounds(std::vector<double>(n, eps));
}

bool ConfidenceBounds::homogeneous() const noexcept {
  return std::all_of(radii_.begin(), radii_.end(), [&](double e) { return e == radii_.front(); });
}

double ConfidenceBounds::min() const noexcept { return *std::min_element(radii_.begin(), radii_.end()); }

CommunicationGraph::CommunicationGraph(std::size_t n) : n_(n), adj_(n * n, 0) {
  for (std::size_t i = 0; i < n; ++i) adj_[i * n + i] = 1;
}

void CommunicationGraph::add_observation(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_) throw SizeError("CommunicationGraph: index out of range");
  adj_[i * n_ + j] = 1;
}

void CommunicationGraph::connect(std::size_t i, std::size_t j) {
  add_observation(i, j);
  add_observation(j, i);
}

AgentSet CommunicationGraph::neighborhood(std::size_t i) const {
  AgentSet out;
  for (std::size_t j = 0; j < n_; ++j)
    if (observes(i, j)) out.push_back(j);
  return out;
}

std::size_t CommunicationGraph::neighborhood_size(std::size_t i) const {
  std::size_t count = 0;
  for (std::size_t j = 0; j < n_; ++j) count += adj_[i * n_ + j];
  return count;
}

bool CommunicationGraph::symmetric() const noexcept {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (adj_[i * n_ + j] != adj_[j * n_ + i]) return false;
  return true;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

CommunicationGraph build_neighborhoods(const OpinionProfile& profile, const ConfidenceBounds& bounds) {
  require_same_agents(profile.agents(), bounds.size(), "build_neighborhoods");
  const std::size_t n = profile.agents();
  CommunicationGraph graph(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && distance(profile.opinion(i), profile.opinion(j)) <= bounds[i])
        graph.add_observation(i, j);
  return graph;
}

CommunicationGraph build_neighborhoods(const OpinionProfile& profile, double eps) {
  return build_neighborhoods(profile, ConfidenceBounds::uniform(profile.agents(), eps));
}

std::vector<AgentSet> connected_components(const CommunicationGraph& graph) {
  DisjointSets sets(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i)
    for (std::size_t j = 0; j < graph.size(); ++j)
      if (graph.observes(i, j)) sets.unite(i, j);
  return sets.groups();
}

bool is_connected(const CommunicationGraph& graph) { return connected_components(graph).size() == 1; }

double set_diameter(const Matrix& points) {
  if (points.empty()) throw DomainError("set_diameter: empty point set");
  double best = 0.0;
  for (std::size_t a = 0; a < points.rows(); ++a)
    for (std::size_t b = a + 1; b < points.rows(); ++b)
      best = std::max(best, squared_distance(points.row(a), points.row(b)));
  return std::sqrt(best);
}

bool is_delta_trivial(const Matrix& points, double delta) { return set_diameter(points) <= delta; }

std::vector<AgentSet> coincidence_classes(const OpinionProfile& profile, double tol) {
  const std::size_t n = profile.agents();
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (distance(profile.opinion(i), profile.opinion(j)) <= tol) sets.unite(i, j);
  return sets.groups();
}

std::vector<std::pair<std::size_t, std::size_t>> detect_merges(const OpinionProfile& prev,
                                                               const OpinionProfile& next, double tol) {
  require_same_agents(prev.agents(), next.agents(), "detect_merges");
  if (prev.dimension() != next.dimension()) throw SizeError("detect_merges: dimension mismatch");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < prev.agents(); ++i)
    for (std::size_t j = i + 1; j < prev.agents(); ++j)
      if (distance(prev.opinion(i), prev.opinion(j)) > tol &&
          distance(next.opinion(i), next.opinion(j)) <= tol)
        out.emplace_back(i, j);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> merge_links(const OpinionProfile& prev,
                                                             const OpinionProfile& next, double tol) {
  require_same_agents(prev.agents(), next.agents(), "merge_links");
  const auto before = coincidence_classes(prev, tol);
  std::vector<std::size_t> class_of(prev.agents());
  for (std::size_t c = 0; c < before.size(); ++c)
    for (std::size_t a : before[c]) class_of[a] = c;

  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const AgentSet& group : coincidence_classes(next, tol)) {
    std::vector<std::size_t> seen;
    std::size_t anchor = group.front();
    for (std::size_t a : group) {
      if (std::find(seen.begin(), seen.end(), class_of[a]) != seen.end()) continue;
      if (!seen.empty()) out.emplace_back(anchor, a);
      seen.push_back(class_of[a]);
    }
  }
  return out;
}

Point mean_of(const OpinionProfile& profile, std::span<const std::size_t> members) {
  if (members.empty()) throw DomainError("mean_of: empty member set");
  const std::size_t d = profile.dimension();
  Point sum(d, 0.0);
  Point carry(d, 0.0);
  for (std::size_t j : members) {
    for (std::size_t k = 0; k < d; ++k) {
      // Neumaier summation
      const double v = profile(j, k);
      const double t = sum[k] + v;
      if (std::abs(sum[k]) >= std::abs(v))
        carry[k] += (sum[k] - t) + v;
      else
        carry[k] += (v - t) + sum[k];
      sum[k] = t;
    }
  }
  for (std::size_t k = 0; k < d; ++k) sum[k] = (sum[k] + carry[k]) / static_cast<double>(members.size());
  return sum;
}

Point neighborhood_mean(const OpinionProfile& profile, const CommunicationGraph& graph, std::size_t i) {
  return mean_of(profile, graph.neighborhood(i));
}

std::vector<AgentSet> coincidence_classes(const OpinionProfile& profile, const ConfidenceBounds& bounds,
                                          double tol) {
  require_same_agents(profile.agents(), bounds.size(), "coincidence_classes");
  const std::size_t n = profile.agents();
  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dist = distance(profile.opinion(i), profile.opinion(j));
      if (dist <= tol && dist <= bounds[i] && dist <= bounds[j]) sets.unite(i, j);
    }
  return sets.groups();
}

namespace {

OpinionProfile snap_classes(const OpinionProfile& profile, const std::vector<AgentSet>& classes) {
  Matrix m = profile.matrix();
  bool changed = false;
  for (const AgentSet& group : classes) {
    if (group.size() < 2) continue;
    bool identical = true;
    for (std::size_t a : group)
      if (!std::equal(m.row(a).begin(), m.row(a).end(), m.row(group.front()).begin())) identical = false;
    if (identical) continue;

    const Point mean = mean_of(profile, group);
    for (std::size_t a : group) std::copy(mean.begin(), mean.end(), m.row(a).begin());
    changed = true;
  }
  return changed ? OpinionProfile(std::move(m)) : profile;
}

}  // namespace

OpinionProfile snap_coincident(const OpinionProfile& profile, double tol) {
  return snap_classes(profile, coincidence_classes(profile, tol));
}

OpinionProfile snap_coincident(const OpinionProfile& profile, const ConfidenceBounds& bounds, double tol) {
  return snap_classes(profile, coincidence_classes(profile, bounds, tol));
}

bool is_settled(const OpinionProfile& profile, const ConfidenceBounds& bounds, double tol) {
  require_same_agents(profile.agents(), bounds.size(), "is_settled");
  for (std::size_t i = 0; i < profile.agents(); ++i)
    for (std::size_t j = 0; j < profile.agents(); ++j) {
      const double dist = distance(profile.opinion(i), profile.opinion(j));
      if (dist > tol && dist <= bounds[i]) return false;
    }
  return true;
}

bool is_steady_state(const OpinionProfile& profile, const ConfidenceBounds& bounds, double tol) {
  require_same_agents(profile.agents(), bounds.size(), "is_steady_state");
  if (bounds.homogeneous()) return is_settled(profile, bounds, tol);
  const CommunicationGraph graph = build_neighborhoods(profile, bounds);
  for (std::size_t i = 0; i < profile.agents(); ++i)
    if (distance(profile.opinion(i), neighborhood_mean(profile, graph, i)) > tol) return false;
  return true;
}

AgentSet isolated_agents(const CommunicationGraph& graph) {
  AgentSet out;
  for (std::size_t i = 0; i < graph.size(); ++i)
    if (graph.neighborhood_size(i) == 1) out.push_back(i);
  return out;
}

}  // namespace hk
