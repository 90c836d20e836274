#pragma once

// Shared model types for bounded-confidence opinion dynamics: opinion
// profiles, confidence radii, communication graphs, geometry on finite point
// sets, and the event bookkeeping used by every engine.
//
// Agent indices are 0-based throughout the library and in every file format.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hk/errors.hpp"
#include "hk/matrix.hpp"

namespace hk {

// Two opinions closer than this are treated as one merged opinion.
inline constexpr double kCoincidenceTol = 1e-9;

using Point = std::vector<double>;
using AgentSet = std::vector<std::size_t>;

// n x d matrix of finite opinions; row i is agent i's opinion.
class OpinionProfile {
 public:
  explicit OpinionProfile(Matrix opinions);

  static OpinionProfile from_rows(const std::vector<std::vector<double>>& rows);
  // d = 1 profile from scalar opinions.
  static OpinionProfile scalar(const std::vector<double>& values);

  std::size_t agents() const noexcept { return x_.rows(); }
  std::size_t dimension() const noexcept { return x_.cols(); }
  std::span<const double> opinion(std::size_t i) const { return x_.row(i); }
  double operator()(std::size_t i, std::size_t k) const { return x_(i, k); }
  const Matrix& matrix() const noexcept { return x_; }

  // Copy with row i replaced.
  OpinionProfile with_opinion(std::size_t i, std::span<const double> value) const;

  bool operator==(const OpinionProfile&) const = default;

 private:
  Matrix x_;
};

// Strictly positive per-agent confidence radii.
class ConfidenceBounds {
 public:
  explicit ConfidenceBounds(std::vector<double> radii);
  static ConfidenceBounds uniform(std::size_t n, double eps);

  std::size_t size() const noexcept { return radii_.size(); }
  double operator[](std::size_t i) const { return radii_[i]; }
  std::span<const double> radii() const noexcept { return radii_; }
  bool homogeneous() const noexcept;
  double min() const noexcept;

  bool operator==(const ConfidenceBounds&) const = default;

 private:
  std::vector<double> radii_;
};

// observes(i, j) is true iff j is in agent i's neighborhood N_i. Self-loops are
// always present. Built from homogeneous radii the relation is symmetric.
class CommunicationGraph {
 public:
  explicit CommunicationGraph(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  bool observes(std::size_t i, std::size_t j) const { return adj_[i * n_ + j] != 0; }

  // Directed: j joins N_i.
  void add_observation(std::size_t i, std::size_t j);
  // Undirected edge {i, j}.
  void connect(std::size_t i, std::size_t j);

  AgentSet neighborhood(std::size_t i) const;
  std::size_t neighborhood_size(std::size_t i) const;
  bool symmetric() const noexcept;

  bool operator==(const CommunicationGraph&) const = default;

 private:
  std::size_t n_;
  std::vector<std::uint8_t> adj_;
};

struct ClusterPartition {
  std::vector<AgentSet> clusters;
  std::vector<double> diameters;
  Matrix hull_distances;  // m x m, zero diagonal
};

struct MergeEvent {
  std::size_t t;
  std::size_t first;
  std::size_t second;
};

struct EventLog {
  std::vector<MergeEvent> merge_events;
  std::vector<std::size_t> merging_times;
  std::vector<std::size_t> switch_times;
  std::vector<std::size_t> singleton_counts;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

// N_i = { j : |x_i - x_j| <= eps_i }, inclusive at the boundary.
CommunicationGraph build_neighborhoods(const OpinionProfile& profile, const ConfidenceBounds& bounds);
CommunicationGraph build_neighborhoods(const OpinionProfile& profile, double eps);

// Weak components: asymmetric graphs are symmetrized first. Components are
// listed by smallest member, members ascending.
std::vector<AgentSet> connected_components(const CommunicationGraph& graph);
bool is_connected(const CommunicationGraph& graph);

// Maximum pairwise distance among the rows of `points`.
double set_diameter(const Matrix& points);

// Distance between the convex hulls of two finite point sets. Closed form in
// d = 1; alternating nearest-point projection otherwise.
double hull_distance(const Matrix& p, const Matrix& q);

// Nearest point of conv(rows of `points`) to `target`.
Point project_onto_hull(const Matrix& points, std::span<const double> target);

bool is_delta_trivial(const Matrix& points, double delta);

// Pairs (i < j) that were apart (> tol) in `prev` and coincide (<= tol) in `next`.
std::vector<std::pair<std::size_t, std::size_t>> detect_merges(const OpinionProfile& prev,
                                                               const OpinionProfile& next,
                                                               double tol = kCoincidenceTol);

// One pair per lost distinct opinion: for each coincidence class of `next`,
// links between the distinct classes of `prev` it absorbed. Summed over a run
// in which coincident agents never split, this is at most n - 1.
std::vector<std::pair<std::size_t, std::size_t>> merge_links(const OpinionProfile& prev,
                                                             const OpinionProfile& next,
                                                             double tol = kCoincidenceTol);

// Groups of agents linked by chains of <= tol distances.
std::vector<AgentSet> coincidence_classes(const OpinionProfile& profile, double tol = kCoincidenceTol);

// Homogeneous radii: every pair coincides (<= tol) or is farther than eps.
// Heterogeneous radii: every agent equals its neighborhood mean within tol.
bool is_steady_state(const OpinionProfile& profile, const ConfidenceBounds& bounds,
                     double tol = kCoincidenceTol);

// Every agent observes only agents coincident with itself, so no opinion can
// move again. Equivalent to is_steady_state for homogeneous radii.
bool is_settled(const OpinionProfile& profile, const ConfidenceBounds& bounds,
                double tol = kCoincidenceTol);

// Agents with N_i = {i}.
AgentSet isolated_agents(const CommunicationGraph& graph);

// Mean of the listed agents' opinions (compensated summation, listed order).
Point mean_of(const OpinionProfile& profile, std::span<const std::size_t> members);

// Mean of the opinions in N_i, accumulated with compensated summation in
// ascending agent order so agents with equal neighborhoods agree bitwise.
Point neighborhood_mean(const OpinionProfile& profile, const CommunicationGraph& graph, std::size_t i);

// Replaces each coincidence class with its common mean.
OpinionProfile snap_coincident(const OpinionProfile& profile, double tol = kCoincidenceTol);

// Coincidence classes linked only through pairs that also see each other
// under `bounds`. Equal to coincidence_classes when every radius exceeds tol.
std::vector<AgentSet> coincidence_classes(const OpinionProfile& profile, const ConfidenceBounds& bounds,
                                          double tol = kCoincidenceTol);
OpinionProfile snap_coincident(const OpinionProfile& profile, const ConfidenceBounds& bounds,
                               double tol = kCoincidenceTol);

// Plain-text matrix: "n d" then n lines of d numbers.
OpinionProfile read_profile(std::istream& in);
void write_profile(std::ostream& out, const OpinionProfile& profile);
OpinionProfile load_profile(const std::string& path);
void save_profile(const std::string& path, const OpinionProfile& profile);

// One line of n numbers.
ConfidenceBounds read_bounds(std::istream& in);
void write_bounds(std::ostream& out, const ConfidenceBounds& bounds);
ConfidenceBounds load_bounds(const std::string& path);

}  // namespace hk
