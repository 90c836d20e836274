#pragma once

// Synchronous homogeneous dynamics: every agent moves to the mean of its
// eps-neighborhood at once. Runs are instrumented with the quadratic Lyapunov
// function, singleton counts and merge events so the termination bounds can be
// audited afterwards.

#include <cstdint>
#include <span>
#include <vector>

#include "hk/audit.hpp"
#include "hk/core.hpp"

namespace hk {

// Row-stochastic n x n matrix.
class UpdateMatrix {
 public:
  explicit UpdateMatrix(Matrix a);

  std::size_t size() const noexcept { return a_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return a_(i, j); }
  const Matrix& matrix() const noexcept { return a_; }

 private:
  Matrix a_;
};

// A_ij = 1/|N_i| for j in N_i, else 0.
UpdateMatrix averaging_matrix(const CommunicationGraph& graph);
UpdateMatrix sync_matrix(const OpinionProfile& profile, double eps);

// Each agent takes its neighborhood mean in `graph`; coincidence classes of the
// result are then snapped to their common mean.
OpinionProfile averaging_step(const OpinionProfile& profile, const CommunicationGraph& graph,
                              double tol = kCoincidenceTol);
OpinionProfile sync_step(const OpinionProfile& profile, double eps, double tol = kCoincidenceTol);

// Sum over ordered pairs of min(|x_i - x_j|^2, eps^2).
double lyapunov_V(const OpinionProfile& profile, double eps);
// Same sum restricted to pairs inside `members`.
double lyapunov_V(const OpinionProfile& profile, double eps, std::span<const std::size_t> members);

// Sum over agents of |b_i - a_i|^2, optionally restricted to `members`.
double total_squared_movement(const OpinionProfile& a, const OpinionProfile& b);
double total_squared_movement(const OpinionProfile& a, const OpinionProfile& b,
                              std::span<const std::size_t> members);

// n^8 + n, saturating.
double termination_bound(std::size_t n);
// min(n^8 + n, 10^7).
std::uint64_t default_sync_cap(std::size_t n);

struct SyncStepRecord {
  std::size_t t = 0;
  double lyapunov = 0.0;
  std::size_t merges = 0;      // merge links formed by the step t -> t+1
  std::size_t singletons = 0;  // |S_0(t)|
  bool connected = false;
  bool epsilon_trivial = false;  // every component has diameter <= eps
};

struct SyncOptions {
  std::uint64_t cap = 0;  // 0 selects default_sync_cap(n)
  double tol = kCoincidenceTol;
};

struct SyncRunTrace {
  double eps = 0.0;
  double tol = kCoincidenceTol;
  std::uint64_t cap = 0;
  std::vector<OpinionProfile> profiles;  // x(0) .. x(T)
  std::vector<SyncStepRecord> steps;     // one per profile
  std::size_t termination_time = 0;      // T
  bool complete = false;                 // false when the cap stopped the run
  EventLog events;
  double singleton_accumulator = 0.0;    // sum_t (1/2)^|S_0(t)| over t = 0..T

  const OpinionProfile& final_profile() const { return profiles.back(); }
};

SyncRunTrace run_sync(const OpinionProfile& initial, double eps, const SyncOptions& options = {});

struct LyapunovAudit {
  AuditReport monotone;  // V(t) - V(t+1) >= 4 sum |dx|^2, for every step
  AuditReport floor;     // per-component decrease >= eps^2 / n_c^6 on non-merging steps
  bool passed() const noexcept { return monotone.passed() && floor.passed(); }
};

LyapunovAudit lyapunov_decrease_audit(const SyncRunTrace& trace);

// sum_t (1/2)^|S_0(t)| < 8 n^6.
bool singleton_bound_audit(const SyncRunTrace& trace);

// diam(x(t+1)) <= (1 - mu(A(t))) diam(x(t)) for every step.
AuditReport contraction_audit(const SyncRunTrace& trace);

}  // namespace hk
