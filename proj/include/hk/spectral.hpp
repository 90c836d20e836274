#pragma once

// Graph-spectral tools for auditing the synchronous termination argument:
// Laplacians, a dense Jacobi eigensolver, Q = (I - A)'(I - A), isoperimetric
// numbers, Cheeger's sandwich, scrambling coefficients and the consensus
// projection residual.

#include <cstdint>
#include <vector>

#include "hk/audit.hpp"
#include "hk/core.hpp"
#include "hk/sync_engine.hpp"

namespace hk {

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr std::size_t kMaxExactIsoperimetricSize = 20;

class SymmetricMatrix {
 public:
  // Throws DomainError unless square and symmetric within kSymmetryTol.
  explicit SymmetricMatrix(Matrix m);

  std::size_t size() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }

 private:
  Matrix m_;
};

// L = Deg - Adj with self-loops ignored. Throws DomainError for asymmetric graphs.
SymmetricMatrix laplacian(const CommunicationGraph& graph);

// Largest neighbor count excluding the agent itself.
std::size_t max_degree(const CommunicationGraph& graph);

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
// 1e-12 (or 1e-14 relative to the matrix norm, whichever is larger).
SymmetricEigen symmetric_eigen(const SymmetricMatrix& m);
std::vector<double> symmetric_eigenvalues(const SymmetricMatrix& m);

// Second-smallest eigenvalue; 0 for 1 x 1 input.
double lambda2(const SymmetricMatrix& m);

SymmetricMatrix q_matrix(const UpdateMatrix& a);

// max |(I - A) - D^{-1} L| with D = diag(|N_i|).
double factorization_residual(const CommunicationGraph& graph);
double factorization_residual(const OpinionProfile& profile, double eps);
bool factorization_check(const OpinionProfile& profile, double eps);

// min over proper subsets S of e(S, S^c) / (|S| |S^c|). Exact enumeration;
// throws DomainError for more than kMaxExactIsoperimetricSize nodes. Returns 0
// for disconnected graphs and for n = 1.
double isoperimetric(const CommunicationGraph& graph);

// Upper estimate of the isoperimetric number from Fiedler-vector sweep cuts and
// `samples` random subsets. Usable at any size.
double sampled_isoperimetric(const CommunicationGraph& graph, std::size_t samples, std::uint64_t seed);

struct CheegerAudit {
  std::size_t n = 0;
  bool connected = false;
  double phi = 0.0;
  double lambda2 = 0.0;
  std::size_t max_degree = 0;
  bool lower_ok = false;    // phi^2 / (2 d_max) <= lambda2
  bool upper_ok = false;    // lambda2 <= 2 phi
  bool floor_ok = false;    // lambda2 >= 2 / n^2 (connected graphs)
  bool fiedler_ok = false;  // lambda2 <= n phi, reported for comparison

  bool passed() const noexcept { return lower_ok && upper_ok && floor_ok; }
};

// Requires n <= kMaxExactIsoperimetricSize. Checks use tolerance 1e-9.
CheegerAudit cheeger_audit(const CommunicationGraph& graph);

// min over row pairs i != j of sum_k min(c_ik, c_jk); 1 for a single row.
double scrambling_coefficient(const Matrix& c);

struct ContractionCheck {
  double diameter_before = 0.0;
  double diameter_after = 0.0;
  double mu = 0.0;
  bool ok = false;  // after <= (1 - mu) before + 1e-9
};

ContractionCheck contraction_check(const Matrix& c, const OpinionProfile& x);

// sum over columns of the squared norm of the column's component orthogonal
// to the consensus direction, i.e. sum_k sum_l (x_lk - mean_k)^2.
double consensus_residual(const OpinionProfile& profile);
double consensus_residual(const OpinionProfile& profile, std::span<const std::size_t> members);

// Step-by-step check of the spectral chain behind the synchronous termination
// bound, applied to every non-eps-trivial component of every non-merging step.
struct SpectralChainAudit {
  AuditReport factorization;    // |(I - A) - D^{-1} L| <= 1e-12
  AuditReport laplacian_floor;  // lambda2(L) >= 2 / n^2
  AuditReport q_vs_laplacian;   // lambda2(Q) >= lambda2(L)^2 / n^2
  AuditReport q_floor;          // lambda2(Q) >= 4 / n^6
  AuditReport residual;         // consensus residual > eps^2 / 4
  AuditReport movement;         // sum |dx|^2 >= lambda2(Q) * residual
  std::size_t components_checked = 0;

  bool passed() const noexcept {
    return factorization.passed() && laplacian_floor.passed() && q_vs_laplacian.passed() &&
           q_floor.passed() && residual.passed() && movement.passed();
  }
};

SpectralChainAudit spectral_chain_audit(const SyncRunTrace& trace);

struct SpectralReport {
  std::size_t n = 0;
  bool connected = false;
  double lambda2_L = 0.0;
  double lambda2_Q = 0.0;
  double phi = 0.0;
  bool phi_sampled = false;
  bool cheeger_ok = false;
  bool cheeger_lower_ok = false;
  bool cheeger_upper_ok = false;
  bool factorization_ok = false;
  double lambda2Q_floor = 0.0;  // 4 / n^6
};

SpectralReport spectral_report(const OpinionProfile& profile, double eps, std::uint64_t seed = 0);

}  // namespace hk
