#include "hk/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

namespace hk {

namespace {

constexpr double kJacobiAbsTol = 1e-12;
constexpr double kJacobiRelTol = 1e-14;
constexpr int kJacobiSweepCap = 100;
constexpr double kFactorizationTol = 1e-12;
constexpr double kCheegerTol = 1e-9;

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return std::sqrt(s);
}

using Mask = std::uint32_t;

// Number of edges leaving the node set `s`, given per-node neighbor masks.
std::size_t cut_size(const std::vector<Mask>& adj, Mask s) {
  std::size_t cut = 0;
  for (Mask rest = s; rest != 0; rest &= rest - 1) {
    const int v = std::countr_zero(rest);
    cut += static_cast<std::size_t>(std::popcount(adj[static_cast<std::size_t>(v)] & ~s));
  }
  return cut;
}

// Cut ratio of the subset flagged in `in_s`, or +inf for a trivial subset.
double cut_ratio(const CommunicationGraph& g, const std::vector<char>& in_s) {
  const std::size_t n = g.size();
  const std::size_t k = static_cast<std::size_t>(std::count(in_s.begin(), in_s.end(), 1));
  if (k == 0 || k == n) return std::numeric_limits<double>::infinity();
  std::size_t cut = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (in_s[i])
      for (std::size_t j = 0; j < n; ++j)
        if (!in_s[j] && g.observes(i, j)) ++cut;
  return static_cast<double>(cut) / (static_cast<double>(k) * static_cast<double>(n - k));
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw SizeError("SymmetricMatrix: matrix must be square");
  for (std::size_t i = 0; i < m_.rows(); ++i)
    for (std::size_t j = i + 1; j < m_.cols(); ++j)
      if (!(std::abs(m_(i, j) - m_(j, i)) <= kSymmetryTol))
        throw DomainError("SymmetricMatrix: asymmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
}

SymmetricMatrix laplacian(const CommunicationGraph& graph) {
  if (!graph.symmetric()) throw DomainError("laplacian: graph is not symmetric");
  const std::size_t n = graph.size();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && graph.observes(i, j)) {
        l(i, j) = -1.0;
        l(i, i) += 1.0;
      }
  return SymmetricMatrix(std::move(l));
}

std::size_t max_degree(const CommunicationGraph& graph) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < graph.size(); ++i) best = std::max(best, graph.neighborhood_size(i) - 1);
  return best;
}

SymmetricEigen symmetric_eigen(const SymmetricMatrix& input) {
  const std::size_t n = input.size();
  Matrix a = input.matrix();
  Matrix v = Matrix::identity(n);
  // Restore exact symmetry so rotations act on a single triangle consistently.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));

  const double threshold = std::max(kJacobiAbsTol, kJacobiRelTol * frobenius_norm(a));
  int sweep = 0;
  while (off_diagonal_norm(a) > threshold) {
    if (++sweep > kJacobiSweepCap) throw NumericalError("symmetric_eigen: Jacobi sweeps did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Late sweeps: an entry below the rounding level of both diagonals is dropped.
        // Rotating it would spin nearly degenerate pairs and stall convergence.
        if (sweep > 4 && std::abs(a(p, p)) + 100.0 * std::abs(apq) == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + 100.0 * std::abs(apq) == std::abs(a(q, q))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150)
          t = 1.0 / (2.0 * theta);
        else
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;

        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

std::vector<double> symmetric_eigenvalues(const SymmetricMatrix& m) { return symmetric_eigen(m).values; }

double lambda2(const SymmetricMatrix& m) {
  if (m.size() < 2) return 0.0;
  return symmetric_eigenvalues(m)[1];
}

SymmetricMatrix q_matrix(const UpdateMatrix& a) {
  const Matrix m = subtract(Matrix::identity(a.size()), a.matrix());
  Matrix q = multiply(transpose(m), m);
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = i + 1; j < q.cols(); ++j) q(i, j) = q(j, i) = 0.5 * (q(i, j) + q(j, i));
  return SymmetricMatrix(std::move(q));
}

double factorization_residual(const CommunicationGraph& graph) {
  const std::size_t n = graph.size();
  const Matrix lhs = subtract(Matrix::identity(n), averaging_matrix(graph).matrix());
  const SymmetricMatrix l = laplacian(graph);
  Matrix rhs(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double di = static_cast<double>(graph.neighborhood_size(i));  // 1 + d_i
    for (std::size_t j = 0; j < n; ++j) rhs(i, j) = l(i, j) / di;
  }
  return max_abs_difference(lhs, rhs);
}

double factorization_residual(const OpinionProfile& profile, double eps) {
  return factorization_residual(build_neighborhoods(profile, eps));
}

bool factorization_check(const OpinionProfile& profile, double eps) {
  return factorization_residual(profile, eps) <= kFactorizationTol;
}

double isoperimetric(const CommunicationGraph& graph) {
  const std::size_t n = graph.size();
  if (n > kMaxExactIsoperimetricSize)
    throw DomainError("isoperimetric: exact enumeration is limited to " +
                      std::to_string(kMaxExactIsoperimetricSize) + " nodes");
  if (n < 2) return 0.0;
  if (!graph.symmetric()) throw DomainError("isoperimetric: graph is not symmetric");
  if (!is_connected(graph)) return 0.0;

  std::vector<Mask> adj(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && graph.observes(i, j)) adj[i] |= Mask{1} << j;

  // Keeping the last node outside S visits each unordered cut once.
  const Mask limit = Mask{1} << (n - 1);
  double best = std::numeric_limits<double>::infinity();
  for (Mask s = 1; s < limit; ++s) {
    const auto k = static_cast<double>(std::popcount(s));
    const double ratio = static_cast<double>(cut_size(adj, s)) / (k * (static_cast<double>(n) - k));
    best = std::min(best, ratio);
  }
  return best;
}

double sampled_isoperimetric(const CommunicationGraph& graph, std::size_t samples, std::uint64_t seed) {
  const std::size_t n = graph.size();
  if (n < 2) return 0.0;
  if (!graph.symmetric()) throw DomainError("sampled_isoperimetric: graph is not symmetric");
  if (!is_connected(graph)) return 0.0;

  double best = std::numeric_limits<double>::infinity();
  const SymmetricEigen eig = symmetric_eigen(laplacian(graph));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eig.vectors(a, 1) < eig.vectors(b, 1); });
  std::vector<char> in_s(n, 0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    in_s[order[k]] = 1;
    best = std::min(best, cut_ratio(graph, in_s));
  }

  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) in_s[i] = static_cast<char>(rng() & 1U);
    best = std::min(best, cut_ratio(graph, in_s));
  }
  return best;
}

CheegerAudit cheeger_audit(const CommunicationGraph& graph) {
  CheegerAudit audit;
  audit.n = graph.size();
  audit.connected = is_connected(graph);
  audit.phi = isoperimetric(graph);
  audit.lambda2 = lambda2(laplacian(graph));
  audit.max_degree = max_degree(graph);
  const double n = static_cast<double>(audit.n);
  const double dmax = static_cast<double>(audit.max_degree);
  audit.lower_ok = dmax == 0.0 ? audit.lambda2 >= -kCheegerTol
                               : audit.phi * audit.phi / (2.0 * dmax) <= audit.lambda2 + kCheegerTol;
  audit.upper_ok = audit.lambda2 <= 2.0 * audit.phi + kCheegerTol;
  audit.floor_ok = !audit.connected || audit.n < 2 || audit.lambda2 >= 2.0 / (n * n) - kCheegerTol;
  audit.fiedler_ok = audit.lambda2 <= n * audit.phi + kCheegerTol;
  return audit;
}

double scrambling_coefficient(const Matrix& c) {
  if (c.rows() != c.cols()) throw SizeError("scrambling_coefficient: matrix must be square");
  if (c.rows() < 2) return 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = i + 1; j < c.rows(); ++j) {
      double overlap = 0.0;
      for (std::size_t k = 0; k < c.cols(); ++k) overlap += std::min(c(i, k), c(j, k));
      best = std::min(best, overlap);
    }
  return best;
}

ContractionCheck contraction_check(const Matrix& c, const OpinionProfile& x) {
  if (c.cols() != x.agents()) throw SizeError("contraction_check: shape mismatch");
  ContractionCheck out;
  out.mu = scrambling_coefficient(c);
  out.diameter_before = set_diameter(x.matrix());
  out.diameter_after = set_diameter(multiply(c, x.matrix()));
  out.ok = out.diameter_after <= (1.0 - out.mu) * out.diameter_before + kAuditTol;
  return out;
}

double consensus_residual(const OpinionProfile& profile, std::span<const std::size_t> members) {
  if (members.empty()) return 0.0;
  const Point mean = mean_of(profile, members);
  double s = 0.0;
  for (std::size_t i : members)
    for (std::size_t k = 0; k < profile.dimension(); ++k) {
      const double dev = profile(i, k) - mean[k];
      s += dev * dev;
    }
  return s;
}

double consensus_residual(const OpinionProfile& profile) {
  AgentSet all(profile.agents());
  std::iota(all.begin(), all.end(), 0);
  return consensus_residual(profile, all);
}

SpectralChainAudit spectral_chain_audit(const SyncRunTrace& trace) {
  SpectralChainAudit audit;
  audit.factorization.tag = "thm2";
  audit.laplacian_floor.tag = "thm2";
  audit.q_vs_laplacian.tag = "thm2";
  audit.q_floor.tag = "thm2";
  audit.residual.tag = "thm2";
  audit.movement.tag = "thm2";
  const double eps = trace.eps;

  for (std::size_t t = 0; t + 1 < trace.profiles.size(); ++t) {
    const OpinionProfile& x = trace.profiles[t];
    const OpinionProfile& y = trace.profiles[t + 1];
    const CommunicationGraph graph = build_neighborhoods(x, eps);
    audit.factorization.require_at_most(t, "|(I-A) - D^-1 L|", factorization_residual(graph), 0.0,
                                        kFactorizationTol);
    const auto links = merge_links(x, y, trace.tol);

    for (const AgentSet& c : connected_components(graph)) {
      const Matrix points = select_rows(x.matrix(), c);
      if (is_delta_trivial(points, eps)) continue;
      if (std::any_of(links.begin(), links.end(),
                      [&](const auto& link) { return std::binary_search(c.begin(), c.end(), link.first); }))
        continue;
      ++audit.components_checked;

      CommunicationGraph sub(c.size());
      for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = 0; b < c.size(); ++b)
          if (a != b && graph.observes(c[a], c[b])) sub.add_observation(a, b);

      const double nc = static_cast<double>(c.size());
      const double l2_l = lambda2(laplacian(sub));
      const double l2_q = lambda2(q_matrix(averaging_matrix(sub)));
      const double residual = consensus_residual(x, c);
      const double moved = total_squared_movement(x, y, c);

      audit.laplacian_floor.require_at_least(t, "lambda2(L) >= 2/n^2", l2_l, 2.0 / (nc * nc));
      audit.q_vs_laplacian.require_at_least(t, "lambda2(Q) >= lambda2(L)^2/n^2", l2_q, l2_l * l2_l / (nc * nc));
      audit.q_floor.require_at_least(t, "lambda2(Q) >= 4/n^6", l2_q, 4.0 / std::pow(nc, 6.0));
      audit.residual.require_greater(t, "consensus residual > eps^2/4", residual, eps * eps / 4.0);
      audit.movement.require_at_least(t, "sum |dx|^2 >= lambda2(Q) residual", moved, l2_q * residual);
    }
  }
  return audit;
}

SpectralReport spectral_report(const OpinionProfile& profile, double eps, std::uint64_t seed) {
  const CommunicationGraph graph = build_neighborhoods(profile, eps);
  SpectralReport r;
  r.n = graph.size();
  r.connected = is_connected(graph);
  r.lambda2_L = lambda2(laplacian(graph));
  r.lambda2_Q = lambda2(q_matrix(averaging_matrix(graph)));
  const double n = static_cast<double>(r.n);
  r.lambda2Q_floor = 4.0 / std::pow(n, 6.0);
  r.factorization_ok = factorization_residual(graph) <= kFactorizationTol;
  if (r.n <= kMaxExactIsoperimetricSize) {
    const CheegerAudit c = cheeger_audit(graph);
    r.phi = c.phi;
    r.cheeger_lower_ok = c.lower_ok;
    r.cheeger_upper_ok = c.upper_ok;
    r.cheeger_ok = c.passed();
  } else {
    r.phi = sampled_isoperimetric(graph, 4096, seed);
    r.phi_sampled = true;
    // A sampled phi bounds the true value from above, so only the upper
    // inequality can be compared against it.
    r.cheeger_lower_ok = false;
    r.cheeger_upper_ok = r.lambda2_L <= 2.0 * r.phi + kCheegerTol;
    r.cheeger_ok = r.cheeger_upper_ok && (!r.connected || r.lambda2_L >= 2.0 / (n * n) - kCheegerTol);
  }
  return r;
}

}  // namespace hk
