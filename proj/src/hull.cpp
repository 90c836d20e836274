// Convex-hull geometry on finite point sets.
//
// Projection onto conv(P) is Wolfe's minimum-norm-point algorithm applied to
// the translated set P - y. The distance between two hulls is found by
// alternating those projections until both iterates stop moving.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hk/core.hpp"

namespace hk {

namespace {

constexpr int kAlternatingCap = 10000;
constexpr double kAlternatingTol = 1e-10;

double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Solves [G 1; 1' 0] [alpha; mu] = [0; 1] by Gaussian elimination with partial
// pivoting. Returns false when the corral is numerically affinely dependent.
bool affine_minimizer(const std::vector<Point>& z, const std::vector<std::size_t>& corral,
                      std::vector<double>& alpha) {
  const std::size_t m = corral.size();
  const std::size_t dim = m + 1;
  std::vector<double> a(dim * (dim + 1), 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * (dim + 1) + c]; };
  double scale = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      at(r, c) = dot(z[corral[r]], z[corral[c]]);
      scale = std::max(scale, std::abs(at(r, c)));
    }
    at(r, m) = 1.0;
    at(m, r) = 1.0;
  }
  at(m, dim) = 1.0;
  const double pivot_floor = 1e-14 * std::max(scale, 1.0);

  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t best = col;
    for (std::size_t r = col + 1; r < dim; ++r)
      if (std::abs(at(r, col)) > std::abs(at(best, col))) best = r;
    if (std::abs(at(best, col)) < pivot_floor) return false;
    if (best != col)
      for (std::size_t c = 0; c <= dim; ++c) std::swap(at(col, c), at(best, c));
    for (std::size_t r = 0; r < dim; ++r) {
      if (r == col) continue;
      const double f = at(r, col) / at(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= dim; ++c) at(r, c) -= f * at(col, c);
    }
  }
  alpha.assign(m, 0.0);
  for (std::size_t r = 0; r < m; ++r) alpha[r] = at(r, dim) / at(r, r);
  return true;
}

Point combine(const std::vector<Point>& z, const std::vector<std::size_t>& corral,
              const std::vector<double>& w) {
  Point x(z.front().size(), 0.0);
  for (std::size_t s = 0; s < corral.size(); ++s)
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += w[s] * z[corral[s]][k];
  return x;
}

// Minimum-norm point of conv(z).
Point min_norm_point(const std::vector<Point>& z) {
  double scale = 0.0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double nn = dot(z[i], z[i]);
    scale = std::max(scale, nn);
    if (nn < dot(z[start], z[start])) start = i;
  }
  if (scale == 0.0) return z[start];
  const double stop_tol = 1e-15 * scale;
  const double weight_floor = 1e-15;

  std::vector<std::size_t> corral{start};
  std::vector<double> w{1.0};
  Point x = z[start];
  std::vector<double> alpha;

  double norm_sq = dot(x, x);
  const std::size_t major_cap = 50 * (z.size() + z.front().size()) + 100;
  for (std::size_t major = 0; major < major_cap; ++major) {
    std::size_t j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double v = dot(x, z[i]);
      if (v < best) {
        best = v;
        j = i;
      }
    }
    if (dot(x, x) - best <= stop_tol) return x;
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) return x;
    corral.push_back(j);
    w.push_back(0.0);

    for (std::size_t minor = 0; minor <= corral.size() + 1; ++minor) {
      if (!affine_minimizer(z, corral, alpha)) {
        // Drop the newest point; roundoff made the corral degenerate.
        corral.pop_back();
        w.pop_back();
        return combine(z, corral, w);
      }
      if (std::all_of(alpha.begin(), alpha.end(), [&](double a) { return a > weight_floor; })) {
        w = alpha;
        x = combine(z, corral, w);
        break;
      }
      double theta = 1.0;
      for (std::size_t s = 0; s < corral.size(); ++s)
        if (alpha[s] <= weight_floor && w[s] - alpha[s] > 0.0) theta = std::min(theta, w[s] / (w[s] - alpha[s]));
      for (std::size_t s = 0; s < corral.size(); ++s) w[s] = theta * alpha[s] + (1.0 - theta) * w[s];
      std::size_t keep = 0;
      for (std::size_t s = 0; s < corral.size(); ++s) {
        if (w[s] > weight_floor) {
          corral[keep] = corral[s];
          w[keep] = w[s];
          ++keep;
        }
      }
      corral.resize(keep);
      w.resize(keep);
      double total = 0.0;
      for (double v : w) total += v;
      for (double& v : w) v /= total;
      x = combine(z, corral, w);
    }
    // Wolfe's iterates strictly decrease in norm; a stall means roundoff won.
    const double next_norm_sq = dot(x, x);
    if (!(next_norm_sq < norm_sq)) return x;
    norm_sq = next_norm_sq;
  }
  throw NumericalError("min_norm_point: no convergence");
}

}  // namespace

Point project_onto_hull(const Matrix& points, std::span<const double> target) {
  if (points.empty()) throw DomainError("project_onto_hull: empty point set");
  if (target.size() != points.cols()) throw SizeError("project_onto_hull: dimension mismatch");
  std::vector<Point> shifted;
  shifted.reserve(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) {
    Point z(points.cols());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = points(i, k) - target[k];
    if (std::find(shifted.begin(), shifted.end(), z) == shifted.end()) shifted.push_back(std::move(z));
  }
  Point x = min_norm_point(shifted);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] += target[k];
  return x;
}

double hull_distance(const Matrix& p, const Matrix& q) {
  if (p.empty() || q.empty()) throw DomainError("hull_distance: empty point set");
  if (p.cols() != q.cols()) throw SizeError("hull_distance: dimension mismatch");

  if (p.cols() == 1) {
    const auto [p_lo, p_hi] = std::minmax_element(p.values().begin(), p.values().end());
    const auto [q_lo, q_hi] = std::minmax_element(q.values().begin(), q.values().end());
    return std::max({0.0, *q_lo - *p_hi, *p_lo - *q_hi});
  }

  Point a(p.row(0).begin(), p.row(0).end());
  Point b = project_onto_hull(q, a);
  a = project_onto_hull(p, b);
  double last_move = 0.0;
  for (int it = 0; it < kAlternatingCap; ++it) {
    const Point b_next = project_onto_hull(q, a);
    const Point a_next = project_onto_hull(p, b_next);
    const double moved_a = distance(a, a_next);
    const double moved_b = distance(b, b_next);
    a = a_next;
    b = b_next;
    last_move = std::max(moved_a, moved_b);
    if (last_move <= kAlternatingTol) return distance(a, b);
  }
  std::ostringstream msg;
  msg << "hull_distance: alternating projection did not converge in " << kAlternatingCap
      << " iterations (last move " << last_move << ", current gap " << distance(a, b) << ")";
  throw NumericalError(msg.str());
}

}  // namespace hk
