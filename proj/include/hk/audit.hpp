#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace hk {

inline constexpr double kAuditTol = 1e-9;

struct AuditViolation {
  std::size_t step;
  std::string check;
  double residual;  // lhs - rhs; negative beyond tolerance
};

// Outcome of checking an inequality family. `measured` and `bound` hold the
// tightest instance seen (by margin); `checks` counts evaluated instances.
struct AuditReport {
  std::string tag;
  std::size_t checks = 0;
  double measured = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<AuditViolation> violations;

  bool passed() const noexcept { return violations.empty(); }

  // Records lhs >= rhs - tol.
  void require_at_least(std::size_t step, const std::string& check, double lhs, double rhs,
                        double tol = kAuditTol) {
    ++checks;
    const double margin = lhs - rhs;
    if (margin < worst_margin) {
      worst_margin = margin;
      measured = lhs;
      bound = rhs;
    }
    if (!(margin >= -tol)) violations.push_back({step, check, margin});
  }

  // Records lhs <= rhs + tol.
  void require_at_most(std::size_t step, const std::string& check, double lhs, double rhs,
                       double tol = kAuditTol) {
    ++checks;
    const double margin = rhs - lhs;
    if (margin < worst_margin) {
      worst_margin = margin;
      measured = lhs;
      bound = rhs;
    }
    if (!(margin >= -tol)) violations.push_back({step, check, -margin});
  }

  // Records lhs > rhs with no tolerance.
  void require_greater(std::size_t step, const std::string& check, double lhs, double rhs) {
    ++checks;
    const double margin = lhs - rhs;
    if (margin < worst_margin) {
      worst_margin = margin;
      measured = lhs;
      bound = rhs;
    }
    if (!(margin > 0.0)) violations.push_back({step, check, margin});
  }

  void merge(const AuditReport& other) {
    checks += other.checks;
    if (other.worst_margin < worst_margin) {
      worst_margin = other.worst_margin;
      measured = other.measured;
      bound = other.bound;
    }
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  }
};

}  // namespace hk
