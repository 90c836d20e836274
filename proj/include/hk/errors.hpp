#pragma once

#include <stdexcept>

namespace hk {

// Shape or length mismatch between inputs.
class SizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input outside an operation's domain (empty set, asymmetric graph, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Iterative routine failed to converge within its cap.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hk
