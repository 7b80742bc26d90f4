#pragma once

#include <stdexcept>
#include <string>

namespace pseudocircle {

/// Raised when an input violates a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when chain geometry is inconsistent (no lift, no containing element, ...).
class ChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A search or construction ran past its configured budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(std::string property, const std::string& what)
      : std::runtime_error(what), property_(std::move(property)) {}
  const std::string& property() const noexcept { return property_; }

 private:
  std::string property_;
};

/// A constructed object failed its own certification.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Persisted data is missing or malformed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pseudocircle
