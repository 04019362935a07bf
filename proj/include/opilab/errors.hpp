#pragma once

#include <stdexcept>
#include <string>

namespace opilab {

// Bad arguments or out-of-domain evaluation. The CLI maps these to exit code 2.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An enumeration would exceed the configured budget.
class BudgetExceeded : public DomainError {
 public:
  using DomainError::DomainError;
};

// Two routes to the same quantity disagree. Exit code 1.
class IdentityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root isolation could not certify a sign change.
class BracketingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace opilab
