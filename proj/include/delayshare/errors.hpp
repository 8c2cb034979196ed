#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace delayshare {

/// Malformed or schema-violating input (CLI exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

/// Argument outside the domain of an operation (time index, rank, ...).
class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A combinatorial enumeration would exceed its configured budget
/// (CLI exit code 3).
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double required, double budget)
      : std::runtime_error(what + ": required " + format_count(required) +
                           ", budget " + format_count(budget)),
        required_(required),
        budget_(budget) {}

  double required() const { return required_; }
  double budget() const { return budget_; }

 private:
  static std::string format_count(double v);

  double required_;
  double budget_;
};

/// The common observation has zero probability under the given belief and
/// prescription. Callers skip the branch.
class UnreachableObservation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A common history that cannot occur under the design being replayed.
class OffDesignHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The instance does not satisfy the assumptions a probe requires.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace delayshare
