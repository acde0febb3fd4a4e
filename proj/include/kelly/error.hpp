#pragma once

#include <stdexcept>
#include <string>

namespace kelly {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Some outcome has a nonpositive wealth factor 1 + sum_j f_j k_ij.
class DomainViolation : public Error {
 public:
  using Error::Error;
};

/// The joint outcome space would exceed the configured size cap.
class OutcomeExplosion : public Error {
 public:
  using Error::Error;
};

/// Constraint policy parameters are out of range or inconsistent.
class InvalidPolicy : public Error {
 public:
  using Error::Error;
};

/// Too many constraints to enumerate every active/inactive combination.
class EnumerationCapExceeded : public Error {
 public:
  using Error::Error;
};

/// No converged, feasible KKT solution survived filtering.
class NoViableSolution : public Error {
 public:
  using Error::Error;
};

/// Brute-force grid would exceed its point budget.
class GridTooLarge : public Error {
 public:
  using Error::Error;
};

/// Malformed input document.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, int line = -1)
      : Error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  /// 1-based line number, or -1 when unknown.
  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace kelly
