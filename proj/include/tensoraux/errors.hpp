#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tensoraux {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition of an operation was violated by the caller (dimension
/// mismatch, parameter out of range, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// M + tB could not be factorized or solved to the required residual.
class SingularShift : public Error {
 public:
  explicit SingularShift(double shift)
      : Error("shifted operator M + tB is singular or indefinite at t = " + std::to_string(shift)),
        shift_(shift) {}
  double shift() const noexcept { return shift_; }

 private:
  double shift_;
};

/// The exact Bregman-step subproblem could not be solved to tolerance.
class StepSolveError : public Error {
 public:
  using Error::Error;
};

/// The backtracking loop of the adaptive method doubled too many times.
class LineSearchStall : public Error {
 public:
  LineSearchStall(std::size_t iteration, int doublings)
      : Error("line search stalled at iteration " + std::to_string(iteration) + " after " +
              std::to_string(doublings) + " doublings"),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// A diagnostic quantity is undefined for the given parameters (e.g. nu = 0).
class NotApplicable : public Error {
 public:
  using Error::Error;
};

/// A complexity certificate was requested outside of its theorem's hypotheses.
class InapplicableCertificate : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A derivative audit hit a non-finite oracle value.
class AuditFailure : public Error {
 public:
  using Error::Error;
};

/// A runtime-checked inequality that must hold by construction was violated.
class AssertionFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace tensoraux
