#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hhcert {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Argument inside the domain but outside the supported range.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Two finest refinement levels of a quadrature disagree too much.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double disagreement)
      : Error(what), disagreement_(disagreement) {}
  double disagreement() const noexcept { return disagreement_; }

 private:
  double disagreement_;
};

/// An h-moment integral does not exist for the requested weight and order.
class DivergentMomentError : public Error {
 public:
  using Error::Error;
};

/// Function evaluation failed or produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Finite-difference step rounds to zero at the requested point.
class StepUnderflowError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset,
             std::vector<std::string> expected)
      : Error(what), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifierError : public ParseError {
 public:
  UnknownIdentifierError(const std::string& identifier, std::size_t offset)
      : ParseError("unknown identifier '" + identifier + "' at offset " +
                       std::to_string(offset),
                   offset, {}),
        identifier_(identifier) {}
  const std::string& identifier() const noexcept { return identifier_; }

 private:
  std::string identifier_;
};

/// Invalid command-line or configuration input.
class UsageError : public Error {
 public:
  UsageError(const std::string& what, std::string flag = {})
      : Error(what), flag_(std::move(flag)) {}
  const std::string& flag() const noexcept { return flag_; }

 private:
  std::string flag_;
};

}  // namespace hhcert
