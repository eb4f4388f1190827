#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdphase {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Input data that parses but breaks a constraint (k > n, rate outside [0,1], ...).
/// `row` is 1-based and counts the header line; 0 means "not row specific".
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

/// The posterior grid has no usable maximum (degenerate data).
class FlatPosterior : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Finite-size scaling ratios have not settled at the requested horizon.
class InsufficientHorizon : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A root could not be bracketed.
class NoRoot : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Series with zero sample variance.
class DegenerateSeries : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant failed; indicates a bug, not bad input.
class InvariantViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace pdphase
