#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Error taxonomy for the whole toolkit.  Everything user-visible derives from
// holderlab::Error so the CLI can map failures onto exit codes in one place:
// configuration and syntax problems are distinguished from numerical failures,
// and hypothesis violations carry enough data to be reported (or overridden).

namespace holderlab {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- expression language -------------------------------------------------

// Syntax error while tokenizing or parsing an expression.  `offset` is the
// byte position in the source string where the failure was detected, and
// `expected` lists the token descriptions that would have been acceptable.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t offset,
             std::vector<std::string> expected)
      : Error(format(source, offset, expected)),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string format(const std::string& source, std::size_t offset,
                            const std::vector<std::string>& expected) {
    std::string msg = "syntax error at byte " + std::to_string(offset) +
                      " in \"" + source + "\"";
    if (!expected.empty()) {
      msg += "; expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += (i + 1 == expected.size()) ? " or " : ", ";
        msg += expected[i];
      }
    }
    return msg;
  }

  std::size_t offset_;
  std::vector<std::string> expected_;
};

// An identifier that is neither a variable, a known function, nor `pi`.
class UnknownIdentifierError : public Error {
 public:
  UnknownIdentifierError(const std::string& name, std::size_t offset)
      : Error("unknown identifier \"" + name + "\" at byte " +
              std::to_string(offset)),
        name_(name),
        offset_(offset) {}

  const std::string& name() const { return name_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

// Domain failure while evaluating an expression (sqrt of a negative number,
// ln of a non-positive number, negative base raised to a fractional power).
// Carries the offending subexpression and the evaluation point.
class EvalError : public Error {
 public:
  EvalError(const std::string& subexpr, const std::vector<double>& point,
            const std::string& reason)
      : Error(format(subexpr, point, reason)),
        subexpr_(subexpr),
        point_(point),
        reason_(reason) {}

  const std::string& subexpr() const { return subexpr_; }
  const std::vector<double>& point() const { return point_; }
  const std::string& reason() const { return reason_; }

 private:
  static std::string format(const std::string& subexpr,
                            const std::vector<double>& point,
                            const std::string& reason) {
    std::string msg = reason + " while evaluating " + subexpr + " at (";
    for (std::size_t i = 0; i < point.size(); ++i) {
      if (i) msg += ", ";
      msg += std::to_string(point[i]);
    }
    msg += ")";
    return msg;
  }

  std::string subexpr_;
  std::vector<double> point_;
  std::string reason_;
};

// --- grids ---------------------------------------------------------------

class GridError : public Error {
 public:
  explicit GridError(const std::string& what) : Error(what) {}
};

// Fewer than two active cells: no norms or pair scans are meaningful.
class EmptyDomainError : public GridError {
 public:
  explicit EmptyDomainError(const std::string& what) : GridError(what) {}
};

// An active cell with no active axis neighbor in some direction: the finite
// difference for that direction cannot be formed.
class IsolatedCellError : public GridError {
 public:
  IsolatedCellError(std::size_t cell, int axis)
      : GridError("active cell " + std::to_string(cell) +
                  " has no active neighbor along axis " +
                  std::to_string(axis + 1) +
                  "; cannot form a finite difference"),
        cell_(cell),
        axis_(axis) {}

  std::size_t cell() const { return cell_; }
  int axis() const { return axis_; }

 private:
  std::size_t cell_;
  int axis_;
};

// A grid function value that is NaN or infinite.
class NonFiniteError : public GridError {
 public:
  NonFiniteError(std::size_t cell, const std::string& context)
      : GridError("non-finite value at active cell " + std::to_string(cell) +
                  " (" + context + ")"),
        cell_(cell) {}

  std::size_t cell() const { return cell_; }

 private:
  std::size_t cell_;
};

// --- exponents -----------------------------------------------------------

// The regularity-exponent denominator 1 - sum_j 1/p_j + N/p_i vanished or
// went non-positive somewhere.
class DegenerateDenominatorError : public Error {
 public:
  DegenerateDenominatorError(int axis, std::vector<std::size_t> cells)
      : Error("regularity exponent denominator is not positive along axis " +
              std::to_string(axis + 1) + " at " +
              std::to_string(cells.size()) + " cell(s), first at cell " +
              (cells.empty() ? std::string("?")
                             : std::to_string(cells.front()))),
        axis_(axis),
        cells_(std::move(cells)) {}

  int axis() const { return axis_; }
  const std::vector<std::size_t>& cells() const { return cells_; }

 private:
  int axis_;
  std::vector<std::size_t> cells_;
};

// Structural hypotheses on the exponent fields failed (some p_i <= 1, or the
// pointwise minimum does not exceed the dimension).  `violating_cells` counts
// cells where at least one requirement fails.
class HypothesisError : public Error {
 public:
  explicit HypothesisError(std::size_t violating_cells)
      : Error("exponent hypotheses violated at " +
              std::to_string(violating_cells) + " active cell(s)"),
        violating_cells_(violating_cells) {}

  std::size_t violating_cells() const { return violating_cells_; }

 private:
  std::size_t violating_cells_;
};

// --- norms ---------------------------------------------------------------

// Bracketing for the norm bisection failed to enclose the root.
class BracketError : public Error {
 public:
  explicit BracketError(const std::string& what) : Error(what) {}
};

// --- pair scans ----------------------------------------------------------

// A pair quotient was requested for an invalid pair (a cell paired with
// itself, or an index out of range).
class InvalidPairError : public Error {
 public:
  InvalidPairError(std::size_t a, std::size_t b)
      : Error("invalid cell pair (" + std::to_string(a) + ", " +
              std::to_string(b) + ")"),
        a_(a),
        b_(b) {}

  std::size_t a() const { return a_; }
  std::size_t b() const { return b_; }

 private:
  std::size_t a_;
  std::size_t b_;
};

// --- configuration -------------------------------------------------------

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace holderlab
