#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lsrn {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Accumulator type for residual refinement. On targets where long double is
/// plain double, refinement gains nothing but stays correct.
using Extended = long double;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity reached a kernel that requires finite input.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number of the offending line
/// (0 when the problem is not tied to a single line).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class Orientation { tall, wide };

const char* to_string(Orientation o) noexcept;

}  // namespace lsrn
