#pragma once

#include "lsrn/common.hpp"
#include "lsrn/diagnostics.hpp"

#include <random>
#include <string>
#include <vector>

namespace testing_support {

using lsrn::Index;
using lsrn::Matrix;
using lsrn::RowMatrix;
using lsrn::Vector;

// Independent of the library generator on purpose.
inline Matrix random_matrix(Index rows, Index cols, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Matrix a(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) a(i, j) = dist(rng);
  return a;
}

inline Vector random_vector(Index n, unsigned seed) { return random_matrix(n, 1, seed).col(0); }

inline double rel_err(const Vector& x, const Vector& ref) {
  const double d = ref.norm();
  return d == 0.0 ? x.norm() : (x - ref).norm() / d;
}

// Collects warnings instead of printing them.
class WarningCapture {
 public:
  WarningCapture()
      : previous_(lsrn::set_warning_handler([this](const std::string& m) { messages.push_back(m); })) {}
  ~WarningCapture() { lsrn::set_warning_handler(previous_); }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  bool contains(const std::string& needle) const {
    for (const auto& m : messages)
      if (m.find(needle) != std::string::npos) return true;
    return false;
  }

  std::vector<std::string> messages;

 private:
  lsrn::WarningHandler previous_;
};

}  // namespace testing_support
