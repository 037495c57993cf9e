#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace netgen {

// All computation runs in double precision; gradient checks rely on it.
using Real = double;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;
using Index = Eigen::Index;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent on-disk data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes that do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or usage; the CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite value");
}

}  // namespace netgen
