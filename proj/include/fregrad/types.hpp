#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace fregrad {

#ifdef FREGRAD_SINGLE_PRECISION
using Real = float;
#else
using Real = double;
#endif

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<Real>;
using Matrix = MatrixX<Real>;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (shape, range, length).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A file was readable but its contents are malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A well-formed file that uses a feature outside the supported subset.
class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace fregrad
