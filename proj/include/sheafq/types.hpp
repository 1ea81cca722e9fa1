#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sheafq {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

// Error taxonomy. The CLI maps these onto exit codes.

/// Graph or sheaf data violating a structural invariant (self-loop, shape mismatch, ...).
struct StructuralError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// NaN/Inf input, ill-conditioned gauge, failed factorization.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller skipped a required certification step.
struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Malformed input file. `what()` carries file and line.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace sheafq
