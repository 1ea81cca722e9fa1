#pragma once

#include "sheafq/types.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sheafq {

/// Numerical nullspace of a dense matrix.
template <typename Scalar>
struct Nullspace {
  Matrix<Scalar> basis;  ///< orthonormal columns
  Scalar sigma_max = 0;
  Index rank = 0;
  Scalar cutoff = 0;     ///< absolute threshold τ·σ_max
  /// Some singular value sits within a factor 10 of the cutoff.
  bool borderline = false;
};

/// Nullspace from the SVD: singular values ≤ rel_tol·σ_max count as zero.
/// A zero matrix has full nullspace.
template <typename Derived>
Nullspace<typename Derived::Scalar> nullspace(const Eigen::MatrixBase<Derived>& m,
                                              typename Derived::Scalar rel_tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  Nullspace<Scalar> out;
  const Index cols = m.cols();
  if (!m.allFinite()) throw NumericError("non-finite entries in matrix passed to nullspace()");
  if (m.rows() == 0 || cols == 0) {
    out.basis = Matrix<Scalar>::Identity(cols, cols);
    return out;
  }
  Eigen::BDCSVD<Matrix<Scalar>> svd(m.derived(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  out.sigma_max = sv.size() > 0 ? sv(0) : Scalar(0);
  out.cutoff = rel_tol * out.sigma_max;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (out.sigma_max > 0 && sv(i) > out.cutoff) ++rank;
    if (out.sigma_max > 0 && sv(i) >= out.cutoff / 10 && sv(i) <= out.cutoff * 10)
      out.borderline = true;
  }
  out.rank = rank;
  out.basis = svd.matrixV().rightCols(cols - rank);
  return out;
}

/// Orthonormal basis of the column span; throws StructuralError on rank deficiency
/// (σ_min ≤ rel_tol·σ_max). Zero-column input is returned unchanged.
template <typename Derived>
Matrix<typename Derived::Scalar> orthonormal_columns(const Eigen::MatrixBase<Derived>& w,
                                                     typename Derived::Scalar rel_tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  if (w.cols() == 0) return Matrix<Scalar>(w.rows(), 0);
  if (w.cols() > w.rows()) throw StructuralError("basis has more columns than rows");
  Eigen::JacobiSVD<Matrix<Scalar>> svd(w.derived(), Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > rel_tol * sv(0))) throw StructuralError("basis is rank deficient");
  return svd.matrixU();
}

/// Largest principal angle between two subspaces given by orthonormal columns.
/// Returns π/2 when the dimensions differ. Computed from sines, so angles near
/// zero keep full relative precision.
template <typename Scalar>
Scalar max_principal_angle(const Matrix<Scalar>& q1, const Matrix<Scalar>& q2) {
  if (q1.cols() != q2.cols()) return Scalar(std::acos(-1.0) / 2);
  if (q1.cols() == 0) return Scalar(0);
  const Matrix<Scalar> r1 = q1 - q2 * (q2.transpose() * q1);
  const Matrix<Scalar> r2 = q2 - q1 * (q1.transpose() * q2);
  const Scalar s1 = Eigen::JacobiSVD<Matrix<Scalar>>(r1).singularValues()(0);
  const Scalar s2 = Eigen::JacobiSVD<Matrix<Scalar>>(r2).singularValues()(0);
  return std::asin(std::min(Scalar(1), std::max(s1, s2)));
}

/// Orthonormal basis of the numerical range of m (rank-revealing).
template <typename Derived>
Matrix<typename Derived::Scalar> column_span(const Eigen::MatrixBase<Derived>& m,
                                             typename Derived::Scalar rel_tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  if (m.cols() == 0 || m.rows() == 0) return Matrix<Scalar>(m.rows(), 0);
  Eigen::BDCSVD<Matrix<Scalar>> svd(m.derived(), Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(0) > 0 && sv(i) > rel_tol * sv(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

/// Frobenius norm of the component of `a` orthogonal to col(q), q orthonormal.
template <typename Scalar>
Scalar off_span_norm(const Matrix<Scalar>& q, const Matrix<Scalar>& a) {
  if (q.cols() == 0) return a.norm();
  return (a - q * (q.transpose() * a)).norm();
}

}  // namespace sheafq
