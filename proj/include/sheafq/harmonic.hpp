#pragma once

#include "sheafq/linalg.hpp"
#include "sheafq/sheaf.hpp"
#include "sheafq/subrep.hpp"

#include <string>

namespace sheafq {

/// Orthonormal basis of H⁰ = ker δ = ker Δ_F.
template <typename Scalar = double>
struct HarmonicBasis {
  Matrix<Scalar> basis;  ///< N₀×h
  Scalar tolerance = Scalar(1e-10);
  bool borderline_rank = false;

  Index dimension() const { return basis.cols(); }
};

/// H⁰ from the SVD of the coboundary; singular values ≤ τ·σ_max are zero.
template <typename Scalar>
HarmonicBasis<Scalar> kernel_basis(const CellularSheaf<Scalar>& sheaf, Scalar tau = Scalar(1e-10)) {
  const Matrix<Scalar> delta = coboundary_matrix(sheaf);
  if (!delta.allFinite()) throw NumericError("kernel_basis: non-finite restriction maps");
  auto ns = nullspace(delta, tau);
  return {std::move(ns.basis), tau, ns.borderline};
}

/// Π_{H⁰} x = B Bᵀ x.
template <typename Scalar, typename Derived>
Matrix<Scalar> harmonic_projection(const HarmonicBasis<Scalar>& h, const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != h.basis.rows()) throw StructuralError("harmonic_projection: length mismatch");
  if (h.dimension() == 0) return Matrix<Scalar>::Zero(x.rows(), x.cols());
  return h.basis * (h.basis.transpose() * x);
}

struct DecompositionReport {
  Index h_sum = 0;  ///< dim H⁰(f⊕g)
  Index h_f = 0;
  Index h_g = 0;
  double max_angle = 0.0;  ///< between embedded H⁰(f)⊕H⁰(g) and H⁰(f⊕g)
  bool additive = false;
  bool certified = false;
  bool borderline_rank = false;
};

/// Checks H⁰(f⊕g) ≅ H⁰(f) ⊕ H⁰(g) both in dimension and as embedded subspaces.
template <typename Scalar>
DecompositionReport verify_kernel_decomposition(const CellularSheaf<Scalar>& f,
                                                const CellularSheaf<Scalar>& g,
                                                double angle_tol = 1e-8) {
  const auto sum = direct_sum(f, g);
  const auto hf = kernel_basis(f), hg = kernel_basis(g), hs = kernel_basis(sum);
  DecompositionReport r;
  r.h_f = hf.dimension();
  r.h_g = hg.dimension();
  r.h_sum = hs.dimension();
  r.borderline_rank = hf.borderline_rank || hg.borderline_rank || hs.borderline_rank;
  r.additive = r.h_sum == r.h_f + r.h_g;
  const Matrix<Scalar> embedded = embed_direct_sum(f, g, hf.basis, hg.basis);
  r.max_angle = static_cast<double>(max_principal_angle(embedded, hs.basis));
  r.certified = r.additive && r.max_angle <= angle_tol;
  return r;
}

struct InjectionReport {
  Index h_sub = 0;      ///< dim H⁰(F′)
  Index h_full = 0;     ///< dim H⁰(F)
  double residual = 0;  ///< ‖δ_F E‖_F / max(1, ‖δ_F‖_F) for the embedded basis E
  double min_singular = 0;
  bool certified = false;
  Matrix<double> embedded;  ///< E: N₀×h_sub, sections of F′ written in C⁰(F)
};

/// Computes H⁰ of the restricted sheaf, pushes it into C⁰(F) and checks that
/// the image consists of sections of F and stays full rank.
///
/// Throws PreconditionError when `sub` does not pass verify_subrepresentation.
template <typename Scalar>
InjectionReport verify_harmonic_injection(const CellularSheaf<Scalar>& sheaf,
                                          const Subrepresentation<Scalar>& sub,
                                          double tol = 1e-8) {
  const auto cert = verify_subrepresentation(sheaf, sub);
  if (!cert.certified)
    throw PreconditionError("verify_harmonic_injection: uncertified subrepresentation (" +
                            cert.message + ")");
  auto [restricted, q] = restrict_to(sheaf, sub);
  const auto h_sub = kernel_basis(restricted);
  const auto& dims = sheaf.dims();
  const auto& rdims = restricted.dims();

  Matrix<Scalar> e = Matrix<Scalar>::Zero(dims.total_vertex(), h_sub.dimension());
  for (Index v = 0; v < dims.num_vertices(); ++v)
    e.middleRows(dims.vertex_offset(v), dims.vertex(v)) =
        q.vertex[static_cast<std::size_t>(v)] *
        h_sub.basis.middleRows(rdims.vertex_offset(v), rdims.vertex(v));

  InjectionReport r;
  r.h_sub = h_sub.dimension();
  r.h_full = kernel_basis(sheaf).dimension();
  const Matrix<Scalar> delta = coboundary_matrix(sheaf);
  const double scale = std::max(1.0, static_cast<double>(delta.norm()));
  r.residual = r.h_sub == 0 ? 0.0 : static_cast<double>((delta * e).norm()) / scale;
  if (r.h_sub > 0) {
    const auto sv = Eigen::JacobiSVD<Matrix<Scalar>>(e).singularValues();
    r.min_singular = static_cast<double>(sv(sv.size() - 1));
  } else {
    r.min_singular = 1.0;
  }
  r.certified = r.residual <= tol && r.min_singular > 1e-10 && r.h_sub <= r.h_full;
  r.embedded = e.template cast<double>();
  return r;
}

}  // namespace sheafq
