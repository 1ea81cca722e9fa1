#pragma once

#include "sheafq/harmonic.hpp"
#include "sheafq/sheaf.hpp"
#include "sheafq/subrep.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace sheafq {

/// Eigendecomposition Δ = UΛUᵀ, reused for exact evaluation of e^{−tΔ}.
template <typename Scalar = double>
class SpectralFlow {
 public:
  explicit SpectralFlow(const CellularSheaf<Scalar>& sheaf) {
    const Matrix<Scalar> lap = sheaf_laplacian(sheaf);
    if (!lap.allFinite()) throw NumericError("SpectralFlow: non-finite Laplacian");
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(lap);
    if (es.info() != Eigen::Success) throw NumericError("SpectralFlow: eigendecomposition failed");
    // Rounding can leave tiny negative eigenvalues; Δ is PSD.
    values_ = es.eigenvalues().cwiseMax(Scalar(0));
    vectors_ = es.eigenvectors();
  }

  template <typename Derived>
  Matrix<Scalar> operator()(const Eigen::MatrixBase<Derived>& x0, Scalar t) const {
    if (x0.rows() != vectors_.rows()) throw StructuralError("spectral_diffuse: length mismatch");
    if (t < 0) throw StructuralError("spectral_diffuse: negative time");
    if (t == 0) return x0;
    const Vector<Scalar> decay = (-t * values_).array().exp();
    return vectors_ * (decay.asDiagonal() * (vectors_.transpose() * x0));
  }

  const Vector<Scalar>& eigenvalues() const { return values_; }
  const Matrix<Scalar>& eigenvectors() const { return vectors_; }
  Scalar lambda_max() const { return values_.size() ? values_(values_.size() - 1) : Scalar(0); }

  /// Smallest eigenvalue above rel_tol·λ_max, or 0 if none.
  Scalar smallest_positive(Scalar rel_tol = Scalar(1e-10)) const {
    for (Index i = 0; i < values_.size(); ++i)
      if (values_(i) > rel_tol * lambda_max()) return values_(i);
    return Scalar(0);
  }

 private:
  Vector<Scalar> values_;
  Matrix<Scalar> vectors_;
};

/// X(t) = e^{−tΔ} X(0), exact via eigendecomposition.
template <typename Scalar, typename Derived>
Matrix<Scalar> spectral_diffuse(const CellularSheaf<Scalar>& sheaf,
                                const Eigen::MatrixBase<Derived>& x0, Scalar t) {
  if (t == 0) {
    if (x0.rows() != sheaf.dims().total_vertex()) throw StructuralError("spectral_diffuse: length mismatch");
    return x0;
  }
  return SpectralFlow<Scalar>(sheaf)(x0, t);
}

/// λ_max(Δ_F) from the dense symmetric eigensolver.
template <typename Scalar>
Scalar laplacian_lambda_max(const CellularSheaf<Scalar>& sheaf) {
  if (sheaf.dims().total_vertex() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(sheaf_laplacian(sheaf), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

struct DiffusionConfig {
  enum class Mode { spectral, euler };
  Mode mode = Mode::euler;
  /// Euler step. Unset means 1/λ_max.
  std::optional<double> step_size;
  Index layers = 1;
  double time = 0.0;  ///< spectral mode
  bool energy_trace = true;

  void validate() const {
    if (mode == Mode::euler && layers < 1) throw StructuralError("diffusion: layers must be >= 1");
    if (step_size && !(*step_size > 0)) throw StructuralError("diffusion: step size must be positive");
    if (!(time >= 0)) throw StructuralError("diffusion: time must be nonnegative");
  }
};

struct DiffusionReport {
  MatrixXd state;
  std::vector<std::pair<Index, double>> energy;  ///< (step, Dirichlet energy), step 0 = input
  bool converged = false;                        ///< final energy ≤ 1e-10 × initial energy
  std::optional<Index> nonfinite_at;
  double step_size = 0.0;
  double lambda_max = 0.0;
  /// α·λ_max ≤ 2 − 1e-6, the non-divergence condition for every mode.
  bool stable_step = true;
};

/// L explicit steps x ← x − αΔx. The first non-finite state ends the run and
/// is reported through `nonfinite_at` rather than thrown.
template <typename Derived>
DiffusionReport euler_diffuse(const CellularSheaf<double>& sheaf, const Eigen::MatrixBase<Derived>& x0,
                              const DiffusionConfig& config) {
  config.validate();
  if (x0.rows() != sheaf.dims().total_vertex()) throw StructuralError("euler_diffuse: length mismatch");
  DiffusionReport r;
  r.lambda_max = laplacian_lambda_max(sheaf);
  r.step_size = config.step_size ? *config.step_size : (r.lambda_max > 0 ? 1.0 / r.lambda_max : 1.0);
  r.stable_step = r.step_size * r.lambda_max <= 2.0 - 1e-6;

  MatrixXd x = x0;
  const double e0 = dirichlet_energy(sheaf, x);
  if (config.energy_trace) r.energy.emplace_back(0, e0);
  double last = e0;
  for (Index step = 1; step <= config.layers; ++step) {
    x -= r.step_size * apply_laplacian(sheaf, x);
    if (!x.allFinite()) {
      r.nonfinite_at = step;
      break;
    }
    last = dirichlet_energy(sheaf, x);
    if (!std::isfinite(last)) {
      r.nonfinite_at = step;
      break;
    }
    if (config.energy_trace) r.energy.emplace_back(step, last);
  }
  r.state = std::move(x);
  r.converged = !r.nonfinite_at && last <= 1e-10 * e0;
  return r;
}

struct OversmoothingReport {
  MatrixXd limit;  ///< Π_{H⁰} x0
  Index h = 0;
  /// ‖limit − P_const limit‖/‖limit‖, P_const projecting onto signals that are
  /// constant per stalk coordinate across all vertices.
  double residual_to_constant = 0.0;
  /// Same, against constant-coefficient trivial-line signals x_v = c·w_v.
  /// 1 when the sheaf has no trivial line and the limit is nonzero.
  double residual_to_trivial_line = 0.0;
  bool has_trivial_line = false;
  bool sections_vanish = false;  ///< h = 0 or ‖limit‖ ≤ 1e-10‖x0‖
};

inline OversmoothingReport oversmoothing_probe(const CellularSheaf<double>& sheaf, const MatrixXd& x0) {
  const auto& dims = sheaf.dims();
  const auto basis = kernel_basis(sheaf);
  OversmoothingReport r;
  r.h = basis.dimension();
  r.limit = harmonic_projection(basis, x0);
  const double norm = r.limit.norm();
  r.sections_vanish = r.h == 0 || norm <= 1e-10 * x0.norm();

  Index width = 0;
  for (Index v = 0; v < dims.num_vertices(); ++v) width = std::max(width, dims.vertex(v));
  MatrixXd constants = MatrixXd::Zero(dims.total_vertex(), width);
  for (Index v = 0; v < dims.num_vertices(); ++v)
    for (Index j = 0; j < dims.vertex(v); ++j) constants(dims.vertex_offset(v) + j, j) = 1.0;
  const MatrixXd cq = column_span(constants);

  const auto lines = find_trivial_lines(sheaf);
  r.has_trivial_line = !lines.empty();
  const MatrixXd tq = column_span(MatrixXd(lines.basis.topRows(dims.total_vertex())));

  const auto rel_residual = [&](const MatrixXd& q) {
    if (r.sections_vanish) return 0.0;
    const MatrixXd off = q.cols() ? MatrixXd(r.limit - q * (q.transpose() * r.limit)) : r.limit;
    return off.norm() / norm;
  };
  r.residual_to_constant = rel_residual(cq);
  r.residual_to_trivial_line = rel_residual(tq);
  return r;
}

}  // namespace sheafq
