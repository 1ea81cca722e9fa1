#pragma once

#include "sheafq/sheaf.hpp"
#include "sheafq/subrep.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace sheafq {

/// Real moment-map components. μ_v = −Σ_e AᵀA (negative semidefinite),
/// μ_e = Σ_v AAᵀ (positive semidefinite).
template <typename Scalar = double>
struct MomentMapValue {
  std::vector<Matrix<Scalar>> vertex;
  std::vector<Matrix<Scalar>> edge;

  Index num_objects() const { return static_cast<Index>(vertex.size() + edge.size()); }
  const Matrix<Scalar>& object(Index i) const {
    const auto n = static_cast<Index>(vertex.size());
    return i < n ? vertex[static_cast<std::size_t>(i)] : edge[static_cast<std::size_t>(i - n)];
  }
  Scalar trace_sum() const {
    Scalar s = 0;
    for (Index i = 0; i < num_objects(); ++i) s += object(i).trace();
    return s;
  }
};

template <typename Scalar>
MomentMapValue<Scalar> moment_map(const CellularSheaf<Scalar>& sheaf) {
  const auto& g = sheaf.graph();
  const auto& dims = sheaf.dims();
  MomentMapValue<Scalar> mu;
  for (Index v = 0; v < g.num_vertices(); ++v)
    mu.vertex.push_back(Matrix<Scalar>::Zero(dims.vertex(v), dims.vertex(v)));
  for (Index e = 0; e < g.num_edges(); ++e) {
    Matrix<Scalar> me = Matrix<Scalar>::Zero(dims.edge(e), dims.edge(e));
    for (int side = 0; side < 2; ++side) {
      const auto& a = sheaf.map(e, side);
      mu.vertex[static_cast<std::size_t>(g.endpoint(e, side))].noalias() -= a.transpose() * a;
      me.noalias() += a * a.transpose();
    }
    mu.edge.push_back(std::move(me));
  }
  return mu;
}

/// R_cent = Σ_i ‖μ_i − (tr μ_i / d_i) I‖_F².
template <typename Scalar>
Scalar cent_mm(const MomentMapValue<Scalar>& mu) {
  Scalar total = 0;
  for (Index i = 0; i < mu.num_objects(); ++i) {
    const auto& m = mu.object(i);
    if (m.rows() == 0) continue;
    const Scalar mean = m.trace() / static_cast<Scalar>(m.rows());
    total += (m - mean * Matrix<Scalar>::Identity(m.rows(), m.cols())).squaredNorm();
  }
  return total;
}

template <typename Scalar>
Scalar cent_mm(const CellularSheaf<Scalar>& sheaf) {
  return cent_mm(moment_map(sheaf));
}

/// Stability parameter θ ∈ ℝ^{V ⊔ E}, object order vertices then edges.
/// `admissible()` records that θ·d = 0 was verified numerically.
template <typename Scalar = double>
class ThetaVector {
 public:
  ThetaVector() = default;

  /// Wraps raw values, checking |θ·d| ≤ 1e-12·‖d‖·‖θ‖ (plus a 1e-300 floor).
  static ThetaVector from_values(Vector<Scalar> values, const DimensionVector& dims) {
    if (values.size() != dims.num_objects()) throw StructuralError("theta has wrong length");
    ThetaVector t;
    t.values_ = std::move(values);
    t.dims_ = dims;
    t.admissible_ = std::abs(static_cast<double>(t.pairing())) <=
                    1e-12 * static_cast<double>(dims.as_vector().norm()) *
                            static_cast<double>(t.values_.norm()) + 1e-300;
    return t;
  }

  const Vector<Scalar>& values() const { return values_; }
  Scalar operator()(Index i) const { return values_(i); }
  const DimensionVector& dims() const { return dims_; }
  bool admissible() const { return admissible_; }

  /// θ·d.
  Scalar pairing() const { return values_.dot(dims_.as_vector().template cast<Scalar>()); }

 private:
  Vector<Scalar> values_;
  DimensionVector dims_;
  bool admissible_ = false;
};

/// Orthogonal projection onto {θ : θ·d = 0}: θ = θ̃ − (θ̃·d / d·d) d.
template <typename Scalar>
ThetaVector<Scalar> project_theta(const Vector<Scalar>& raw, const DimensionVector& dims) {
  if (raw.size() != dims.num_objects()) throw StructuralError("raw theta has wrong length");
  const Vector<Scalar> d = dims.as_vector().template cast<Scalar>();
  Vector<Scalar> theta = raw - (raw.dot(d) / d.squaredNorm()) * d;
  return ThetaVector<Scalar>::from_values(std::move(theta), dims);
}

/// R_{θ-μ} = Σ_i ‖μ_i − θ_i I‖_F². θ must be admissible.
template <typename Scalar>
Scalar theta_mm(const MomentMapValue<Scalar>& mu, const ThetaVector<Scalar>& theta) {
  if (!theta.admissible())
    throw PreconditionError("theta_mm: theta is not admissible; pass it through project_theta");
  if (theta.values().size() != mu.num_objects()) throw StructuralError("theta has wrong length");
  Scalar total = 0;
  for (Index i = 0; i < mu.num_objects(); ++i) {
    const auto& m = mu.object(i);
    total += (m - theta(i) * Matrix<Scalar>::Identity(m.rows(), m.cols())).squaredNorm();
  }
  return total;
}

template <typename Scalar>
Scalar theta_mm(const CellularSheaf<Scalar>& sheaf, const ThetaVector<Scalar>& theta) {
  return theta_mm(moment_map(sheaf), theta);
}

/// Gradients of the moment penalties with respect to each restriction map.
/// For a penalty Σ_i ‖μ_i − c_i I‖² with residuals D_i the map gradient is
/// 4(D_e A − A D_v).
template <typename Scalar>
struct MomentPenaltyGradient {
  Scalar value = 0;
  std::vector<Matrix<Scalar>> maps;  ///< per incidence
  Vector<Scalar> theta;              ///< ∂R/∂θ (θ-penalty only; zero otherwise)
};

namespace detail {

template <typename Scalar>
MomentPenaltyGradient<Scalar> penalty_gradient(const CellularSheaf<Scalar>& sheaf,
                                               const std::vector<Matrix<Scalar>>& residual,
                                               Scalar value) {
  const auto& g = sheaf.graph();
  const Index n = g.num_vertices();
  MomentPenaltyGradient<Scalar> out;
  out.value = value;
  for (Index e = 0; e < g.num_edges(); ++e) {
    for (int side = 0; side < 2; ++side) {
      const auto& a = sheaf.map(e, side);
      const auto& dv = residual[static_cast<std::size_t>(g.endpoint(e, side))];
      const auto& de = residual[static_cast<std::size_t>(n + e)];
      out.maps.push_back(Scalar(4) * (de * a - a * dv));
    }
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
MomentPenaltyGradient<Scalar> cent_mm_gradient(const CellularSheaf<Scalar>& sheaf) {
  const auto mu = moment_map(sheaf);
  std::vector<Matrix<Scalar>> residual;
  Scalar value = 0;
  for (Index i = 0; i < mu.num_objects(); ++i) {
    const auto& m = mu.object(i);
    const Scalar mean = m.rows() > 0 ? m.trace() / static_cast<Scalar>(m.rows()) : Scalar(0);
    residual.push_back(m - mean * Matrix<Scalar>::Identity(m.rows(), m.cols()));
    value += residual.back().squaredNorm();
  }
  auto out = detail::penalty_gradient(sheaf, residual, value);
  out.theta = Vector<Scalar>::Zero(mu.num_objects());
  return out;
}

/// Gradient of R_{θ-μ} with respect to the maps and to θ (not θ̃).
template <typename Scalar>
MomentPenaltyGradient<Scalar> theta_mm_gradient(const CellularSheaf<Scalar>& sheaf,
                                                const ThetaVector<Scalar>& theta) {
  const auto mu = moment_map(sheaf);
  const Scalar value = theta_mm(mu, theta);
  std::vector<Matrix<Scalar>> residual;
  Vector<Scalar> dtheta(mu.num_objects());
  for (Index i = 0; i < mu.num_objects(); ++i) {
    const auto& m = mu.object(i);
    residual.push_back(m - theta(i) * Matrix<Scalar>::Identity(m.rows(), m.cols()));
    dtheta(i) = Scalar(-2) * residual.back().trace();
  }
  auto out = detail::penalty_gradient(sheaf, residual, value);
  out.theta = std::move(dtheta);
  return out;
}

/// θ·dim F′ = Σ_i θ_i k_i.
template <typename Scalar>
Scalar theta_weight(const ThetaVector<Scalar>& theta, const DimensionVector& sub_dims) {
  const auto& dims = theta.dims();
  if (sub_dims.num_vertices() != dims.num_vertices() || sub_dims.num_edges() != dims.num_edges())
    throw StructuralError("theta_weight: subrepresentation dims do not match");
  Scalar w = 0;
  for (Index i = 0; i < dims.num_objects(); ++i) {
    if (sub_dims.object(i) > dims.object(i))
      throw StructuralError("theta_weight: subrepresentation larger than the representation");
    w += theta(i) * static_cast<Scalar>(sub_dims.object(i));
  }
  return w;
}

/// θ(F_triv) = Σ_v θ_v + Σ_e θ_e.
template <typename Scalar>
Scalar trivial_weight(const ThetaVector<Scalar>& theta) {
  return theta.values().sum();
}

struct CandidateVerdict {
  double weight = 0.0;
  bool violates = false;  ///< θ·dim F′ < −1e-12
};

struct KingVerdict {
  std::vector<CandidateVerdict> candidates;
  /// No violation among the supplied candidates. This is not a proof of
  /// semistability: only the candidates are examined.
  bool no_violations = true;
};

template <typename Scalar>
KingVerdict check_king_semistable(const CellularSheaf<Scalar>& sheaf, const ThetaVector<Scalar>& theta,
                                  const std::vector<Subrepresentation<Scalar>>& candidates) {
  if (!theta.admissible()) throw PreconditionError("check_king_semistable: theta not admissible");
  if (!(theta.dims() == sheaf.dims())) throw StructuralError("theta dims do not match the sheaf");
  KingVerdict out;
  for (const auto& c : candidates) {
    const auto cert = verify_subrepresentation(sheaf, c);
    if (!cert.certified)
      throw PreconditionError("check_king_semistable: candidate is not a subrepresentation (" +
                              cert.message + ")");
    CandidateVerdict v;
    v.weight = static_cast<double>(theta_weight(theta, c.sub_dims()));
    v.violates = v.weight < -1e-12;
    out.no_violations = out.no_violations && !v.violates;
    out.candidates.push_back(v);
  }
  return out;
}

struct WallReport {
  bool uniform = false;
  /// Uniform dims: every admissible θ gives θ(F_triv) = 0 (checked on random draws).
  bool forced_trivial_weight_zero = false;
  int draws = 0;
  double max_abs_trivial_weight = 0.0;
  /// Non-uniform dims: admissible θ with θ(F_triv) = −1.
  std::optional<ThetaVector<double>> escape_theta;
  double escape_weight = 0.0;
};

/// Equal-stalk stability wall.
///
/// Uniform dims: samples `draws` Gaussian θ̃, projects, and records the largest
/// |θ(F_triv)|. Otherwise projects the all-ones vector off d, negates it and
/// rescales so θ(F_triv) = −1.
inline WallReport stability_wall_diagnostic(const DimensionVector& dims, int draws = 100,
                                            std::uint64_t seed = 0x5eedULL) {
  WallReport r;
  r.uniform = dims.is_uniform();
  const Index n = dims.num_objects();
  if (r.uniform) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    r.draws = draws;
    for (int k = 0; k < draws; ++k) {
      VectorXd raw(n);
      for (Index i = 0; i < n; ++i) raw(i) = normal(rng);
      const auto theta = project_theta(raw, dims);
      r.max_abs_trivial_weight = std::max(r.max_abs_trivial_weight, std::abs(trivial_weight(theta)));
    }
    r.forced_trivial_weight_zero = r.max_abs_trivial_weight <= 1e-12;
    return r;
  }
  const VectorXd d = dims.as_vector();
  const VectorXd ones = VectorXd::Ones(n);
  const VectorXd escape = -(ones - (ones.dot(d) / d.squaredNorm()) * d);
  // 1ᵀ·escape = −‖P 1‖² < 0 because d is not proportional to 1.
  const double w = escape.sum();
  auto theta = project_theta(VectorXd(escape / -w), dims);
  r.escape_weight = trivial_weight(theta);
  r.escape_theta = std::move(theta);
  return r;
}

}  // namespace sheafq
