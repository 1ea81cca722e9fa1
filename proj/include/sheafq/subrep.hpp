#pragma once

#include "sheafq/linalg.hpp"
#include "sheafq/sheaf.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sheafq {

/// Per-object subspace bases: W_v is d_v×k_v, W_e is d_e×k_e.
template <typename Scalar = double>
struct Subrepresentation {
  std::vector<Matrix<Scalar>> vertex;
  std::vector<Matrix<Scalar>> edge;

  /// The improper subrepresentation F itself.
  static Subrepresentation full(const DimensionVector& dims) {
    Subrepresentation s;
    for (Index v = 0; v < dims.num_vertices(); ++v)
      s.vertex.push_back(Matrix<Scalar>::Identity(dims.vertex(v), dims.vertex(v)));
    for (Index e = 0; e < dims.num_edges(); ++e)
      s.edge.push_back(Matrix<Scalar>::Identity(dims.edge(e), dims.edge(e)));
    return s;
  }

  /// Span of the first k coordinate axes in every stalk.
  static Subrepresentation coordinate(const DimensionVector& dims, Index k) {
    Subrepresentation s;
    for (Index v = 0; v < dims.num_vertices(); ++v)
      s.vertex.push_back(Matrix<Scalar>::Identity(dims.vertex(v), k));
    for (Index e = 0; e < dims.num_edges(); ++e)
      s.edge.push_back(Matrix<Scalar>::Identity(dims.edge(e), k));
    return s;
  }

  /// k_i per object in V ⊔ E order.
  DimensionVector sub_dims() const {
    std::vector<Index> vd, ed;
    for (const auto& w : vertex) vd.push_back(w.cols());
    for (const auto& w : edge) ed.push_back(w.cols());
    return DimensionVector(std::move(vd), std::move(ed), 0);
  }
};

struct SubrepReport {
  bool certified = false;
  Index worst_incidence = -1;   ///< flat incidence index, -1 when there are no edges
  double worst_residual = 0.0;  ///< relative off-span residual at the worst incidence
  std::string message;
};

namespace detail {

template <typename Scalar>
void check_sub_shapes(const CellularSheaf<Scalar>& sheaf, const Subrepresentation<Scalar>& sub) {
  const auto& dims = sheaf.dims();
  if (static_cast<Index>(sub.vertex.size()) != dims.num_vertices() ||
      static_cast<Index>(sub.edge.size()) != dims.num_edges())
    throw StructuralError("subrepresentation has the wrong number of bases");
  for (Index v = 0; v < dims.num_vertices(); ++v)
    if (sub.vertex[static_cast<std::size_t>(v)].rows() != dims.vertex(v))
      throw StructuralError("vertex basis row count does not match stalk dimension");
  for (Index e = 0; e < dims.num_edges(); ++e)
    if (sub.edge[static_cast<std::size_t>(e)].rows() != dims.edge(e))
      throw StructuralError("edge basis row count does not match stalk dimension");
}

}  // namespace detail

/// Orthonormalized copy of every basis. Throws StructuralError on rank deficiency.
template <typename Scalar>
Subrepresentation<Scalar> orthonormalize(const Subrepresentation<Scalar>& sub) {
  Subrepresentation<Scalar> q;
  for (const auto& w : sub.vertex) q.vertex.push_back(orthonormal_columns(w));
  for (const auto& w : sub.edge) q.edge.push_back(orthonormal_columns(w));
  return q;
}

/// Certifies the closure condition A_{v,e}·col(W_v) ⊆ col(W_e) on every
/// incidence: ‖(I − P_{W_e}) A W_v‖_F ≤ tol·‖A W_v‖_F.
template <typename Scalar>
SubrepReport verify_subrepresentation(const CellularSheaf<Scalar>& sheaf,
                                      const Subrepresentation<Scalar>& sub, double tol = 1e-8) {
  detail::check_sub_shapes(sheaf, sub);
  const auto q = orthonormalize(sub);
  const auto& graph = sheaf.graph();
  SubrepReport report;
  report.certified = true;
  for (Index e = 0; e < graph.num_edges(); ++e) {
    for (int side = 0; side < 2; ++side) {
      const Index v = graph.endpoint(e, side);
      const Matrix<Scalar> image = sheaf.map(e, side) * q.vertex[static_cast<std::size_t>(v)];
      const double scale = static_cast<double>(image.norm());
      const double off = static_cast<double>(off_span_norm(q.edge[static_cast<std::size_t>(e)], image));
      const double rel = scale > 0 ? off / scale : 0.0;
      if (report.worst_incidence < 0 || rel > report.worst_residual) {
        report.worst_residual = rel;
        report.worst_incidence = incidence_index(e, side);
      }
      if (off > tol * scale) report.certified = false;
    }
  }
  if (!report.certified) {
    const Index e = report.worst_incidence / 2;
    report.message = "closure fails at vertex '" +
                     graph.vertex_id(graph.endpoint(e, static_cast<int>(report.worst_incidence % 2))) +
                     "' into edge " + graph.edge_key(e);
  }
  return report;
}

/// Restricts F to a subrepresentation: stalks become col(W_i) in orthonormal
/// coordinates Q_i and maps become Q_eᵀ A_{v,e} Q_v. Returns the restricted
/// sheaf together with the orthonormal bases used for the embedding.
template <typename Scalar>
std::pair<CellularSheaf<Scalar>, Subrepresentation<Scalar>> restrict_to(
    const CellularSheaf<Scalar>& sheaf, const Subrepresentation<Scalar>& sub) {
  detail::check_sub_shapes(sheaf, sub);
  auto q = orthonormalize(sub);
  const auto& graph = sheaf.graph();
  std::vector<Matrix<Scalar>> maps;
  for (Index e = 0; e < graph.num_edges(); ++e)
    for (int side = 0; side < 2; ++side)
      maps.push_back(q.edge[static_cast<std::size_t>(e)].transpose() * sheaf.map(e, side) *
                     q.vertex[static_cast<std::size_t>(graph.endpoint(e, side))]);
  CellularSheaf<Scalar> restricted(graph, q.sub_dims(), std::move(maps));
  return {std::move(restricted), std::move(q)};
}

/// Solution space of {A_{v,e} w_v = w_e for every incidence} in ℝ^{N₀+N₁}.
template <typename Scalar = double>
struct TrivialLines {
  /// Orthonormal columns; rows are [w_v blocks (C⁰ order); w_e blocks (C¹ order)].
  Matrix<Scalar> basis;
  /// For each basis column, the objects (V ⊔ E order) whose block is below 1e-10.
  std::vector<std::vector<Index>> degenerate_objects;
  /// Objects where every solution vanishes.
  std::vector<Index> always_zero_objects;

  Index dimension() const { return basis.cols(); }
  bool empty() const { return basis.cols() == 0; }
};

/// Assembles the trivial-line constraint system and returns its SVD nullspace
/// (cutoff 1e-10·σ_max).
template <typename Scalar>
TrivialLines<Scalar> find_trivial_lines(const CellularSheaf<Scalar>& sheaf,
                                        Scalar rel_tol = Scalar(1e-10)) {
  const auto& graph = sheaf.graph();
  const auto& dims = sheaf.dims();
  const Index n0 = dims.total_vertex(), n1 = dims.total_edge();
  Index rows = 0;
  for (Index e = 0; e < graph.num_edges(); ++e) rows += 2 * dims.edge(e);
  Matrix<Scalar> system = Matrix<Scalar>::Zero(rows, n0 + n1);
  Index r = 0;
  for (Index e = 0; e < graph.num_edges(); ++e) {
    for (int side = 0; side < 2; ++side) {
      const Index v = graph.endpoint(e, side);
      const Index de = dims.edge(e);
      system.block(r, dims.vertex_offset(v), de, dims.vertex(v)) = sheaf.map(e, side);
      system.block(r, n0 + dims.edge_offset(e), de, de) = -Matrix<Scalar>::Identity(de, de);
      r += de;
    }
  }
  TrivialLines<Scalar> out;
  out.basis = nullspace(system, rel_tol).basis;

  const auto block_of = [&](Index obj) {
    if (obj < dims.num_vertices()) return std::pair{dims.vertex_offset(obj), dims.vertex(obj)};
    const Index e = obj - dims.num_vertices();
    return std::pair{n0 + dims.edge_offset(e), dims.edge(e)};
  };
  constexpr double kZero = 1e-10;
  for (Index c = 0; c < out.basis.cols(); ++c) {
    std::vector<Index> bad;
    for (Index obj = 0; obj < dims.num_objects(); ++obj) {
      const auto [off, len] = block_of(obj);
      if (static_cast<double>(out.basis.col(c).segment(off, len).norm()) < kZero) bad.push_back(obj);
    }
    out.degenerate_objects.push_back(std::move(bad));
  }
  if (out.basis.cols() > 0) {
    for (Index obj = 0; obj < dims.num_objects(); ++obj) {
      const auto [off, len] = block_of(obj);
      if (static_cast<double>(out.basis.middleRows(off, len).norm()) < kZero)
        out.always_zero_objects.push_back(obj);
    }
  }
  return out;
}

/// Splits a solution vector of the trivial-line system into a k=1
/// subrepresentation. Throws PreconditionError if a block is degenerate.
template <typename Scalar>
Subrepresentation<Scalar> line_subrepresentation(const CellularSheaf<Scalar>& sheaf,
                                                 const Vector<Scalar>& solution) {
  const auto& dims = sheaf.dims();
  const Index n0 = dims.total_vertex();
  if (solution.size() != n0 + dims.total_edge())
    throw StructuralError("trivial-line solution has wrong length");
  Subrepresentation<Scalar> sub;
  for (Index v = 0; v < dims.num_vertices(); ++v) {
    Matrix<Scalar> w = solution.segment(dims.vertex_offset(v), dims.vertex(v));
    if (static_cast<double>(w.norm()) < 1e-10)
      throw PreconditionError("trivial-line solution is degenerate at vertex " + std::to_string(v));
    sub.vertex.push_back(std::move(w));
  }
  for (Index e = 0; e < dims.num_edges(); ++e) {
    Matrix<Scalar> w = solution.segment(n0 + dims.edge_offset(e), dims.edge(e));
    if (static_cast<double>(w.norm()) < 1e-10)
      throw PreconditionError("trivial-line solution is degenerate at edge " + std::to_string(e));
    sub.edge.push_back(std::move(w));
  }
  return sub;
}

}  // namespace sheafq
