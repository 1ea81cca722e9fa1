#pragma once

#include "sheafq/graph.hpp"
#include "sheafq/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sheafq {

/// A cellular sheaf on a graph, i.e. a point of Rep(Q_G, d): one d_e×d_v
/// restriction matrix per incidence v⊴e, indexed by incidence_index(e, side).
template <typename Scalar = double>
class CellularSheaf {
 public:
  using MatrixType = Matrix<Scalar>;

  CellularSheaf() = default;

  /// All restriction maps zero.
  CellularSheaf(Graph graph, DimensionVector dims) : graph_(std::move(graph)), dims_(std::move(dims)) {
    dims_.check_matches(graph_);
    maps_.reserve(static_cast<std::size_t>(2 * graph_.num_edges()));
    for (Index e = 0; e < graph_.num_edges(); ++e)
      for (int side = 0; side < 2; ++side)
        maps_.push_back(MatrixType::Zero(dims_.edge(e), dims_.vertex(graph_.endpoint(e, side))));
  }

  CellularSheaf(Graph graph, DimensionVector dims, std::vector<MatrixType> maps)
      : graph_(std::move(graph)), dims_(std::move(dims)), maps_(std::move(maps)) {
    validate();
  }

  /// Every restriction map is the leading min(d_e, d_v) identity block.
  static CellularSheaf identity(Graph graph, DimensionVector dims) {
    CellularSheaf s(std::move(graph), std::move(dims));
    for (auto& m : s.maps_) m.setIdentity();
    return s;
  }
  static CellularSheaf identity(const Graph& graph, Index d) {
    return identity(graph, DimensionVector::uniform(graph, d, d));
  }

  const Graph& graph() const { return graph_; }
  const DimensionVector& dims() const { return dims_; }
  Index num_incidences() const { return static_cast<Index>(maps_.size()); }

  const MatrixType& map(Index e, int side) const {
    return maps_.at(static_cast<std::size_t>(incidence_index(e, side)));
  }
  const MatrixType& map(Incidence inc) const { return map(inc.edge, inc.side); }
  const std::vector<MatrixType>& maps() const { return maps_; }

  /// Replaces one restriction map; shape must be (d_e, d_v).
  void set_map(Index e, int side, MatrixType m) {
    check_shape(e, side, m);
    if (!m.allFinite()) throw NumericError("non-finite restriction map entry");
    maps_.at(static_cast<std::size_t>(incidence_index(e, side))) = std::move(m);
  }

  /// Mutable access for in-place parameter updates; the shape must not change.
  MatrixType& mutable_map(Index e, int side) {
    return maps_.at(static_cast<std::size_t>(incidence_index(e, side)));
  }

  void validate() const {
    graph_.validate();
    dims_.check_matches(graph_);
    if (num_incidences() != 2 * graph_.num_edges())
      throw StructuralError("expected one restriction map per incidence (" +
                            std::to_string(2 * graph_.num_edges()) + "), got " +
                            std::to_string(num_incidences()));
    for (Index e = 0; e < graph_.num_edges(); ++e) {
      for (int side = 0; side < 2; ++side) {
        check_shape(e, side, map(e, side));
        if (!map(e, side).allFinite())
          throw NumericError("non-finite restriction map on edge " + graph_.edge_key(e));
      }
    }
  }

  template <typename Other>
  CellularSheaf<Other> cast() const {
    std::vector<Matrix<Other>> m;
    m.reserve(maps_.size());
    for (const auto& a : maps_) m.push_back(a.template cast<Other>());
    return CellularSheaf<Other>(graph_, dims_, std::move(m));
  }

 private:
  void check_shape(Index e, int side, const MatrixType& m) const {
    const Index rows = dims_.edge(e), cols = dims_.vertex(graph_.endpoint(e, side));
    if (m.rows() != rows || m.cols() != cols)
      throw StructuralError("restriction map on edge " + graph_.edge_key(e) + " side " +
                            std::to_string(side) + " has shape " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                            std::to_string(cols));
  }

  Graph graph_;
  DimensionVector dims_;
  std::vector<MatrixType> maps_;
};

/// Dense coboundary δ: C⁰ → C¹, (δx)_e = A_{v,e} x_v − A_{u,e} x_u with u < v.
template <typename Scalar>
Matrix<Scalar> coboundary_matrix(const CellularSheaf<Scalar>& sheaf) {
  const auto& g = sheaf.graph();
  const auto& d = sheaf.dims();
  Matrix<Scalar> delta = Matrix<Scalar>::Zero(d.total_edge(), d.total_vertex());
  for (Index e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    const Index row = d.edge_offset(e), de = d.edge(e);
    delta.block(row, d.vertex_offset(ed.u), de, d.vertex(ed.u)) = -sheaf.map(e, 0);
    delta.block(row, d.vertex_offset(ed.v), de, d.vertex(ed.v)) += sheaf.map(e, 1);
  }
  return delta;
}

/// δX blockwise without materializing δ. X is N₀×f.
template <typename Scalar, typename Derived>
Matrix<Scalar> apply_coboundary(const CellularSheaf<Scalar>& sheaf,
                                const Eigen::MatrixBase<Derived>& x) {
  const auto& g = sheaf.graph();
  const auto& d = sheaf.dims();
  if (x.rows() != d.total_vertex()) throw StructuralError("0-cochain has wrong length");
  Matrix<Scalar> out(d.total_edge(), x.cols());
  for (Index e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    out.middleRows(d.edge_offset(e), d.edge(e)).noalias() =
        sheaf.map(e, 1) * x.middleRows(d.vertex_offset(ed.v), d.vertex(ed.v));
    out.middleRows(d.edge_offset(e), d.edge(e)).noalias() -=
        sheaf.map(e, 0) * x.middleRows(d.vertex_offset(ed.u), d.vertex(ed.u));
  }
  return out;
}

/// δᵀY blockwise. Y is N₁×f.
template <typename Scalar, typename Derived>
Matrix<Scalar> apply_coboundary_transpose(const CellularSheaf<Scalar>& sheaf,
                                          const Eigen::MatrixBase<Derived>& y) {
  const auto& g = sheaf.graph();
  const auto& d = sheaf.dims();
  if (y.rows() != d.total_edge()) throw StructuralError("1-cochain has wrong length");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(d.total_vertex(), y.cols());
  for (Index e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    const auto ye = y.middleRows(d.edge_offset(e), d.edge(e));
    out.middleRows(d.vertex_offset(ed.v), d.vertex(ed.v)).noalias() +=
        sheaf.map(e, 1).transpose() * ye;
    out.middleRows(d.vertex_offset(ed.u), d.vertex(ed.u)).noalias() -=
        sheaf.map(e, 0).transpose() * ye;
  }
  return out;
}

/// Δ_F = δᵀδ, dense and symmetric positive semidefinite.
template <typename Scalar>
Matrix<Scalar> sheaf_laplacian(const CellularSheaf<Scalar>& sheaf) {
  const Matrix<Scalar> delta = coboundary_matrix(sheaf);
  Matrix<Scalar> lap = delta.transpose() * delta;
  // The product is symmetric up to summation order; make it exactly so.
  return (lap + lap.transpose()) / Scalar(2);
}

/// ΔX = δᵀ(δX) blockwise.
template <typename Scalar, typename Derived>
Matrix<Scalar> apply_laplacian(const CellularSheaf<Scalar>& sheaf,
                               const Eigen::MatrixBase<Derived>& x) {
  return apply_coboundary_transpose(sheaf, apply_coboundary(sheaf, x));
}

/// ‖δx‖², summed edge by edge as Σ_e ‖A_{v,e}x_v − A_{u,e}x_u‖². Multi-column
/// input sums over channels.
template <typename Scalar, typename Derived>
Scalar dirichlet_energy(const CellularSheaf<Scalar>& sheaf, const Eigen::MatrixBase<Derived>& x) {
  const auto& g = sheaf.graph();
  const auto& d = sheaf.dims();
  if (x.rows() != d.total_vertex()) throw StructuralError("0-cochain has wrong length");
  Scalar total = 0;
  for (Index e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    total += (sheaf.map(e, 1) * x.middleRows(d.vertex_offset(ed.v), d.vertex(ed.v)) -
              sheaf.map(e, 0) * x.middleRows(d.vertex_offset(ed.u), d.vertex(ed.u)))
                 .squaredNorm();
  }
  return total;
}

/// Stalk-wise direct sum f ⊕ g on a shared graph. Each stalk is ordered
/// [f-part, g-part]; each map is block-diagonal.
template <typename Scalar>
CellularSheaf<Scalar> direct_sum(const CellularSheaf<Scalar>& f, const CellularSheaf<Scalar>& g) {
  if (!(f.graph() == g.graph())) throw StructuralError("direct_sum: summands live on different graphs");
  const auto& graph = f.graph();
  std::vector<Index> vd, ed;
  for (Index v = 0; v < graph.num_vertices(); ++v)
    vd.push_back(f.dims().vertex(v) + g.dims().vertex(v));
  for (Index e = 0; e < graph.num_edges(); ++e) ed.push_back(f.dims().edge(e) + g.dims().edge(e));
  DimensionVector dims(std::move(vd), std::move(ed), 0);
  std::vector<Matrix<Scalar>> maps;
  maps.reserve(static_cast<std::size_t>(f.num_incidences()));
  for (Index e = 0; e < graph.num_edges(); ++e) {
    for (int side = 0; side < 2; ++side) {
      const auto& a = f.map(e, side);
      const auto& b = g.map(e, side);
      Matrix<Scalar> m = Matrix<Scalar>::Zero(a.rows() + b.rows(), a.cols() + b.cols());
      m.topLeftCorner(a.rows(), a.cols()) = a;
      m.bottomRightCorner(b.rows(), b.cols()) = b;
      maps.push_back(std::move(m));
    }
  }
  return CellularSheaf<Scalar>(graph, std::move(dims), std::move(maps));
}

/// Interleaving permutation for C⁰(f⊕g): entry k is the row of C⁰(f⊕g) holding
/// coordinate k of the concatenation [C⁰(f); C⁰(g)].
template <typename Scalar>
std::vector<Index> direct_sum_permutation(const CellularSheaf<Scalar>& f,
                                          const CellularSheaf<Scalar>& g) {
  const Index n = f.graph().num_vertices();
  const Index nf = f.dims().total_vertex();
  std::vector<Index> perm(static_cast<std::size_t>(nf + g.dims().total_vertex()));
  Index offset = 0;
  for (Index v = 0; v < n; ++v) {
    const Index df = f.dims().vertex(v), dg = g.dims().vertex(v);
    for (Index i = 0; i < df; ++i) perm[static_cast<std::size_t>(f.dims().vertex_offset(v) + i)] = offset + i;
    for (Index i = 0; i < dg; ++i)
      perm[static_cast<std::size_t>(nf + g.dims().vertex_offset(v) + i)] = offset + df + i;
    offset += df + dg;
  }
  return perm;
}

/// Embeds column blocks from C⁰(f) and C⁰(g) into C⁰(f⊕g).
template <typename Scalar>
Matrix<Scalar> embed_direct_sum(const CellularSheaf<Scalar>& f, const CellularSheaf<Scalar>& g,
                                const Matrix<Scalar>& xf, const Matrix<Scalar>& xg) {
  const auto perm = direct_sum_permutation(f, g);
  const Index nf = f.dims().total_vertex();
  Matrix<Scalar> out = Matrix<Scalar>::Zero(static_cast<Index>(perm.size()), xf.cols() + xg.cols());
  for (Index k = 0; k < nf; ++k) out.row(perm[static_cast<std::size_t>(k)]).head(xf.cols()) = xf.row(k);
  for (Index k = 0; k < xg.rows(); ++k)
    out.row(perm[static_cast<std::size_t>(nf + k)]).tail(xg.cols()) = xg.row(k);
  return out;
}

}  // namespace sheafq
