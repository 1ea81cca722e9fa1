#pragma once

#include "sheafq/sheaf.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

namespace sheafq {

/// Element of the gauge group G_d = Π GL(d_v) × Π GL(d_e).
template <typename Scalar = double>
struct GaugeElement {
  std::vector<Matrix<Scalar>> vertex;
  std::vector<Matrix<Scalar>> edge;

  static GaugeElement identity(const DimensionVector& dims) {
    GaugeElement g;
    for (Index v = 0; v < dims.num_vertices(); ++v)
      g.vertex.push_back(Matrix<Scalar>::Identity(dims.vertex(v), dims.vertex(v)));
    for (Index e = 0; e < dims.num_edges(); ++e)
      g.edge.push_back(Matrix<Scalar>::Identity(dims.edge(e), dims.edge(e)));
    return g;
  }

  /// Blockwise product (*this)·rhs, i.e. apply rhs first.
  GaugeElement operator*(const GaugeElement& rhs) const {
    if (vertex.size() != rhs.vertex.size() || edge.size() != rhs.edge.size())
      throw StructuralError("gauge elements have different block counts");
    GaugeElement out;
    for (std::size_t i = 0; i < vertex.size(); ++i) out.vertex.push_back(vertex[i] * rhs.vertex[i]);
    for (std::size_t i = 0; i < edge.size(); ++i) out.edge.push_back(edge[i] * rhs.edge[i]);
    return out;
  }
};

/// Reciprocal 2-norm condition number σ_min/σ_max.
template <typename Scalar>
Scalar reciprocal_condition(const Matrix<Scalar>& m) {
  if (m.size() == 0) return Scalar(1);
  const auto sv = Eigen::JacobiSVD<Matrix<Scalar>>(m).singularValues();
  if (!(sv(0) > 0)) return Scalar(0);
  return sv(sv.size() - 1) / sv(0);
}

/// F_{v⊴e} ↦ g_e F_{v⊴e} g_v⁻¹ on every incidence.
///
/// Throws StructuralError when a block has the wrong size and NumericError
/// when a block's reciprocal condition number is below `min_rcond`.
template <typename Scalar>
CellularSheaf<Scalar> apply_gauge(const CellularSheaf<Scalar>& sheaf, const GaugeElement<Scalar>& g,
                                  Scalar min_rcond = Scalar(1e-10)) {
  const auto& graph = sheaf.graph();
  const auto& dims = sheaf.dims();
  if (static_cast<Index>(g.vertex.size()) != graph.num_vertices() ||
      static_cast<Index>(g.edge.size()) != graph.num_edges())
    throw StructuralError("gauge element block count does not match the sheaf");

  std::vector<Matrix<Scalar>> vinv;
  vinv.reserve(g.vertex.size());
  for (Index v = 0; v < graph.num_vertices(); ++v) {
    const auto& gv = g.vertex[static_cast<std::size_t>(v)];
    if (gv.rows() != dims.vertex(v) || gv.cols() != dims.vertex(v))
      throw StructuralError("gauge block for vertex '" + graph.vertex_id(v) + "' has wrong size");
    if (!(reciprocal_condition(gv) >= min_rcond))
      throw NumericError("gauge block for vertex '" + graph.vertex_id(v) + "' is near-singular");
    vinv.push_back(gv.inverse());
  }
  for (Index e = 0; e < graph.num_edges(); ++e) {
    const auto& ge = g.edge[static_cast<std::size_t>(e)];
    if (ge.rows() != dims.edge(e) || ge.cols() != dims.edge(e))
      throw StructuralError("gauge block for edge " + graph.edge_key(e) + " has wrong size");
    if (!(reciprocal_condition(ge) >= min_rcond))
      throw NumericError("gauge block for edge " + graph.edge_key(e) + " is near-singular");
  }

  std::vector<Matrix<Scalar>> maps;
  maps.reserve(static_cast<std::size_t>(sheaf.num_incidences()));
  for (Index e = 0; e < graph.num_edges(); ++e)
    for (int side = 0; side < 2; ++side)
      maps.push_back(g.edge[static_cast<std::size_t>(e)] * sheaf.map(e, side) *
                     vinv[static_cast<std::size_t>(graph.endpoint(e, side))]);
  return CellularSheaf<Scalar>(graph, dims, std::move(maps));
}

}  // namespace sheafq
