#pragma once

#include "sheafq/gauge.hpp"
#include "sheafq/graph.hpp"
#include "sheafq/sheaf.hpp"

#include <Eigen/QR>

#include <random>

// Random instance generators shared by the property suites, tests and CLI.

namespace sheafq {

using Rng = std::mt19937_64;

inline MatrixXd random_gaussian(Index rows, Index cols, Rng& rng, double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Haar-ish orthogonal matrix from the QR of a Gaussian matrix.
inline MatrixXd random_orthogonal(Index d, Rng& rng) {
  Eigen::HouseholderQR<MatrixXd> qr(random_gaussian(d, d, rng));
  MatrixXd q = qr.householderQ();
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < d; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  return q;
}

/// Random spanning tree plus each remaining pair independently with probability p_extra.
inline Graph random_connected_graph(Index n, double p_extra, Rng& rng) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index v = 1; v < n; ++v) {
    std::uniform_int_distribution<Index> pick(0, v - 1);
    edges.emplace_back(pick(rng), v);
  }
  Graph g = Graph::from_indices(n, edges);
  std::bernoulli_distribution coin(p_extra);
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b)
      if (!g.find_edge(a, b) && coin(rng)) g.add_edge(a, b);
  return g;
}

inline DimensionVector random_dims(const Graph& g, Index max_dim, Rng& rng) {
  std::uniform_int_distribution<Index> pick(1, max_dim);
  std::vector<Index> vd, ed;
  for (Index v = 0; v < g.num_vertices(); ++v) vd.push_back(pick(rng));
  for (Index e = 0; e < g.num_edges(); ++e) ed.push_back(pick(rng));
  return DimensionVector(std::move(vd), std::move(ed));
}

/// Gaussian restriction maps.
inline CellularSheaf<double> random_sheaf(const Graph& g, const DimensionVector& dims, Rng& rng,
                                          double stddev = 1.0) {
  std::vector<MatrixXd> maps;
  for (Index e = 0; e < g.num_edges(); ++e)
    for (int side = 0; side < 2; ++side)
      maps.push_back(random_gaussian(dims.edge(e), dims.vertex(g.endpoint(e, side)), rng, stddev));
  return CellularSheaf<double>(g, dims, std::move(maps));
}

/// Orthogonal blocks when `orthogonal`, otherwise I + 0.3·Gaussian (well conditioned).
inline GaugeElement<double> random_gauge(const DimensionVector& dims, Rng& rng, bool orthogonal) {
  const auto block = [&](Index d) {
    if (orthogonal) return random_orthogonal(d, rng);
    return MatrixXd(MatrixXd::Identity(d, d) + 0.3 * random_gaussian(d, d, rng));
  };
  GaugeElement<double> g;
  for (Index v = 0; v < dims.num_vertices(); ++v) g.vertex.push_back(block(dims.vertex(v)));
  for (Index e = 0; e < dims.num_edges(); ++e) g.edge.push_back(block(dims.edge(e)));
  return g;
}

}  // namespace sheafq
