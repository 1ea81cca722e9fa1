#pragma once

#include "sheafq/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sheafq {

/// Undirected edge stored with endpoints sorted by vertex index (u < v).
/// The coboundary orients every edge from u to v.
struct Edge {
  Index u = 0;
  Index v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One vertex-edge incidence. side 0 is the lower endpoint, side 1 the upper.
struct Incidence {
  Index edge = 0;
  int side = 0;
  friend bool operator==(const Incidence&, const Incidence&) = default;
};

/// Flat incidence index: 2*edge + side.
inline Index incidence_index(Index edge, int side) { return 2 * edge + side; }

/// Simple undirected graph with opaque string vertex identifiers.
///
/// Vertex order is insertion order and defines the canonical indexing of every
/// cochain. Self-loops and duplicate edges are rejected on insertion.
class Graph {
 public:
  Graph() = default;
  Graph(std::vector<std::string> vertex_ids,
        const std::vector<std::pair<std::string, std::string>>& edges);

  /// Vertices named "0", "1", ..., "n-1".
  static Graph from_indices(Index n, const std::vector<std::pair<Index, Index>>& edges);

  Index add_vertex(std::string id);
  Index add_edge(Index a, Index b);
  Index add_edge(const std::string& a, const std::string& b);

  Index num_vertices() const { return static_cast<Index>(ids_.size()); }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }

  const std::vector<std::string>& vertex_ids() const { return ids_; }
  const std::string& vertex_id(Index v) const { return ids_.at(static_cast<std::size_t>(v)); }
  std::optional<Index> find_vertex(const std::string& id) const;

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(Index e) const { return edges_.at(static_cast<std::size_t>(e)); }
  Index endpoint(Index e, int side) const { return side == 0 ? edge(e).u : edge(e).v; }
  std::optional<Index> find_edge(Index a, Index b) const;

  /// Incidences touching vertex v, in edge order.
  const std::vector<Incidence>& incidences_of(Index v) const {
    return incident_.at(static_cast<std::size_t>(v));
  }
  Index degree(Index v) const { return static_cast<Index>(incidences_of(v).size()); }

  /// "u,v" with ids in stored order; used as the edge key in file formats.
  std::string edge_key(Index e) const;

  /// Connected-component label per vertex, labels numbered in order of first vertex.
  std::vector<Index> components() const;
  Index num_components() const;
  bool is_connected() const { return num_components() <= 1; }

  /// Re-checks every structural invariant; throws StructuralError.
  void validate() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.ids_ == b.ids_ && a.edges_ == b.edges_;
  }

 private:
  static std::uint64_t pair_key(Index a, Index b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
  }

  std::vector<std::string> ids_;
  std::unordered_map<std::string, Index> lookup_;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, Index> edge_lookup_;
  std::vector<std::vector<Incidence>> incident_;
};

/// Object of the incidence quiver: a graph vertex or a graph edge.
struct QuiverObject {
  enum class Kind { vertex, edge };
  Kind kind = Kind::vertex;
  Index index = 0;
};

/// Arrow a_{v,e}: source is a vertex object, target is an edge object.
/// Object numbering: vertices 0..n-1, then edges n..n+m-1.
struct Arrow {
  Index source = 0;
  Index target = 0;
  Incidence incidence;
};

struct IncidenceQuiver {
  std::vector<QuiverObject> objects;
  std::vector<Arrow> arrows;
  Index num_vertex_objects = 0;

  Index num_objects() const { return static_cast<Index>(objects.size()); }
  Index num_arrows() const { return static_cast<Index>(arrows.size()); }
};

/// Bipartite quiver with one arrow per incidence, ordered (edge, side).
IncidenceQuiver build_incidence_quiver(const Graph& graph);

/// Stalk dimensions for every vertex and edge, with precomputed offsets into
/// the stacked cochain vectors.
class DimensionVector {
 public:
  DimensionVector() = default;
  /// `min_dim` is 1 for user-facing sheaves; restricted (sub)sheaves use 0.
  DimensionVector(std::vector<Index> vertex_dims, std::vector<Index> edge_dims, Index min_dim = 1);

  static DimensionVector uniform(const Graph& graph, Index d_v, Index d_e);

  Index vertex(Index v) const { return vdims_.at(static_cast<std::size_t>(v)); }
  Index edge(Index e) const { return edims_.at(static_cast<std::size_t>(e)); }
  Index vertex_offset(Index v) const { return voff_.at(static_cast<std::size_t>(v)); }
  Index edge_offset(Index e) const { return eoff_.at(static_cast<std::size_t>(e)); }

  Index num_vertices() const { return static_cast<Index>(vdims_.size()); }
  Index num_edges() const { return static_cast<Index>(edims_.size()); }
  Index num_objects() const { return num_vertices() + num_edges(); }

  /// Dimension of object i in V ⊔ E order (vertices first).
  Index object(Index i) const { return i < num_vertices() ? vertex(i) : edge(i - num_vertices()); }

  Index total_vertex() const { return n0_; }  ///< N₀ = Σ d_v
  Index total_edge() const { return n1_; }    ///< N₁ = Σ d_e

  /// All d_i equal (vertices and edges alike).
  bool is_uniform() const;

  /// d as a real vector in object order.
  VectorXd as_vector() const;

  const std::vector<Index>& vertex_dims() const { return vdims_; }
  const std::vector<Index>& edge_dims() const { return edims_; }

  /// Checks the vector is shaped for `graph`; throws StructuralError.
  void check_matches(const Graph& graph) const;

  friend bool operator==(const DimensionVector& a, const DimensionVector& b) {
    return a.vdims_ == b.vdims_ && a.edims_ == b.edims_;
  }

 private:
  std::vector<Index> vdims_, edims_, voff_, eoff_;
  Index n0_ = 0, n1_ = 0;
};

}  // namespace sheafq
