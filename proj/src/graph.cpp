#include "sheafq/graph.hpp"

#include <algorithm>
#include <numeric>

namespace sheafq {

Graph::Graph(std::vector<std::string> vertex_ids,
             const std::vector<std::pair<std::string, std::string>>& edges) {
  for (auto& id : vertex_ids) add_vertex(std::move(id));
  for (const auto& [a, b] : edges) add_edge(a, b);
}

Graph Graph::from_indices(Index n, const std::vector<std::pair<Index, Index>>& edges) {
  Graph g;
  for (Index i = 0; i < n; ++i) g.add_vertex(std::to_string(i));
  for (const auto& [a, b] : edges) g.add_edge(a, b);
  return g;
}

Index Graph::add_vertex(std::string id) {
  if (lookup_.count(id)) throw StructuralError("duplicate vertex id '" + id + "'");
  const Index idx = num_vertices();
  lookup_.emplace(id, idx);
  ids_.push_back(std::move(id));
  incident_.emplace_back();
  return idx;
}

Index Graph::add_edge(Index a, Index b) {
  if (a < 0 || b < 0 || a >= num_vertices() || b >= num_vertices())
    throw StructuralError("edge endpoint out of range");
  if (a == b) throw StructuralError("self-loop at vertex '" + vertex_id(a) + "'");
  const Index u = std::min(a, b), v = std::max(a, b);
  if (edge_lookup_.count(pair_key(u, v)))
    throw StructuralError("duplicate edge {" + vertex_id(u) + ", " + vertex_id(v) + "}");
  const Index e = num_edges();
  edges_.push_back({u, v});
  edge_lookup_.emplace(pair_key(u, v), e);
  incident_[static_cast<std::size_t>(u)].push_back({e, 0});
  incident_[static_cast<std::size_t>(v)].push_back({e, 1});
  return e;
}

Index Graph::add_edge(const std::string& a, const std::string& b) {
  const auto ia = find_vertex(a), ib = find_vertex(b);
  if (!ia) throw StructuralError("edge endpoint '" + a + "' is not a declared vertex");
  if (!ib) throw StructuralError("edge endpoint '" + b + "' is not a declared vertex");
  return add_edge(*ia, *ib);
}

std::optional<Index> Graph::find_vertex(const std::string& id) const {
  const auto it = lookup_.find(id);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<Index> Graph::find_edge(Index a, Index b) const {
  const auto it = edge_lookup_.find(pair_key(std::min(a, b), std::max(a, b)));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::string Graph::edge_key(Index e) const {
  const Edge& ed = edge(e);
  return vertex_id(ed.u) + "," + vertex_id(ed.v);
}

std::vector<Index> Graph::components() const {
  std::vector<Index> label(ids_.size(), -1);
  Index next = 0;
  std::vector<Index> stack;
  for (Index s = 0; s < num_vertices(); ++s) {
    if (label[static_cast<std::size_t>(s)] >= 0) continue;
    label[static_cast<std::size_t>(s)] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index x = stack.back();
      stack.pop_back();
      for (const Incidence& inc : incidences_of(x)) {
        const Index y = endpoint(inc.edge, 1 - inc.side);
        if (label[static_cast<std::size_t>(y)] < 0) {
          label[static_cast<std::size_t>(y)] = next;
          stack.push_back(y);
        }
      }
    }
    ++next;
  }
  return label;
}

Index Graph::num_components() const {
  const auto label = components();
  return label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
}

void Graph::validate() const {
  std::unordered_map<std::uint64_t, Index> seen;
  for (Index e = 0; e < num_edges(); ++e) {
    const Edge& ed = edge(e);
    if (ed.u < 0 || ed.v >= num_vertices()) throw StructuralError("edge endpoint out of range");
    if (ed.u == ed.v) throw StructuralError("self-loop in edge list");
    if (ed.u > ed.v) throw StructuralError("edge endpoints not in canonical order");
    if (!seen.emplace(pair_key(ed.u, ed.v), e).second) throw StructuralError("duplicate edge");
  }
}

IncidenceQuiver build_incidence_quiver(const Graph& graph) {
  graph.validate();
  IncidenceQuiver q;
  q.num_vertex_objects = graph.num_vertices();
  q.objects.reserve(static_cast<std::size_t>(graph.num_vertices() + graph.num_edges()));
  for (Index v = 0; v < graph.num_vertices(); ++v)
    q.objects.push_back({QuiverObject::Kind::vertex, v});
  for (Index e = 0; e < graph.num_edges(); ++e) q.objects.push_back({QuiverObject::Kind::edge, e});
  q.arrows.reserve(static_cast<std::size_t>(2 * graph.num_edges()));
  for (Index e = 0; e < graph.num_edges(); ++e) {
    for (int side = 0; side < 2; ++side) {
      q.arrows.push_back({graph.endpoint(e, side), graph.num_vertices() + e, {e, side}});
    }
  }
  return q;
}

DimensionVector::DimensionVector(std::vector<Index> vertex_dims, std::vector<Index> edge_dims,
                                 Index min_dim)
    : vdims_(std::move(vertex_dims)), edims_(std::move(edge_dims)) {
  for (Index d : vdims_)
    if (d < min_dim) throw StructuralError("vertex stalk dimension below minimum");
  for (Index d : edims_)
    if (d < min_dim) throw StructuralError("edge stalk dimension below minimum");
  voff_.resize(vdims_.size());
  eoff_.resize(edims_.size());
  for (std::size_t i = 0; i < vdims_.size(); ++i) {
    voff_[i] = n0_;
    n0_ += vdims_[i];
  }
  for (std::size_t i = 0; i < edims_.size(); ++i) {
    eoff_[i] = n1_;
    n1_ += edims_[i];
  }
}

DimensionVector DimensionVector::uniform(const Graph& graph, Index d_v, Index d_e) {
  return DimensionVector(std::vector<Index>(static_cast<std::size_t>(graph.num_vertices()), d_v),
                         std::vector<Index>(static_cast<std::size_t>(graph.num_edges()), d_e));
}

bool DimensionVector::is_uniform() const {
  const Index first = !vdims_.empty() ? vdims_.front() : (!edims_.empty() ? edims_.front() : 0);
  return std::all_of(vdims_.begin(), vdims_.end(), [&](Index d) { return d == first; }) &&
         std::all_of(edims_.begin(), edims_.end(), [&](Index d) { return d == first; });
}

VectorXd DimensionVector::as_vector() const {
  VectorXd d(num_objects());
  for (Index i = 0; i < num_objects(); ++i) d(i) = static_cast<double>(object(i));
  return d;
}

void DimensionVector::check_matches(const Graph& graph) const {
  if (num_vertices() != graph.num_vertices() || num_edges() != graph.num_edges())
    throw StructuralError("dimension vector does not match graph (" +
                          std::to_string(num_vertices()) + " vertex / " +
                          std::to_string(num_edges()) + " edge entries for a graph with " +
                          std::to_string(graph.num_vertices()) + " / " +
                          std::to_string(graph.num_edges()) + ")");
}

}  // namespace sheafq
