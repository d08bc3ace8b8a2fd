#include "nldg/graph.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "nldg/errors.hpp"

namespace nldg {

int Edge::orientation_sign_at(VertexId v) const {
  if (v == head) return +1;
  if (bounded() && v == tail) return -1;
  throw LookupError("vertex " + std::to_string(v.value) + " is not an endpoint of edge " +
                    std::to_string(id.value));
}

MetricGraph::MetricGraph(int vertex_count, std::vector<Edge> edges) : edges_(std::move(edges)) {
  if (vertex_count < 1) throw TopologyError("graph needs at least one finite vertex");
  if (edges_.empty()) throw TopologyError("graph needs at least one edge");
  vertices_.resize(static_cast<std::size_t>(vertex_count));
  for (int v = 0; v < vertex_count; ++v) vertices_[static_cast<std::size_t>(v)].id = VertexId{v};

  auto check_vertex = [&](VertexId v, int e) {
    if (v.value < 0 || v.value >= vertex_count)
      throw TopologyError("edge " + std::to_string(e) + " references unknown vertex " +
                          std::to_string(v.value));
  };

  for (std::size_t i = 0; i < edges_.size(); ++i) {
    Edge& e = edges_[i];
    if (e.id.value != static_cast<int>(i))
      throw TopologyError("edge ids must be 0..E-1 in order");
    check_vertex(e.head, e.id.value);
    if (e.bounded()) {
      if (!(e.length > 0.0) || !std::isfinite(e.length))
        throw TopologyError("bounded edge length must be positive");
      check_vertex(e.tail, e.id.value);
      if (e.tail == e.head) throw TopologyError("self-loops are not supported");
      compact_core_.push_back(e.id);
    } else if (e.tail != kVertexAtInfinity) {
      throw TopologyError("unbounded edge must end at the vertex at infinity");
    }
    vertices_[static_cast<std::size_t>(e.head.value)].incidences.push_back({e.id, +1});
    if (e.bounded())
      vertices_[static_cast<std::size_t>(e.tail.value)].incidences.push_back({e.id, -1});
  }

  // Connectivity over finite vertices via union-find.
  std::vector<int> parent(static_cast<std::size_t>(vertex_count));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x)
      x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  for (const Edge& e : edges_)
    if (e.bounded()) parent[static_cast<std::size_t>(find(e.head.value))] = find(e.tail.value);
  for (int v = 0; v < vertex_count; ++v) {
    if (find(v) != find(0)) throw TopologyError("graph is not connected");
    if (vertices_[static_cast<std::size_t>(v)].incidences.empty())
      throw TopologyError("isolated vertex " + std::to_string(v));
  }
}

const Edge& MetricGraph::edge(EdgeId e) const {
  if (e.value < 0 || e.value >= edge_count())
    throw LookupError("unknown edge " + std::to_string(e.value));
  return edges_[static_cast<std::size_t>(e.value)];
}

const Vertex& MetricGraph::vertex(VertexId v) const {
  if (v.value < 0 || v.value >= vertex_count())
    throw LookupError("unknown vertex " + std::to_string(v.value));
  return vertices_[static_cast<std::size_t>(v.value)];
}

bool MetricGraph::is_star() const {
  if (vertex_count() != 1 || edge_count() < 2) return false;
  for (const Edge& e : edges_)
    if (e.bounded()) return false;
  return true;
}

MetricGraph make_star(const StarSpec& spec) {
  if (spec.N < 2) throw TopologyError("a star graph needs N >= 2 half-lines");
  if (!(spec.truncation_length > 0.0)) throw ParameterError("truncation_length must be positive");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(spec.N));
  for (int e = 0; e < spec.N; ++e) edges.push_back(Edge{EdgeId{e}, kUnbounded, VertexId{0}});
  return MetricGraph(1, std::move(edges));
}

MetricGraph make_half_line() {
  return MetricGraph(1, {Edge{EdgeId{0}, kUnbounded, VertexId{0}}});
}

MetricGraph make_interval(double length) {
  return MetricGraph(2, {Edge{EdgeId{0}, length, VertexId{0}, VertexId{1}}});
}

std::vector<Incidence> incidence_signs(const MetricGraph& graph, VertexId v) {
  if (v == kVertexAtInfinity) return {};
  return graph.vertex(v).incidences;
}

}  // namespace nldg
