#pragma once

#include <compare>
#include <limits>
#include <optional>
#include <vector>

namespace nldg {

struct VertexId {
  int value = 0;
  auto operator<=>(const VertexId&) const = default;
};

struct EdgeId {
  int value = 0;
  auto operator<=>(const EdgeId&) const = default;
};

/// Stand-in id for the endpoint at infinity of an unbounded edge. No vertex
/// conditions are ever imposed there.
inline constexpr VertexId kVertexAtInfinity{-1};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// A bounded edge is parametrized by [0, length] from head to tail; an
/// unbounded edge is [0, +inf) with x = 0 at its head.
struct Edge {
  EdgeId id;
  double length = kUnbounded;
  VertexId head;
  VertexId tail = kVertexAtInfinity;

  bool bounded() const { return length != kUnbounded; }

  /// +1 if the trace at `v` is chi(0), -1 if it is -chi(length).
  int orientation_sign_at(VertexId v) const;
};

struct Incidence {
  EdgeId edge;
  int sign = +1;
  bool operator==(const Incidence&) const = default;
};

struct Vertex {
  VertexId id;
  std::vector<Incidence> incidences;
};

struct StarSpec {
  int N = 3;
  double truncation_length = 30.0;
};

/// Immutable metric graph. Vertices at infinity are implicit.
class MetricGraph {
 public:
  /// Validates connectivity and incidence references.
  MetricGraph(int vertex_count, std::vector<Edge> edges);

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const Edge& edge(EdgeId e) const;
  const Vertex& vertex(VertexId v) const;

  /// Bounded edges, i.e. the compact core.
  const std::vector<EdgeId>& compact_core() const { return compact_core_; }

  int edge_count() const { return static_cast<int>(edges_.size()); }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }

  /// True for one finite vertex with only unbounded edges attached (N >= 2).
  bool is_star() const;

 private:
  std::vector<Edge> edges_;
  std::vector<Vertex> vertices_;
  std::vector<EdgeId> compact_core_;
};

/// N half-lines glued at a single vertex. Throws TopologyError if N < 2.
MetricGraph make_star(const StarSpec& spec);

/// One half-line attached to a single vertex (degree-one vertex).
MetricGraph make_half_line();

/// A single bounded edge [0, length] between two vertices.
MetricGraph make_interval(double length);

/// Signed incidences at `v`; empty for the vertex at infinity.
std::vector<Incidence> incidence_signs(const MetricGraph& graph, VertexId v);

}  // namespace nldg
