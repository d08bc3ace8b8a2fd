#include "nldg/grid.hpp"

#include <cmath>
#include <string>

#include "nldg/errors.hpp"

namespace nldg {

Grid::Grid(std::shared_ptr<const MetricGraph> graph, const GridSpec& spec)
    : graph_(std::move(graph)), spec_(spec) {
  if (!graph_) throw ParameterError("grid needs a graph");
  if (!(spec_.h > 0.0)) throw ParameterError("grid spacing must be positive");
  if (!(spec_.truncation_length > 0.0)) throw ParameterError("truncation length must be positive");

  // Vertex nodes first so that vertex dofs are 0..V-1.
  vertex_node_.resize(static_cast<std::size_t>(graph_->vertex_count()));
  for (int v = 0; v < graph_->vertex_count(); ++v) {
    vertex_node_[static_cast<std::size_t>(v)] = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{n_phi_++, 0.0});
  }

  edges_.resize(static_cast<std::size_t>(graph_->edge_count()));
  for (const Edge& e : graph_->edges()) {
    EdgeLayout& lay = edges_[static_cast<std::size_t>(e.id.value)];
    lay.length = e.bounded() ? e.length : spec_.truncation_length;
    lay.cells = static_cast<int>(std::lround(lay.length / spec_.h));
    if (lay.cells < 4)
      throw ParameterError("edge " + std::to_string(e.id.value) + " needs at least 4 cells");
    lay.h = lay.length / lay.cells;
    lay.nodes.resize(static_cast<std::size_t>(lay.cells) + 1);
    lay.nodes[0] = vertex_node_[static_cast<std::size_t>(e.head.value)];
    for (int j = 1; j < lay.cells; ++j) {
      lay.nodes[static_cast<std::size_t>(j)] = static_cast<int>(nodes_.size());
      nodes_.push_back(Node{n_phi_++, 0.0});
    }
    if (e.bounded()) {
      lay.nodes.back() = vertex_node_[static_cast<std::size_t>(e.tail.value)];
    } else {
      lay.nodes.back() = static_cast<int>(nodes_.size());
      const bool eliminated = spec_.far_end == FarEnd::kDirichlet;
      nodes_.push_back(Node{eliminated ? -1 : n_phi_++, 0.0});
    }
    lay.first_cell = static_cast<int>(cells_.size());
    for (int j = 0; j < lay.cells; ++j) {
      Cell c{e.id, j, lay.nodes[static_cast<std::size_t>(j)],
             lay.nodes[static_cast<std::size_t>(j) + 1], lay.h};
      nodes_[static_cast<std::size_t>(c.near)].weight += 0.5 * lay.h;
      nodes_[static_cast<std::size_t>(c.far)].weight += 0.5 * lay.h;
      cells_.push_back(c);
    }
  }

  phi_weight_.resize(n_phi_);
  for (const Node& n : nodes_)
    if (n.dof >= 0) phi_weight_[n.dof] = n.weight;
  chi_weight_.resize(chi_size());
  for (int c = 0; c < chi_size(); ++c) chi_weight_[c] = cells_[static_cast<std::size_t>(c)].h;

  std::vector<Eigen::Triplet<double>> ortho;
  std::vector<Eigen::Triplet<double>> plain;
  for (int c = 0; c < chi_size(); ++c) {
    const Cell& cell = cells_[static_cast<std::size_t>(c)];
    const Node& a = nodes_[static_cast<std::size_t>(cell.near)];
    const Node& b = nodes_[static_cast<std::size_t>(cell.far)];
    if (a.dof >= 0) {
      ortho.emplace_back(c, a.dof, -1.0 / std::sqrt(cell.h * a.weight));
      plain.emplace_back(c, a.dof, -1.0 / cell.h);
    }
    if (b.dof >= 0) {
      ortho.emplace_back(c, b.dof, 1.0 / std::sqrt(cell.h * b.weight));
      plain.emplace_back(c, b.dof, 1.0 / cell.h);
    }
  }
  gradient_.resize(chi_size(), n_phi_);
  gradient_.setFromTriplets(ortho.begin(), ortho.end());
  plain_gradient_.resize(chi_size(), n_phi_);
  plain_gradient_.setFromTriplets(plain.begin(), plain.end());
}

const Grid::EdgeLayout& Grid::edge(EdgeId e) const {
  if (e.value < 0 || e.value >= static_cast<int>(edges_.size()))
    throw LookupError("unknown edge " + std::to_string(e.value));
  return edges_[static_cast<std::size_t>(e.value)];
}

int Grid::phi_index(EdgeId e, int j) const {
  const EdgeLayout& lay = edge(e);
  if (j < 0 || j > lay.cells) throw LookupError("node index out of range");
  return nodes_[static_cast<std::size_t>(lay.nodes[static_cast<std::size_t>(j)])].dof;
}

int Grid::chi_index(EdgeId e, int j) const {
  const EdgeLayout& lay = edge(e);
  if (j < 0 || j >= lay.cells) throw LookupError("cell index out of range");
  return lay.first_cell + j;
}

int Grid::vertex_dof(VertexId v) const {
  if (v.value < 0 || v.value >= static_cast<int>(vertex_node_.size()))
    throw LookupError("unknown vertex " + std::to_string(v.value));
  return nodes_[static_cast<std::size_t>(vertex_node_[static_cast<std::size_t>(v.value)])].dof;
}

bool Grid::structurally_equal(const Grid& other) const {
  if (this == &other) return true;
  if (n_phi_ != other.n_phi_ || cells_.size() != other.cells_.size()) return false;
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const Cell& a = cells_[c];
    const Cell& b = other.cells_[c];
    if (a.near != b.near || a.far != b.far || a.h != b.h || a.edge != b.edge) return false;
  }
  return true;
}

GridPtr make_star_grid(const StarSpec& star, double h, FarEnd far_end) {
  auto graph = std::make_shared<const MetricGraph>(make_star(star));
  return std::make_shared<const Grid>(graph, GridSpec{h, star.truncation_length, far_end});
}

}  // namespace nldg
