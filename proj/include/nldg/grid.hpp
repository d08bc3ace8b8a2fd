#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "nldg/graph.hpp"

namespace nldg {

/// Closure of a truncated half-line at x = L.
enum class FarEnd {
  kHardWall,   ///< chi(L) = 0; the far phi node is a free unknown.
  kDirichlet,  ///< phi(L) = 0; the far phi node is eliminated.
};

struct GridSpec {
  double h = 0.05;                  ///< target spacing; each edge rounds to an integer cell count
  double truncation_length = 30.0;  ///< numerical cutoff of every unbounded edge
  FarEnd far_end = FarEnd::kHardWall;
};

/// Staggered discretization of a metric graph: phi lives on integer nodes
/// x_j = j h, chi on half nodes x_{j+1/2} = (j + 1/2) h. Every finite vertex
/// owns one shared phi node, which makes phi continuous by construction.
class Grid {
 public:
  struct Node {
    int dof = -1;        ///< phi unknown, or -1 for an eliminated Dirichlet node
    double weight = 0;   ///< trapezoid weight: sum of adjacent half cells
  };

  struct Cell {
    EdgeId edge;
    int j = 0;           ///< cell index on its edge; midpoint at (j + 1/2) h
    int near = 0;        ///< node at x_j
    int far = 0;         ///< node at x_{j+1}
    double h = 0;
  };

  struct EdgeLayout {
    int cells = 0;
    double h = 0;
    double length = 0;           ///< truncated length for unbounded edges
    std::vector<int> nodes;      ///< node index of x_j, j = 0..cells
    int first_cell = 0;          ///< index of cell 0 in cells()
  };

  Grid(std::shared_ptr<const MetricGraph> graph, const GridSpec& spec);

  const MetricGraph& graph() const { return *graph_; }
  std::shared_ptr<const MetricGraph> graph_ptr() const { return graph_; }
  const GridSpec& spec() const { return spec_; }

  int phi_size() const { return n_phi_; }
  int chi_size() const { return static_cast<int>(cells_.size()); }
  int size() const { return phi_size() + chi_size(); }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const EdgeLayout& edge(EdgeId e) const;

  /// phi unknown at x_j of edge e, or -1 for an eliminated node.
  int phi_index(EdgeId e, int j) const;
  /// chi unknown of cell j (midpoint (j + 1/2) h) on edge e.
  int chi_index(EdgeId e, int j) const;
  /// The shared phi unknown of a finite vertex.
  int vertex_dof(VertexId v) const;

  /// Quadrature weights of phi unknowns (trapezoid) and chi unknowns (midpoint).
  const Eigen::VectorXd& phi_weights() const { return phi_weight_; }
  const Eigen::VectorXd& chi_weights() const { return chi_weight_; }

  /// Forward difference (phi_far - phi_near) / h from phi unknowns to cells,
  /// expressed in the weight-orthonormal basis: W_chi^{1/2} G W_phi^{-1/2}.
  const Eigen::SparseMatrix<double>& gradient() const { return gradient_; }

  /// Same difference without weights; rows are cells, columns phi unknowns.
  const Eigen::SparseMatrix<double>& plain_gradient() const { return plain_gradient_; }

  /// Same node and cell layout, so fields from either grid are interchangeable.
  bool structurally_equal(const Grid& other) const;

 private:
  std::shared_ptr<const MetricGraph> graph_;
  GridSpec spec_;
  std::vector<Node> nodes_;
  std::vector<Cell> cells_;
  std::vector<EdgeLayout> edges_;
  std::vector<int> vertex_node_;
  int n_phi_ = 0;
  Eigen::VectorXd phi_weight_;
  Eigen::VectorXd chi_weight_;
  Eigen::SparseMatrix<double> gradient_;
  Eigen::SparseMatrix<double> plain_gradient_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Convenience: grid on a star with uniform spacing.
GridPtr make_star_grid(const StarSpec& star, double h, FarEnd far_end = FarEnd::kHardWall);

}  // namespace nldg
