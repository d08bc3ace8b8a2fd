#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "nldg/grid.hpp"

namespace nldg {

using cplx = std::complex<double>;

enum class NodeKind { kInteger, kHalf };

/// Two-component spinor (phi, chi) on a staggered grid. phi is indexed by the
/// grid's phi unknowns (vertex values stored once), chi by cells.
struct SpinorField {
  GridPtr grid;
  Eigen::VectorXcd phi;
  Eigen::VectorXcd chi;

  static SpinorField zeros(GridPtr grid);
  /// Samples phi(e, x) on integer nodes and chi(e, x) on half nodes. The
  /// vertex value of phi is taken from the first incident edge.
  static SpinorField sample(GridPtr grid, const std::function<cplx(EdgeId, double)>& phi,
                            const std::function<cplx(EdgeId, double)>& chi);

  /// Concatenated (phi, chi) in natural values.
  Eigen::VectorXcd stacked() const;
  static SpinorField from_stacked(GridPtr grid, const Eigen::VectorXcd& v);

  /// Concatenated (phi, chi) scaled by sqrt(weights): the Euclidean norm of
  /// this vector is the discrete L2 norm.
  Eigen::VectorXcd orthonormal() const;
  static SpinorField from_orthonormal(GridPtr grid, const Eigen::VectorXcd& v);

  SpinorField& operator+=(const SpinorField& o);
  SpinorField& operator*=(cplx a);
  friend SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
  friend SpinorField operator-(SpinorField a, const SpinorField& b);
  friend SpinorField operator*(cplx s, SpinorField a) { return a *= s; }

  bool all_finite() const;
};

/// Scalar field on one node family of a grid.
template <class Scalar>
struct ScalarField {
  GridPtr grid;
  NodeKind kind = NodeKind::kInteger;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;

  static ScalarField zeros(GridPtr grid, NodeKind kind) {
    ScalarField f{grid, kind, {}};
    f.values.setZero(kind == NodeKind::kInteger ? grid->phi_size() : grid->chi_size());
    return f;
  }
};

using RealField = ScalarField<double>;
using ComplexField = ScalarField<cplx>;

/// Trapezoid on integer nodes, midpoint on half nodes.
double l2_norm(const SpinorField& f);
double l2_norm(const RealField& f);
double l2_norm(const ComplexField& f);

/// Weighted inner product <f, g> (conjugate-linear in f).
cplx inner(const SpinorField& f, const SpinorField& g);

/// Pointwise C^2 density on every grid node: |phi_n|^2 plus the half-cell
/// weighted mean of the adjacent |chi_c|^2. Eliminated nodes have phi = 0.
Eigen::VectorXd node_density(const Grid& grid, const Eigen::VectorXcd& phi,
                             const Eigen::VectorXcd& chi);

/// Integral of |f|^p over the graph using node_density. p > 2.
double lp_power_integral(const SpinorField& f, double p);

struct VertexResidual {
  VertexId vertex;
  double continuity_max = 0.0;
  cplx kirchhoff_sum{0.0, 0.0};
};

/// Continuity gap (zero by shared storage) and signed chi-trace sum per vertex.
/// Traces use (3 chi_{1/2} - chi_{3/2}) / 2.
std::vector<VertexResidual> vertex_residuals(const SpinorField& f, const MetricGraph& graph);

/// Second-order extrapolated trace of chi at the given end of an edge.
cplx chi_trace(const SpinorField& f, EdgeId e, bool at_head);

/// 4-point Lagrange interpolation of samples located at x0 + k h. Points
/// within one spacing outside the sample range are extrapolated; anything
/// further out returns zero.
template <class Scalar>
Scalar cubic_interpolate(std::span<const Scalar> samples, double x0, double h, double x);

/// phi value at x_j of edge e (0 for eliminated nodes).
cplx phi_at(const SpinorField& f, EdgeId e, int j);

/// CSV snapshot: edge_id,node_kind,x,re_phi,im_phi,re_chi,im_chi. Integer rows
/// carry phi and nan for chi, half rows the reverse.
void write_field_csv(std::ostream& os, const SpinorField& f);

void require_same_grid(const GridPtr& a, const GridPtr& b);

}  // namespace nldg
