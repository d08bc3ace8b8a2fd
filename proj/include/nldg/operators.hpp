#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "nldg/fields.hpp"

namespace nldg {

struct PhysParams {
  double m = 1.0;  ///< mass
  double c = 1.0;  ///< speed of light
  double p = 4.0;  ///< nonlinearity power

  /// Throws ParameterError unless m > 0, c > 0, p > 2.
  void validate() const;
};

enum class OperatorKind {
  kDirac,           ///< -i c sigma_1 d/dx + m c^2 sigma_3, Kirchhoff-type vertices
  kMasslessDirac,   ///< -i c sigma_1 d/dx, same vertex conditions
  kLapKirchhoff,    ///< -u''/(2 mass_scale) on phi nodes, Kirchhoff vertices
  kLapDeltaPrime,   ///< -u''/(2 mass_scale) on chi nodes, homogeneous delta' vertices
  kBigLaplacian,    ///< Kirchhoff on the first component, delta' on the second
};

/// Which unknowns an operator acts on.
enum class Layout { kSpinor, kPhi, kChi };

/// Sparse self-adjoint operator on a staggered grid. The stored matrix acts on
/// weight-orthonormal coordinates (sqrt(w) * value), where self-adjointness in
/// the discrete L2 product is plain Hermitian symmetry. Upper and lower
/// triangles are written from the same computed value, so A == A^H exactly.
class HermitianOperator {
 public:
  using Matrix = Eigen::SparseMatrix<cplx>;

  HermitianOperator(OperatorKind kind, Layout layout, GridPtr grid, Matrix matrix);

  OperatorKind kind() const { return kind_; }
  Layout layout() const { return layout_; }
  const GridPtr& grid() const { return grid_; }
  const Matrix& matrix() const { return matrix_; }
  int dimension() const { return static_cast<int>(matrix_.rows()); }

  /// Apply in orthonormal coordinates.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const { return matrix_ * x; }
  /// Apply to a spinor (Layout::kSpinor only).
  SpinorField apply(const SpinorField& f) const;

  /// max |A_ij - conj(A_ji)|.
  double hermiticity_defect() const;

 private:
  OperatorKind kind_;
  Layout layout_;
  GridPtr grid_;
  Matrix matrix_;
};

HermitianOperator assemble_dirac(GridPtr grid, const PhysParams& params);
HermitianOperator assemble_massless_dirac(GridPtr grid, double c);
HermitianOperator assemble_kirchhoff_laplacian(GridPtr grid, double mass_scale);
HermitianOperator assemble_delta_prime_laplacian(GridPtr grid, double mass_scale);
/// Block-diagonal pair (Kirchhoff on phi, delta' on chi).
HermitianOperator assemble_big_laplacian(GridPtr grid, double mass_scale);

/// Factorization of A - z for repeated shifted solves. Each solve is checked
/// against ||(A - z) x - b|| <= rtol ||b||; a failing direct solve gets one
/// round of iterative refinement and then a BiCGSTAB fallback before a
/// SolverError is thrown.
class ShiftedSolver {
 public:
  ShiftedSolver(const HermitianOperator& A, cplx z, double rtol = 1e-10);
  ShiftedSolver(const HermitianOperator::Matrix& A, cplx z, double rtol = 1e-10);

  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;
  cplx shift() const { return z_; }

 private:
  void factorize();

  HermitianOperator::Matrix shifted_;
  cplx z_;
  double rtol_;
  std::unique_ptr<Eigen::SparseLU<HermitianOperator::Matrix>> lu_;
  bool lu_ok_ = false;
};

/// x with (A - z) x = b in orthonormal coordinates.
Eigen::VectorXcd shifted_solve(const HermitianOperator& A, cplx z, const Eigen::VectorXcd& b,
                               double rtol = 1e-10);
SpinorField shifted_solve(const HermitianOperator& A, cplx z, const SpinorField& b,
                          double rtol = 1e-10);

enum class EigTarget {
  kSmallestMagnitude,  ///< the `count` eigenvalues closest to `shift`
  kGapEdges,           ///< largest negative and smallest positive eigenvalue
};

/// Shift-invert Lanczos. Results sorted ascending.
std::vector<double> extremal_eigs(const HermitianOperator& A, int count, EigTarget which,
                                  double shift = 0.0, double rtol = 1e-8);

/// Coordinate list "row col re im", one nonzero per line, orthonormal basis.
void write_coo(std::ostream& os, const HermitianOperator& A);

}  // namespace nldg
