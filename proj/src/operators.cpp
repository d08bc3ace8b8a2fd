#include "nldg/operators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/IterativeLinearSolvers>

#include "nldg/csv.hpp"
#include "nldg/errors.hpp"
#include "nldg/lanczos.hpp"

namespace nldg {

namespace {

using Triplets = std::vector<Eigen::Triplet<cplx>>;

/// Adds value at (i, j) and its conjugate at (j, i).
void add_pair(Triplets& t, int i, int j, cplx value) {
  t.emplace_back(i, j, value);
  t.emplace_back(j, i, std::conj(value));
}

HermitianOperator::Matrix build(int n, const Triplets& t) {
  HermitianOperator::Matrix M(n, n);
  M.setFromTriplets(t.begin(), t.end());
  M.makeCompressed();
  return M;
}

/// Entries of B^T B (phi) or B B^T (chi) for the orthonormal gradient B,
/// scaled by `scale`, with a row offset for block placement.
Triplets laplacian_triplets(const Grid& grid, bool on_chi, double scale, int offset) {
  const Eigen::SparseMatrix<double>& B = grid.gradient();
  Eigen::SparseMatrix<double> L =
      on_chi ? Eigen::SparseMatrix<double>(B * B.transpose())
             : Eigen::SparseMatrix<double>(B.transpose() * B);
  Triplets t;
  for (int k = 0; k < L.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it) {
      // Mirror the lower triangle so that the stored matrix is exactly symmetric.
      if (it.row() < it.col()) continue;
      const double v = scale * it.value();
      if (it.row() == it.col())
        t.emplace_back(offset + static_cast<int>(it.row()), offset + static_cast<int>(it.col()), v);
      else
        add_pair(t, offset + static_cast<int>(it.row()), offset + static_cast<int>(it.col()), v);
    }
  return t;
}

HermitianOperator dirac_like(GridPtr grid, double m, double c, OperatorKind kind) {
  const int nphi = grid->phi_size();
  const int n = grid->size();
  Triplets t;
  const double rest = m * c * c;
  if (rest != 0.0) {
    for (int i = 0; i < nphi; ++i) t.emplace_back(i, i, rest);
    for (int i = nphi; i < n; ++i) t.emplace_back(i, i, -rest);
  }
  // chi rows: -i c (phi_far - phi_near)/h; phi rows get the adjoint.
  const Eigen::SparseMatrix<double>& B = grid->gradient();
  for (int k = 0; k < B.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(B, k); it; ++it)
      add_pair(t, nphi + static_cast<int>(it.row()), static_cast<int>(it.col()),
               cplx(0.0, -c * it.value()));
  return HermitianOperator(kind, Layout::kSpinor, grid, build(n, t));
}

}  // namespace

void PhysParams::validate() const {
  if (!(m > 0.0)) throw ParameterError("mass m must be positive");
  if (!(c > 0.0)) throw ParameterError("c must be positive");
  if (!(p > 2.0)) throw ParameterError("nonlinearity power p must exceed 2");
}

HermitianOperator::HermitianOperator(OperatorKind kind, Layout layout, GridPtr grid, Matrix matrix)
    : kind_(kind), layout_(layout), grid_(std::move(grid)), matrix_(std::move(matrix)) {
  const int expected = layout_ == Layout::kSpinor ? grid_->size()
                       : layout_ == Layout::kPhi  ? grid_->phi_size()
                                                  : grid_->chi_size();
  if (matrix_.rows() != expected || matrix_.cols() != expected)
    throw DimensionError("operator matrix does not match grid layout");
}

SpinorField HermitianOperator::apply(const SpinorField& f) const {
  if (layout_ != Layout::kSpinor) throw DimensionError("operator does not act on spinors");
  require_same_grid(grid_, f.grid);
  return SpinorField::from_orthonormal(grid_, matrix_ * f.orthonormal());
}

double HermitianOperator::hermiticity_defect() const {
  const Matrix adj = matrix_.adjoint();
  const Matrix diff = matrix_ - adj;
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Matrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

HermitianOperator assemble_dirac(GridPtr grid, const PhysParams& params) {
  if (!(params.m > 0.0) || !(params.c > 0.0)) throw ParameterError("Dirac operator needs m, c > 0");
  return dirac_like(std::move(grid), params.m, params.c, OperatorKind::kDirac);
}

HermitianOperator assemble_massless_dirac(GridPtr grid, double c) {
  if (!(c > 0.0)) throw ParameterError("c must be positive");
  return dirac_like(std::move(grid), 0.0, c, OperatorKind::kMasslessDirac);
}

HermitianOperator assemble_kirchhoff_laplacian(GridPtr grid, double mass_scale) {
  if (!(mass_scale > 0.0)) throw ParameterError("mass_scale must be positive");
  const Triplets t = laplacian_triplets(*grid, false, 0.5 / mass_scale, 0);
  const int n = grid->phi_size();
  return HermitianOperator(OperatorKind::kLapKirchhoff, Layout::kPhi, grid, build(n, t));
}

HermitianOperator assemble_delta_prime_laplacian(GridPtr grid, double mass_scale) {
  if (!(mass_scale > 0.0)) throw ParameterError("mass_scale must be positive");
  const Triplets t = laplacian_triplets(*grid, true, 0.5 / mass_scale, 0);
  const int n = grid->chi_size();
  return HermitianOperator(OperatorKind::kLapDeltaPrime, Layout::kChi, grid, build(n, t));
}

HermitianOperator assemble_big_laplacian(GridPtr grid, double mass_scale) {
  if (!(mass_scale > 0.0)) throw ParameterError("mass_scale must be positive");
  Triplets t = laplacian_triplets(*grid, false, 0.5 / mass_scale, 0);
  const Triplets tc = laplacian_triplets(*grid, true, 0.5 / mass_scale, grid->phi_size());
  t.insert(t.end(), tc.begin(), tc.end());
  return HermitianOperator(OperatorKind::kBigLaplacian, Layout::kSpinor, grid,
                           build(grid->size(), t));
}

ShiftedSolver::ShiftedSolver(const HermitianOperator& A, cplx z, double rtol)
    : ShiftedSolver(A.matrix(), z, rtol) {}

ShiftedSolver::ShiftedSolver(const HermitianOperator::Matrix& A, cplx z, double rtol)
    : z_(z), rtol_(rtol) {
  HermitianOperator::Matrix I(A.rows(), A.cols());
  I.setIdentity();
  shifted_ = A - z * I;
  shifted_.makeCompressed();
  factorize();
}

void ShiftedSolver::factorize() {
  lu_ = std::make_unique<Eigen::SparseLU<HermitianOperator::Matrix>>();
  lu_->analyzePattern(shifted_);
  lu_->factorize(shifted_);
  lu_ok_ = lu_->info() == Eigen::Success;
}

Eigen::VectorXcd ShiftedSolver::solve(const Eigen::VectorXcd& b) const {
  if (b.size() != shifted_.rows()) throw DimensionError("right-hand side size mismatch");
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Eigen::VectorXcd::Zero(b.size());
  double res = INFINITY;
  if (lu_ok_) {
    Eigen::VectorXcd x = lu_->solve(b);
    Eigen::VectorXcd r = b - shifted_ * x;
    res = r.norm();
    if (res <= rtol_ * bnorm && x.allFinite()) return x;
    x += lu_->solve(r);
    res = (b - shifted_ * x).norm();
    if (res <= rtol_ * bnorm && x.allFinite()) return x;
  }
  Eigen::BiCGSTAB<HermitianOperator::Matrix, Eigen::IncompleteLUT<cplx>> it;
  it.setTolerance(0.1 * rtol_);
  it.setMaxIterations(20 * static_cast<int>(b.size()));
  it.compute(shifted_);
  if (it.info() == Eigen::Success) {
    Eigen::VectorXcd x = it.solve(b);
    const double r = (b - shifted_ * x).norm();
    if (r <= rtol_ * bnorm && x.allFinite()) return x;
    res = std::min(res, r);
  }
  throw SolverError("shifted solve missed its residual contract", res / bnorm);
}

Eigen::VectorXcd shifted_solve(const HermitianOperator& A, cplx z, const Eigen::VectorXcd& b,
                               double rtol) {
  return ShiftedSolver(A, z, rtol).solve(b);
}

SpinorField shifted_solve(const HermitianOperator& A, cplx z, const SpinorField& b, double rtol) {
  if (A.layout() != Layout::kSpinor) throw DimensionError("operator does not act on spinors");
  require_same_grid(A.grid(), b.grid);
  return SpinorField::from_orthonormal(A.grid(), shifted_solve(A, z, b.orthonormal(), rtol));
}

std::vector<double> extremal_eigs(const HermitianOperator& A, int count, EigTarget which,
                                  double shift, double rtol) {
  if (count < 1) throw ParameterError("count must be positive");
  const int n = A.dimension();
  ShiftedSolver solver(A, cplx(shift, 0.0));
  const HermitianMap inverse = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    y = solver.solve(x);
  };
  auto nearest = [&](int k) {
    const LanczosResult r = lanczos_largest(inverse, n, std::min(k, n), rtol, std::min(n, 600));
    std::vector<double> eig;
    for (double mu : r.values) eig.push_back(shift + 1.0 / mu);
    std::sort(eig.begin(), eig.end());
    return eig;
  };
  if (which == EigTarget::kSmallestMagnitude) return nearest(count);

  // Both sides of the shift must show up among the nearest eigenvalues; the
  // spectrum near a gap edge can be tightly clustered, so widen as needed.
  for (int k = std::max(count, 8);; k *= 2) {
    const std::vector<double> eig = nearest(k);
    double neg = -INFINITY, pos = INFINITY;
    for (double e : eig) {
      if (e < shift) neg = std::max(neg, e);
      else pos = std::min(pos, e);
    }
    if ((std::isfinite(neg) && std::isfinite(pos)) || k >= n || k >= 256) {
      std::vector<double> edges;
      if (std::isfinite(neg)) edges.push_back(neg);
      if (std::isfinite(pos)) edges.push_back(pos);
      return edges;
    }
  }
}

void write_coo(std::ostream& os, const HermitianOperator& A) {
  const auto& M = A.matrix();
  for (int k = 0; k < M.outerSize(); ++k)
    for (HermitianOperator::Matrix::InnerIterator it(M, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << csv::num(it.value().real()) << ' '
         << csv::num(it.value().imag()) << '\n';
}

}  // namespace nldg
