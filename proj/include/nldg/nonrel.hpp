#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "nldg/operators.hpp"

namespace nldg {

/// Renormalization D_c - s m c^2 with s = +1 (rest energy removed, Kirchhoff
/// limit on the first component) or s = -1 (delta' limit on the second).
enum class RestSign : int { kMinus = +1, kPlus = -1 };

/// Both sides of the resolvent factorization
///   (D_c -+ mc^2 - k)^{-1} = (P^{+-} +- Gamma) (I -+ Lambda k^2/2mc^2)^{-1} Lambda
/// with Gamma = (massless D_c + k) / 2mc^2. For the upper sign
/// Lambda = (-Delta/2m - k)^{-1}; for the lower sign the Laplacian enters with
/// the opposite sign, Lambda = (Delta/2m - k)^{-1}, which is what the algebra
/// (D + mc^2 - k)(D - mc^2 + k) = -c^2 Delta + 2mc^2 k - k^2 gives.
/// Returns the largest relative L2 discrepancy over `samples` random vectors.
double resdecomp_check(GridPtr grid, const PhysParams& params, cplx k, RestSign sign,
                       int samples = 4, std::uint64_t seed = 1);

/// Difference between the renormalized Dirac resolvent and its limit,
///   kMinus: (D_c - mc^2 - k)^{-1} - P^+ (-Delta_K/2m - k)^{-1}
///   kPlus:  (D_c + mc^2 - k)^{-1} - P^- (Delta_delta'/2m - k)^{-1}
/// applied to x in orthonormal coordinates.
class NonrelDifference {
 public:
  NonrelDifference(GridPtr grid, const PhysParams& params, cplx k, RestSign sign);
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd& x) const;
  int dimension() const { return n_; }
  /// Largest singular value via Lanczos on the normal operator.
  double operator_norm(double rtol = 1e-8) const;

 private:
  int n_, np_;
  double sign_ = 1.0;
  std::unique_ptr<ShiftedSolver> dirac_, dirac_adj_, limit_, limit_adj_;
};

/// Largest singular value of a dense matrix (reference for small grids).
double dense_operator_norm(const Eigen::MatrixXcd& M);

struct SweepPoint {
  double c;
  double norm_minus;  ///< kMinus difference
  double norm_plus;   ///< kPlus difference
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double slope_minus = 0.0;
  double slope_plus = 0.0;
  bool monotone_minus = false;
  bool monotone_plus = false;
};

/// Requires at least four strictly increasing positive c values. params.c is ignored.
SweepResult nonrel_sweep(GridPtr grid, const PhysParams& params, cplx k,
                         const std::vector<double>& c_list);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// ||e^{-it(D_c - s mc^2)} psi - e^{-it L} P psi|| where L is the limit
/// operator on the matching component (Kirchhoff Laplacian / 2m on phi for
/// kMinus, minus the delta' Laplacian / 2m on chi for kPlus). Both flows use
/// Crank-Nicolson with step dt.
double propagator_difference(const SpinorField& psi, const PhysParams& params, RestSign sign,
                             double t, double dt);

/// c,norm_minus,norm_plus followed by a "slope" row.
void write_sweep_csv(std::ostream& os, const SweepResult& r);

}  // namespace nldg
