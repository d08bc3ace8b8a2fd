#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "nldg/errors.hpp"
#include "nldg/fields.hpp"
#include "nldg/operators.hpp"
#include "nldg/soliton.hpp"

namespace nldg {

/// Real reduction of the rescaled standing-wave system, v = -i w:
///   R1 = -w' + u - G u            on phi nodes
///   R2 =  u' - (2m - eps) w - eps G w   on chi cells
/// with G = (u^2 + eps w^2)^{(p-2)/2} evaluated on nodes and averaged onto
/// cells. At a vertex, -w' is the weak row -(sum_e w_e(h/2)) / weight, which
/// carries the sum condition on w.
struct RescaledState {
  double eps = 0.0;
  RealField u;  ///< integer nodes
  RealField w;  ///< half nodes

  GridPtr grid() const { return u.grid; }
  Eigen::VectorXd stacked() const;
  static RescaledState from_stacked(GridPtr grid, double eps, const Eigen::VectorXd& x);
};

/// u = U sampled on integer nodes, w = U'/(2m) on half nodes, eps = 0.
RescaledState seed_state(const SolitonSpec& spec, GridPtr grid);

/// Stacked (R1, R2).
Eigen::VectorXd rescaled_residual(const RescaledState& state, const SolitonSpec& spec);

/// Analytic Jacobian of rescaled_residual with respect to (u, w).
Eigen::SparseMatrix<double> rescaled_jacobian(const RescaledState& state,
                                              const SolitonSpec& spec);

/// Where the nonlinearity sits in the complex system.
enum class Placement {
  kStandard,  ///< G u in the first equation, eps G v in the second
  kSwapped,   ///< G v in the first equation, eps G u in the second
};

/// Complex residual of the rescaled system for a pair (u, v) of complex fields
/// (u on integer nodes, v on half nodes), using the same discrete derivatives
/// and density as rescaled_residual.
Eigen::VectorXcd complex_rescaled_residual(const ComplexField& u, const ComplexField& v,
                                           double eps, const SolitonSpec& spec,
                                           Placement placement = Placement::kStandard);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 25;
};

struct NewtonReport {
  int iterations = 0;
  std::vector<double> residual_history;  ///< sup-norm before each iteration and at the end
};

/// Newton iteration on (u, w) at fixed eps, starting from `initial`.
/// Throws ConvergenceError after max_iter iterations.
RescaledState newton_solve(const RescaledState& initial, double eps, const SolitonSpec& spec,
                           const NewtonOptions& options = {}, NewtonReport* report = nullptr);

/// Smallest singular value of a square sparse matrix (Lanczos on J^{-1} J^{-T}).
double min_singular_value(const Eigen::SparseMatrix<double>& J, double rtol = 1e-8);

struct BranchPoint {
  RescaledState state;
  int newton_iters = 0;
  double residual_norm = 0.0;
  double min_singular_value = 0.0;
};

struct Branch {
  SolitonSpec spec;
  std::vector<BranchPoint> points;
};

struct ContinuationOptions {
  NewtonOptions newton;
  double min_step = 1e-4;
  bool singular_values = true;
};

/// Continuation did not reach eps_max; carries what was computed.
class BranchError : public ConvergenceError {
 public:
  BranchError(const std::string& what, double last_residual, int iterations, Branch partial)
      : ConvergenceError(what, last_residual, iterations), partial_(std::move(partial)) {}
  const Branch& partial() const { return partial_; }

 private:
  Branch partial_;
};

/// Marches eps from 0 to eps_max (either sign) starting at the Newton-polished
/// seed. The predictor is the previous solution; a failed step is halved down
/// to options.min_step before a BranchError is thrown.
Branch continue_branch(const SolitonSpec& spec, GridPtr grid, double eps_max, double eps_step,
                       const ContinuationOptions& options = {});

struct ScalingParams {
  double lambda;  ///< sqrt(eps)
  double alpha;   ///< eps^{1/(p-2)}
  double beta;    ///< eps^{p/(2p-4)}
};
ScalingParams scaling_params(double eps, double p);

/// Physical grid on which node x corresponds to sqrt(eps) x of the rescaled
/// grid node by node.
GridPtr matched_physical_grid(const Grid& rescaled, double eps);

struct PhysicalStandingWave {
  SpinorField psi;
  double omega;
};

/// phi(x) = alpha u(sqrt(eps) x), chi(x) = -i beta w(sqrt(eps) x), omega = m - eps.
/// Without a target grid the matched grid is used and the values are copied;
/// otherwise they are cubic-interpolated. Requires eps > 0 and c = 1.
PhysicalStandingWave scale_to_physical(const RescaledState& state, const PhysParams& params,
                                       GridPtr target = nullptr);

/// Sup-norm of D psi - |psi|^{p-2} psi - omega psi over all rows except the
/// weak vertex rows, plus the absolute chi-trace sum at each vertex.
double nlde_residual(const SpinorField& psi, double omega, const PhysParams& params);

/// energy(psi) - omega/2 * mass(psi).
double action_value(const SpinorField& psi, double omega, const HermitianOperator& A, double p);

/// Per-point physical quantities of a branch (nan where eps <= 0).
struct BranchRow {
  double eps, omega, sup_u, sup_w, l2_physical_mass, action;
  int newton_iters;
  double min_singular_value, residual_norm;
};
std::vector<BranchRow> branch_rows(const Branch& branch, const PhysParams& params);

/// eps,omega,sup_u,sup_w,l2_physical_mass,action,newton_iters,min_singular_value,residual_norm
void write_branch_csv(std::ostream& os, const std::vector<BranchRow>& rows);

}  // namespace nldg
