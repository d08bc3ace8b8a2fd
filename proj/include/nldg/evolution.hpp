#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "nldg/errors.hpp"
#include "nldg/operators.hpp"

namespace nldg {

/// Sign in front of the nonlinearity in i Psi_t = D Psi - sign |Psi|^{p-2} Psi.
enum class NonlinearitySign : int { kFocusing = +1, kDefocusing = -1 };

struct EvolutionConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  double linear_solver_rtol = 1e-12;
  double blowup_factor = 1e3;
  NonlinearitySign sign = NonlinearitySign::kFocusing;
  int output_every = 1;  ///< record every k-th step (the initial state is always recorded)

  /// Throws ParameterError; t_end must be a whole number of steps.
  void validate() const;
  int steps() const;
};

struct EvolutionState {
  double t = 0.0;
  SpinorField psi;
  double mass = 0.0;
  double energy = 0.0;
  double graph_norm = 0.0;
};

enum class Termination { kCompleted, kBlowupFlagged };

struct Trajectory {
  std::vector<EvolutionState> states;
  Termination reason = Termination::kCompleted;
  double dt = 0.0;
  int output_every = 1;
  double p = 4.0;
  NonlinearitySign sign = NonlinearitySign::kFocusing;
};

/// Solver failure in the middle of a run; keeps what was computed so far.
class EvolutionError : public SolverError {
 public:
  EvolutionError(const SolverError& cause, Trajectory partial)
      : SolverError(cause.what(), cause.residual()), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

/// Exact flow of i Psi_t = -sign |Psi|^{p-2} Psi: a pointwise phase rotation.
/// The density entering the phase is node_density(), which the rotation itself
/// leaves unchanged.
SpinorField nonlinear_phase_step(const SpinorField& psi, double tau, double p,
                                 NonlinearitySign sign);

/// |Psi|^{p-2} Psi with the same node density, i.e. the gradient of the
/// discrete potential (1/p) * lp_power_integral.
SpinorField nonlinear_term(const SpinorField& psi, double p);

/// Crank-Nicolson step (I + i dt/2 A) Psi+ = (I - i dt/2 A) Psi.
SpinorField linear_cn_step(const SpinorField& psi, double dt, const HermitianOperator& A,
                           double rtol = 1e-12);

/// Reusable Crank-Nicolson propagator for a fixed step.
class CayleyPropagator {
 public:
  CayleyPropagator(const HermitianOperator& A, double dt, double rtol = 1e-12);
  /// In orthonormal coordinates.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  SpinorField apply(const SpinorField& psi) const;
  double dt() const { return dt_; }

 private:
  const HermitianOperator* A_;
  double dt_;
  std::unique_ptr<ShiftedSolver> solver_;
};

/// Half nonlinear phase, full Crank-Nicolson step, half nonlinear phase.
class StrangStepper {
 public:
  StrangStepper(const HermitianOperator& A, double dt, double p, NonlinearitySign sign,
                double rtol = 1e-12);
  SpinorField step(const SpinorField& psi) const;

 private:
  CayleyPropagator linear_;
  double dt_;
  double p_;
  NonlinearitySign sign_;
};

SpinorField strang_step(const SpinorField& psi, double dt, const HermitianOperator& A, double p,
                        NonlinearitySign sign = NonlinearitySign::kFocusing, double rtol = 1e-12);

/// 1/2 Re <Psi, A Psi> - (1/p) int |Psi|^p.
double energy(const SpinorField& psi, const HermitianOperator& A, double p);

/// ||Psi|| + ||A Psi||.
double graph_norm(const SpinorField& psi, const HermitianOperator& A);

/// Strang-split run from psi0. Stops early with kBlowupFlagged once the graph
/// norm exceeds blowup_factor times its initial value.
Trajectory evolve(const SpinorField& psi0, const EvolutionConfig& config,
                  const HermitianOperator& A, double p);

/// || Psi(t) - U(t) Psi0 - i sign int_0^t U(t - s) |Psi|^{p-2} Psi(s) ds ||
/// with U applied by Crank-Nicolson steps of the trajectory's dt and the time
/// integral by the trapezoid rule. Needs a record at every step up to t.
double duhamel_residual(const Trajectory& traj, const HermitianOperator& A, double t);

/// duhamel_residual at every step time 0, dt, ..., t in one pass.
std::vector<double> duhamel_residual_series(const Trajectory& traj, const HermitianOperator& A,
                                            double t);

/// Diagnostics CSV: t,mass,energy,graph_norm[,duhamel_residual].
void write_diagnostics_csv(std::ostream& os, const Trajectory& traj,
                           const std::vector<double>* duhamel = nullptr);

}  // namespace nldg
