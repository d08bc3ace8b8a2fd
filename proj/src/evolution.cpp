#include "nldg/evolution.hpp"

#include <cmath>
#include <ostream>

#include "nldg/csv.hpp"

namespace nldg {

namespace {

double sign_value(NonlinearitySign s) { return static_cast<double>(static_cast<int>(s)); }

/// Per-node factor |Psi|^{p-2} from the node density.
Eigen::VectorXd node_factor(const SpinorField& psi, double p) {
  Eigen::VectorXd g = node_density(*psi.grid, psi.phi, psi.chi);
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = std::pow(g[i], 0.5 * (p - 2.0));
  return g;
}

}  // namespace

void EvolutionConfig::validate() const {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  if (!(t_end >= dt)) throw ParameterError("t_end must be at least dt");
  if (!(linear_solver_rtol > 0.0)) throw ParameterError("linear_solver_rtol must be positive");
  if (!(blowup_factor > 1.0)) throw ParameterError("blowup_factor must exceed 1");
  if (output_every < 1) throw ParameterError("output_every must be >= 1");
  const double n = t_end / dt;
  if (std::abs(n - std::round(n)) > 1e-9 * n)
    throw ParameterError("t_end must be an integer multiple of dt");
}

int EvolutionConfig::steps() const { return static_cast<int>(std::llround(t_end / dt)); }

SpinorField nonlinear_phase_step(const SpinorField& psi, double tau, double p,
                                 NonlinearitySign sign) {
  if (!(p > 2.0)) throw ParameterError("p must exceed 2");
  const Grid& grid = *psi.grid;
  const Eigen::VectorXd g = node_factor(psi, p);
  const double s = sign_value(sign) * tau;
  SpinorField out = psi;
  const auto& nodes = grid.nodes();
  for (std::size_t n = 0; n < nodes.size(); ++n)
    if (nodes[n].dof >= 0) out.phi[nodes[n].dof] *= std::polar(1.0, s * g[static_cast<Eigen::Index>(n)]);
  const auto& cells = grid.cells();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double gc = 0.5 * (g[cells[c].near] + g[cells[c].far]);
    out.chi[static_cast<Eigen::Index>(c)] *= std::polar(1.0, s * gc);
  }
  return out;
}

SpinorField nonlinear_term(const SpinorField& psi, double p) {
  const Grid& grid = *psi.grid;
  const Eigen::VectorXd g = node_factor(psi, p);
  SpinorField out = psi;
  const auto& nodes = grid.nodes();
  for (std::size_t n = 0; n < nodes.size(); ++n)
    if (nodes[n].dof >= 0) out.phi[nodes[n].dof] *= g[static_cast<Eigen::Index>(n)];
  const auto& cells = grid.cells();
  for (std::size_t c = 0; c < cells.size(); ++c)
    out.chi[static_cast<Eigen::Index>(c)] *= 0.5 * (g[cells[c].near] + g[cells[c].far]);
  return out;
}

CayleyPropagator::CayleyPropagator(const HermitianOperator& A, double dt, double rtol)
    : A_(&A), dt_(dt) {
  if (A.layout() != Layout::kSpinor) throw DimensionError("propagator needs a spinor operator");
  if (dt != 0.0) {
    // I + i tau A = i tau (A - z) with z = i / tau.
    const double tau = 0.5 * dt;
    solver_ = std::make_unique<ShiftedSolver>(A, cplx(0.0, 1.0 / tau), rtol);
  }
}

Eigen::VectorXcd CayleyPropagator::apply(const Eigen::VectorXcd& x) const {
  if (!solver_) return x;
  const double tau = 0.5 * dt_;
  const Eigen::VectorXcd rhs = x - cplx(0.0, tau) * A_->apply(x);
  return solver_->solve(rhs / cplx(0.0, tau));
}

SpinorField CayleyPropagator::apply(const SpinorField& psi) const {
  require_same_grid(A_->grid(), psi.grid);
  if (!solver_) return psi;
  return SpinorField::from_orthonormal(psi.grid, apply(psi.orthonormal()));
}

StrangStepper::StrangStepper(const HermitianOperator& A, double dt, double p,
                             NonlinearitySign sign, double rtol)
    : linear_(A, dt, rtol), dt_(dt), p_(p), sign_(sign) {}

SpinorField StrangStepper::step(const SpinorField& psi) const {
  SpinorField half = nonlinear_phase_step(psi, 0.5 * dt_, p_, sign_);
  half = linear_.apply(half);
  return nonlinear_phase_step(half, 0.5 * dt_, p_, sign_);
}

SpinorField linear_cn_step(const SpinorField& psi, double dt, const HermitianOperator& A,
                           double rtol) {
  return CayleyPropagator(A, dt, rtol).apply(psi);
}

SpinorField strang_step(const SpinorField& psi, double dt, const HermitianOperator& A, double p,
                        NonlinearitySign sign, double rtol) {
  return StrangStepper(A, dt, p, sign, rtol).step(psi);
}

double energy(const SpinorField& psi, const HermitianOperator& A, double p) {
  const Eigen::VectorXcd x = psi.orthonormal();
  const double quadratic = 0.5 * x.dot(A.apply(x)).real();
  return quadratic - lp_power_integral(psi, p) / p;
}

double graph_norm(const SpinorField& psi, const HermitianOperator& A) {
  const Eigen::VectorXcd x = psi.orthonormal();
  return x.norm() + A.apply(x).norm();
}

namespace {

EvolutionState record(double t, const SpinorField& psi, const HermitianOperator& A, double p) {
  const Eigen::VectorXcd x = psi.orthonormal();
  const Eigen::VectorXcd Ax = A.apply(x);
  EvolutionState s;
  s.t = t;
  s.psi = psi;
  s.mass = x.squaredNorm();
  s.energy = 0.5 * x.dot(Ax).real() - lp_power_integral(psi, p) / p;
  s.graph_norm = x.norm() + Ax.norm();
  return s;
}

}  // namespace

Trajectory evolve(const SpinorField& psi0, const EvolutionConfig& config,
                  const HermitianOperator& A, double p) {
  config.validate();
  if (!(p > 2.0)) throw ParameterError("p must exceed 2");
  require_same_grid(A.grid(), psi0.grid);

  Trajectory traj;
  traj.dt = config.dt;
  traj.output_every = config.output_every;
  traj.p = p;
  traj.sign = config.sign;
  traj.states.push_back(record(0.0, psi0, A, p));
  const double threshold = config.blowup_factor * traj.states.front().graph_norm;

  std::unique_ptr<StrangStepper> stepper;
  try {
    stepper = std::make_unique<StrangStepper>(A, config.dt, p, config.sign,
                                              config.linear_solver_rtol);
  } catch (const SolverError& e) {
    throw EvolutionError(e, std::move(traj));
  }

  SpinorField psi = psi0;
  const int steps = config.steps();
  for (int n = 1; n <= steps; ++n) {
    try {
      psi = stepper->step(psi);
    } catch (const SolverError& e) {
      throw EvolutionError(e, std::move(traj));
    }
    const double t = n * config.dt;
    const double gn = graph_norm(psi, A);
    const bool blown = gn > threshold || !std::isfinite(gn);
    if (n % config.output_every == 0 || n == steps || blown)
      traj.states.push_back(record(t, psi, A, p));
    if (blown) {
      traj.reason = Termination::kBlowupFlagged;
      break;
    }
  }
  return traj;
}

std::vector<double> duhamel_residual_series(const Trajectory& traj, const HermitianOperator& A,
                                            double t) {
  if (traj.states.empty()) throw ResolutionError("empty trajectory");
  if (traj.output_every != 1) throw ResolutionError("duhamel residual needs a record at every step");
  const double dt = traj.dt;
  const long n = std::lround(t / dt);
  const double slack = 1e-9 * std::max(1.0, std::abs(t));
  if (n < 0 || std::abs(n * dt - t) > slack)
    throw ResolutionError("t is not a step time of the trajectory");
  if (n >= static_cast<long>(traj.states.size()))
    throw ResolutionError("trajectory does not reach t");
  for (long j = 1; j <= n; ++j)
    if (std::abs(traj.states[static_cast<std::size_t>(j)].t - j * dt) > slack)
      throw ResolutionError("trajectory records are not spaced by dt");

  const CayleyPropagator U(A, dt);
  const cplx is(0.0, sign_value(traj.sign));
  auto F = [&](long j) {
    return nonlinear_term(traj.states[static_cast<std::size_t>(j)].psi, traj.p).orthonormal();
  };
  // free_j = U^j Psi0; acc_j = sum_{i<j} w_i U^{j-i} F_i with w_0 = dt/2, else dt.
  // The trapezoid sum up to j adds the half-weight end term dt/2 F_j.
  Eigen::VectorXcd free = traj.states.front().psi.orthonormal();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(free.size());
  Eigen::VectorXcd Fj = F(0);
  std::vector<double> out{0.0};
  for (long j = 1; j <= n; ++j) {
    acc = U.apply(Eigen::VectorXcd(acc + (j == 1 ? 0.5 * dt : dt) * Fj));
    free = U.apply(free);
    Fj = F(j);
    const Eigen::VectorXcd psi_j = traj.states[static_cast<std::size_t>(j)].psi.orthonormal();
    out.push_back((psi_j - free - is * (acc + 0.5 * dt * Fj)).norm());
  }
  return out;
}

double duhamel_residual(const Trajectory& traj, const HermitianOperator& A, double t) {
  return duhamel_residual_series(traj, A, t).back();
}

void write_diagnostics_csv(std::ostream& os, const Trajectory& traj,
                           const std::vector<double>* duhamel) {
  if (duhamel)
    csv::row(os, {"t", "mass", "energy", "graph_norm", "duhamel_residual"});
  else
    csv::row(os, {"t", "mass", "energy", "graph_norm"});
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const EvolutionState& s = traj.states[i];
    const std::string t = csv::num(s.t), m = csv::num(s.mass), e = csv::num(s.energy),
                      g = csv::num(s.graph_norm);
    if (duhamel)
      csv::row(os, {t, m, e, g, csv::num(i < duhamel->size() ? (*duhamel)[i] : NAN)});
    else
      csv::row(os, {t, m, e, g});
  }
}

}  // namespace nldg
