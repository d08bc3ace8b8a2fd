#include "nldg/nonrel.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include <Eigen/SVD>

#include "nldg/csv.hpp"
#include "nldg/evolution.hpp"
#include "nldg/lanczos.hpp"

namespace nldg {

namespace {

using Matrix = HermitianOperator::Matrix;

double sgn(RestSign s) { return static_cast<double>(static_cast<int>(s)); }

/// Zero the components not kept by P^+ (s = +1) or P^- (s = -1).
Eigen::VectorXcd project(const Eigen::VectorXcd& x, int np, double s) {
  Eigen::VectorXcd y = x;
  if (s > 0)
    y.tail(y.size() - np).setZero();
  else
    y.head(np).setZero();
  return y;
}

Eigen::VectorXcd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) {
    const double re = nd(rng);
    const double im = nd(rng);
    v[i] = cplx(re, im);
  }
  return v;
}

PhysParams with_c(const PhysParams& p, double c) {
  PhysParams q = p;
  q.c = c;
  q.validate();
  return q;
}

}  // namespace

double resdecomp_check(GridPtr grid, const PhysParams& params, cplx k, RestSign sign, int samples,
                       std::uint64_t seed) {
  params.validate();
  if (k.imag() == 0.0) throw ParameterError("resdecomp_check: k must be off the real axis");
  if (samples < 1) throw ParameterError("resdecomp_check: need at least one sample");
  const double m = params.m, c = params.c, s = sgn(sign);
  const double mc2 = m * c * c;
  const Matrix D = assemble_dirac(grid, params).matrix();
  const Matrix Dt = assemble_massless_dirac(grid, c).matrix();
  const Matrix X = (s * assemble_big_laplacian(grid, m).matrix()).eval();
  const int np = grid->phi_size();
  const cplx sigma = k * k / (2.0 * mc2);

  const ShiftedSolver lhs(D, s * mc2 + k);
  const ShiftedSolver lam(X, k);
  const ShiftedSolver inner(X, k + s * sigma);

  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Eigen::VectorXcd b = random_vector(grid->size(), rng);
    const Eigen::VectorXcd a = lhs.solve(b);
    const Eigen::VectorXcd y = lam.solve(b);
    // (I - s sigma Lambda)^{-1} y = (sX - k - s sigma)^{-1} (sX - k) y.
    const Eigen::VectorXcd z = inner.solve(X * y - k * y);
    const Eigen::VectorXcd r = project(z, np, s) + s * (Dt * z + k * z) / (2.0 * mc2);
    worst = std::max(worst, (a - r).norm() / a.norm());
  }
  return worst;
}

NonrelDifference::NonrelDifference(GridPtr grid, const PhysParams& params, cplx k, RestSign sign)
    : n_(grid->size()), np_(grid->phi_size()) {
  params.validate();
  const double s = sgn(sign);
  const double mc2 = params.m * params.c * params.c;
  const Matrix D = assemble_dirac(grid, params).matrix();
  const Matrix X = (s * assemble_big_laplacian(grid, params.m).matrix()).eval();
  dirac_ = std::make_unique<ShiftedSolver>(D, s * mc2 + k);
  dirac_adj_ = std::make_unique<ShiftedSolver>(D, std::conj(s * mc2 + k));
  limit_ = std::make_unique<ShiftedSolver>(X, k);
  limit_adj_ = std::make_unique<ShiftedSolver>(X, std::conj(k));
  sign_ = s;
}

Eigen::VectorXcd NonrelDifference::apply(const Eigen::VectorXcd& x) const {
  return dirac_->solve(x) - project(limit_->solve(x), np_, sign_);
}

Eigen::VectorXcd NonrelDifference::apply_adjoint(const Eigen::VectorXcd& x) const {
  return dirac_adj_->solve(x) - limit_adj_->solve(project(x, np_, sign_));
}

double NonrelDifference::operator_norm(double rtol) const {
  const HermitianMap normal = [this](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    y = apply_adjoint(apply(x));
  };
  const LanczosResult r = lanczos_largest(normal, n_, 1, rtol, std::min(n_, 400));
  return std::sqrt(std::max(0.0, r.values.front()));
}

double dense_operator_norm(const Eigen::MatrixXcd& M) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ParameterError("loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SweepResult nonrel_sweep(GridPtr grid, const PhysParams& params, cplx k,
                         const std::vector<double>& c_list) {
  if (c_list.size() < 4) throw ParameterError("nonrel_sweep: c_list needs at least four values");
  for (std::size_t i = 0; i < c_list.size(); ++i) {
    if (!(c_list[i] > 0.0)) throw ParameterError("nonrel_sweep: c values must be positive");
    if (i > 0 && !(c_list[i] > c_list[i - 1]))
      throw ParameterError("nonrel_sweep: c_list must be strictly increasing");
  }
  if (k.imag() == 0.0) throw ParameterError("nonrel_sweep: k must be off the real axis");
  SweepResult r;
  std::vector<double> cs, nm, npl;
  for (double c : c_list) {
    const PhysParams pc = with_c(params, c);
    const double a = NonrelDifference(grid, pc, k, RestSign::kMinus).operator_norm();
    const double b = NonrelDifference(grid, pc, k, RestSign::kPlus).operator_norm();
    r.points.push_back({c, a, b});
    cs.push_back(c);
    nm.push_back(a);
    npl.push_back(b);
  }
  r.slope_minus = loglog_slope(cs, nm);
  r.slope_plus = loglog_slope(cs, npl);
  r.monotone_minus = r.monotone_plus = true;
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    r.monotone_minus = r.monotone_minus && r.points[i].norm_minus < r.points[i - 1].norm_minus;
    r.monotone_plus = r.monotone_plus && r.points[i].norm_plus < r.points[i - 1].norm_plus;
  }
  return r;
}

double propagator_difference(const SpinorField& psi, const PhysParams& params, RestSign sign,
                             double t, double dt) {
  params.validate();
  if (!(dt > 0.0) || !(t >= 0.0)) throw ParameterError("propagator_difference: need dt > 0, t >= 0");
  const GridPtr& grid = psi.grid;
  const double s = sgn(sign);
  const double mc2 = params.m * params.c * params.c;
  const int n = grid->size(), np = grid->phi_size();

  Matrix I(n, n);
  I.setIdentity();
  const Matrix H = assemble_dirac(grid, params).matrix() - (s * mc2) * I;
  const HermitianOperator shifted(OperatorKind::kDirac, Layout::kSpinor, grid, H);

  // Keep only the block of the big Laplacian that survives the limit.
  Matrix X = assemble_big_laplacian(grid, params.m).matrix();
  X.prune([&](Eigen::Index row, Eigen::Index, const cplx&) {
    return s > 0 ? row < np : row >= np;
  });
  const HermitianOperator limit(OperatorKind::kBigLaplacian, Layout::kSpinor, grid, (s * X).eval());

  const long steps = std::lround(t / dt);
  const CayleyPropagator U(shifted, dt), V(limit, dt);
  Eigen::VectorXcd a = psi.orthonormal();
  Eigen::VectorXcd b = project(a, np, s);
  for (long i = 0; i < steps; ++i) {
    a = U.apply(a);
    b = V.apply(b);
  }
  return (a - b).norm();
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  csv::row(os, {"c", "norm_minus", "norm_plus"});
  for (const SweepPoint& p : r.points) {
    const std::string a = csv::num(p.c), b = csv::num(p.norm_minus), c = csv::num(p.norm_plus);
    csv::row(os, {a, b, c});
  }
  const std::string a = csv::num(r.slope_minus), b = csv::num(r.slope_plus);
  csv::row(os, {"slope", a, b});
}

}  // namespace nldg
