#include "nldg/standing_waves.hpp"

#include <cmath>

#include <Eigen/SparseLU>

#include "nldg/csv.hpp"
#include "nldg/evolution.hpp"
#include "nldg/lanczos.hpp"

namespace nldg {

namespace {

/// Node density rho, G = rho^{(p-2)/2} and dG/drho on every grid node.
struct Density {
  Eigen::VectorXd rho, g, dg;
};

template <class Vec>
Density density(const Grid& grid, const Vec& u, const Vec& w, double eps, double p) {
  const auto& nodes = grid.nodes();
  const auto& cells = grid.cells();
  const auto n_nodes = static_cast<Eigen::Index>(nodes.size());
  Density d{Eigen::VectorXd::Zero(n_nodes), Eigen::VectorXd(n_nodes), Eigen::VectorXd(n_nodes)};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double a = 0.5 * cells[c].h * std::norm(w[static_cast<Eigen::Index>(c)]);
    d.rho[cells[c].near] += a;
    d.rho[cells[c].far] += a;
  }
  for (Eigen::Index n = 0; n < n_nodes; ++n) {
    const auto& node = nodes[static_cast<std::size_t>(n)];
    d.rho[n] *= eps / node.weight;
    if (node.dof >= 0) d.rho[n] += std::norm(u[node.dof]);
    const double r = d.rho[n];
    d.g[n] = std::pow(r, 0.5 * (p - 2.0));
    d.dg[n] = (r < 1e-300 && p < 4.0) ? 0.0 : 0.5 * (p - 2.0) * std::pow(r, 0.5 * (p - 4.0));
  }
  return d;
}

double sup_norm(const Eigen::VectorXd& r) { return r.size() ? r.cwiseAbs().maxCoeff() : 0.0; }

void check_state(const RescaledState& s) {
  if (!s.u.grid || s.u.grid != s.w.grid) throw DimensionError("rescaled state: u and w grids differ");
  if (s.u.kind != NodeKind::kInteger || s.w.kind != NodeKind::kHalf)
    throw DimensionError("rescaled state: u must live on integer nodes, w on half nodes");
  if (s.u.values.size() != s.u.grid->phi_size() || s.w.values.size() != s.u.grid->chi_size())
    throw DimensionError("rescaled state: field sizes do not match the grid");
}

}  // namespace

Eigen::VectorXd RescaledState::stacked() const {
  Eigen::VectorXd x(u.values.size() + w.values.size());
  x << u.values, w.values;
  return x;
}

RescaledState RescaledState::from_stacked(GridPtr grid, double eps, const Eigen::VectorXd& x) {
  const int np = grid->phi_size(), nc = grid->chi_size();
  if (x.size() != np + nc) throw DimensionError("rescaled state: stacked vector has wrong size");
  RescaledState s{eps, {grid, NodeKind::kInteger, x.head(np)}, {grid, NodeKind::kHalf, x.tail(nc)}};
  return s;
}

RescaledState seed_state(const SolitonSpec& spec, GridPtr grid) {
  spec.validate();
  if (!grid->graph().is_star() || static_cast<int>(grid->graph().edges().size()) != spec.N)
    throw TopologyError("seed_state: grid must be an N-star matching the soliton spec");
  RescaledState s{0.0, RealField::zeros(grid, NodeKind::kInteger),
                  RealField::zeros(grid, NodeKind::kHalf)};
  for (const Edge& e : grid->graph().edges()) {
    const Grid::EdgeLayout& lay = grid->edge(e.id);
    for (int j = 0; j <= lay.cells; ++j) {
      const int dof = grid->phi_index(e.id, j);
      if (dof >= 0) s.u.values[dof] = soliton_eval(spec, e.id, j * lay.h);
    }
    for (int j = 0; j < lay.cells; ++j)
      s.w.values[grid->chi_index(e.id, j)] =
          soliton_eval_d1(spec, e.id, (j + 0.5) * lay.h) / (2.0 * spec.m);
  }
  return s;
}

Eigen::VectorXd rescaled_residual(const RescaledState& state, const SolitonSpec& spec) {
  check_state(state);
  const Grid& grid = *state.grid();
  const double eps = state.eps, m = spec.m;
  const Eigen::VectorXd& u = state.u.values;
  const Eigen::VectorXd& w = state.w.values;
  const Density d = density(grid, u, w, eps, spec.p);
  const auto& nodes = grid.nodes();
  const auto& cells = grid.cells();
  const int np = grid.phi_size();

  Eigen::VectorXd r = Eigen::VectorXd::Zero(np + grid.chi_size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    const int a = nodes[cell.near].dof, b = nodes[cell.far].dof;
    const double wc = w[static_cast<Eigen::Index>(c)];
    // -w' at nodes, assembled cell by cell and scaled by node weight below.
    if (a >= 0) r[a] -= wc;
    if (b >= 0) r[b] += wc;
    const double ua = a >= 0 ? u[a] : 0.0, ub = b >= 0 ? u[b] : 0.0;
    const double gc = 0.5 * (d.g[cell.near] + d.g[cell.far]);
    r[np + static_cast<Eigen::Index>(c)] = (ub - ua) / cell.h - (2.0 * m - eps) * wc - eps * gc * wc;
  }
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const int dof = nodes[n].dof;
    if (dof < 0) continue;
    r[dof] = r[dof] / nodes[n].weight + u[dof] * (1.0 - d.g[static_cast<Eigen::Index>(n)]);
  }
  return r;
}

Eigen::SparseMatrix<double> rescaled_jacobian(const RescaledState& state,
                                              const SolitonSpec& spec) {
  check_state(state);
  const Grid& grid = *state.grid();
  const double eps = state.eps, m = spec.m;
  const Eigen::VectorXd& u = state.u.values;
  const Eigen::VectorXd& w = state.w.values;
  const Density d = density(grid, u, w, eps, spec.p);
  const auto& nodes = grid.nodes();
  const auto& cells = grid.cells();
  const int np = grid.phi_size();
  const int n = np + grid.chi_size();

  // Cells adjacent to each node, for the w-derivatives of rho.
  std::vector<std::vector<int>> adjacent(nodes.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    adjacent[static_cast<std::size_t>(cells[c].near)].push_back(static_cast<int>(c));
    adjacent[static_cast<std::size_t>(cells[c].far)].push_back(static_cast<int>(c));
  }
  auto node_u = [&](int node) { return nodes[static_cast<std::size_t>(node)].dof >= 0 ? u[nodes[static_cast<std::size_t>(node)].dof] : 0.0; };
  // dG_node/du_dof = dg * 2u ; dG_node/dw_c = dg * eps * h_c * w_c / weight.
  auto dG_dw = [&](int node, int c) {
    return d.dg[node] * eps * cells[static_cast<std::size_t>(c)].h * w[c] /
           nodes[static_cast<std::size_t>(node)].weight;
  };

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(n) * 8);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int dof = nodes[k].dof;
    if (dof < 0) continue;
    const int node = static_cast<int>(k);
    const double wt = nodes[k].weight;
    t.emplace_back(dof, dof, 1.0 - d.g[node] - u[dof] * d.dg[node] * 2.0 * u[dof]);
    for (int c : adjacent[k]) {
      const double s = cells[static_cast<std::size_t>(c)].far == node ? 1.0 : -1.0;
      t.emplace_back(dof, np + c, s / wt - u[dof] * dG_dw(node, c));
    }
  }
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const auto& cell = cells[ci];
    const int c = static_cast<int>(ci);
    const int row = np + c;
    const double wc = w[c];
    const double gc = 0.5 * (d.g[cell.near] + d.g[cell.far]);
    t.emplace_back(row, row, -(2.0 * m - eps) - eps * gc);
    for (int side = 0; side < 2; ++side) {
      const int node = side == 0 ? cell.near : cell.far;
      const int dof = nodes[static_cast<std::size_t>(node)].dof;
      if (dof >= 0) {
        const double diff = side == 0 ? -1.0 / cell.h : 1.0 / cell.h;
        t.emplace_back(row, dof, diff - eps * wc * 0.5 * d.dg[node] * 2.0 * node_u(node));
      }
      for (int c2 : adjacent[static_cast<std::size_t>(node)])
        t.emplace_back(row, np + c2, -eps * wc * 0.5 * dG_dw(node, c2));
    }
  }
  Eigen::SparseMatrix<double> J(n, n);
  J.setFromTriplets(t.begin(), t.end());
  J.makeCompressed();
  return J;
}

Eigen::VectorXcd complex_rescaled_residual(const ComplexField& u, const ComplexField& v,
                                           double eps, const SolitonSpec& spec,
                                           Placement placement) {
  if (!u.grid || u.grid != v.grid || u.kind != NodeKind::kInteger || v.kind != NodeKind::kHalf)
    throw DimensionError("complex residual: u on integer nodes, v on half nodes of one grid");
  const Grid& grid = *u.grid;
  const double m = spec.m;
  const Density d = density(grid, u.values, v.values, eps, spec.p);
  const auto& nodes = grid.nodes();
  const auto& cells = grid.cells();
  const int np = grid.phi_size();
  const cplx I(0.0, 1.0);

  Eigen::VectorXcd div_part = Eigen::VectorXcd::Zero(np);  // sum of signed v, before weight
  Eigen::VectorXcd v_node = Eigen::VectorXcd::Zero(np);    // weighted mean of adjacent v
  Eigen::VectorXcd r(np + grid.chi_size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    const int a = nodes[cell.near].dof, b = nodes[cell.far].dof;
    const cplx vc = v.values[static_cast<Eigen::Index>(c)];
    if (a >= 0) { div_part[a] -= vc; v_node[a] += 0.5 * cell.h * vc; }
    if (b >= 0) { div_part[b] += vc; v_node[b] += 0.5 * cell.h * vc; }
    const cplx ua = a >= 0 ? u.values[a] : 0.0, ub = b >= 0 ? u.values[b] : 0.0;
    const double gc = 0.5 * (d.g[cell.near] + d.g[cell.far]);
    const cplx rhs = placement == Placement::kStandard ? vc : 0.5 * (ua + ub);
    r[np + static_cast<Eigen::Index>(c)] = -I * (ub - ua) / cell.h - (2.0 * m - eps) * vc - eps * gc * rhs;
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int dof = nodes[k].dof;
    if (dof < 0) continue;
    const double wt = nodes[k].weight;
    // -i v' with v' = -(signed sum) / weight.
    const cplx vprime = -div_part[dof] / wt;
    const cplx rhs = placement == Placement::kStandard ? u.values[dof] : v_node[dof] / wt;
    r[dof] = -I * vprime + u.values[dof] - d.g[static_cast<Eigen::Index>(k)] * rhs;
  }
  return r;
}

RescaledState newton_solve(const RescaledState& initial, double eps, const SolitonSpec& spec,
                           const NewtonOptions& options, NewtonReport* report) {
  check_state(initial);
  spec.validate();
  GridPtr grid = initial.grid();
  RescaledState s = initial;
  s.eps = eps;
  NewtonReport local;
  NewtonReport& rep = report ? *report : local;
  rep = NewtonReport{};
  for (int it = 0;; ++it) {
    const Eigen::VectorXd r = rescaled_residual(s, spec);
    const double norm = sup_norm(r);
    rep.residual_history.push_back(norm);
    rep.iterations = it;
    if (!std::isfinite(norm)) throw ConvergenceError("newton: residual is not finite", norm, it);
    if (norm <= options.tol) return s;
    if (it == options.max_iter)
      throw ConvergenceError("newton: iteration limit reached", norm, it);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(rescaled_jacobian(s, spec));
    if (lu.info() != Eigen::Success)
      throw ConvergenceError("newton: singular Jacobian", norm, it);
    const Eigen::VectorXd dx = lu.solve(-r);
    s = RescaledState::from_stacked(grid, eps, s.stacked() + dx);
  }
}

double min_singular_value(const Eigen::SparseMatrix<double>& J, double rtol) {
  if (J.rows() != J.cols()) throw DimensionError("min_singular_value: matrix must be square");
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu, lut;
  lu.compute(J);
  const Eigen::SparseMatrix<double> Jt = J.transpose();
  lut.compute(Jt);
  if (lu.info() != Eigen::Success || lut.info() != Eigen::Success) return 0.0;
  auto solve = [](const Eigen::SparseLU<Eigen::SparseMatrix<double>>& f, const Eigen::VectorXcd& x) {
    const Eigen::VectorXd re = f.solve(Eigen::VectorXd(x.real()));
    const Eigen::VectorXd im = f.solve(Eigen::VectorXd(x.imag()));
    Eigen::VectorXcd y(x.size());
    y.real() = re;
    y.imag() = im;
    return y;
  };
  const HermitianMap op = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    y = solve(lu, solve(lut, x));
  };
  const LanczosResult res = lanczos_largest(op, static_cast<int>(J.rows()), 1, rtol,
                                            std::min<int>(static_cast<int>(J.rows()), 400));
  return 1.0 / std::sqrt(res.values.front());
}

Branch continue_branch(const SolitonSpec& spec, GridPtr grid, double eps_max, double eps_step,
                       const ContinuationOptions& options) {
  spec.validate();
  if (!(eps_step > 0.0)) throw ParameterError("continuation: eps_step must be positive");
  if (!std::isfinite(eps_max)) throw ParameterError("continuation: eps_max must be finite");
  Branch branch{spec, {}};

  auto record = [&](RescaledState s, const NewtonReport& rep) {
    BranchPoint pt{std::move(s), rep.iterations, rep.residual_history.back(), NAN};
    if (options.singular_values) {
      try {
        pt.min_singular_value = min_singular_value(rescaled_jacobian(pt.state, spec));
      } catch (const ConvergenceError&) {
      }
    }
    branch.points.push_back(std::move(pt));
  };

  NewtonReport rep;
  RescaledState current;
  try {
    current = newton_solve(seed_state(spec, grid), 0.0, spec, options.newton, &rep);
  } catch (const ConvergenceError& e) {
    throw BranchError(std::string("continuation: seed did not converge: ") + e.what(),
                      e.last_residual(), e.iterations(), branch);
  }
  record(current, rep);

  const double dir = eps_max >= 0.0 ? 1.0 : -1.0;
  double eps = 0.0;
  double step = eps_step;
  while (dir * (eps_max - eps) > 1e-14) {
    const double remaining = dir * (eps_max - eps);
    const double target = step >= remaining - 1e-14 ? eps_max : eps + dir * step;
    try {
      RescaledState next = newton_solve(current, target, spec, options.newton, &rep);
      eps = target;
      current = next;
      record(std::move(next), rep);
      step = std::min(eps_step, 2.0 * step);
    } catch (const ConvergenceError& e) {
      step *= 0.5;
      if (step < options.min_step)
        throw BranchError("continuation: step fell below the minimum at eps = " + std::to_string(eps),
                          e.last_residual(), e.iterations(), branch);
    }
  }
  return branch;
}

ScalingParams scaling_params(double eps, double p) {
  if (!(eps > 0.0)) throw ParameterError("scaling: eps must be positive");
  if (!(p > 2.0)) throw ParameterError("scaling: p must exceed 2");
  return {std::sqrt(eps), std::pow(eps, 1.0 / (p - 2.0)), std::pow(eps, p / (2.0 * p - 4.0))};
}

GridPtr matched_physical_grid(const Grid& rescaled, double eps) {
  if (!(eps > 0.0)) throw ParameterError("matched grid: eps must be positive");
  const double s = std::sqrt(eps);
  GridSpec spec = rescaled.spec();
  // Use the realized spacing so both grids round to the same cell counts.
  spec.h = rescaled.edge(rescaled.graph().edges().front().id).h / s;
  spec.truncation_length = spec.truncation_length / s;
  auto g = std::make_shared<const Grid>(rescaled.graph_ptr(), spec);
  if (g->phi_size() != rescaled.phi_size() || g->chi_size() != rescaled.chi_size())
    throw ParameterError("matched grid: cell counts differ after rounding");
  return g;
}

PhysicalStandingWave scale_to_physical(const RescaledState& state, const PhysParams& params,
                                       GridPtr target) {
  check_state(state);
  params.validate();
  if (!(state.eps > 0.0))
    throw ParameterError("scale_to_physical: eps must be positive (the scaling is only valid for eps > 0)");
  if (params.c != 1.0) throw ParameterError("scale_to_physical: only c = 1 is supported");
  const ScalingParams sp = scaling_params(state.eps, params.p);
  const Grid& rg = *state.grid();
  const cplx chi_factor(0.0, -sp.beta);
  const double omega = params.m - state.eps;

  if (!target) {
    GridPtr g = matched_physical_grid(rg, state.eps);
    SpinorField psi = SpinorField::zeros(g);
    psi.phi = sp.alpha * state.u.values.cast<cplx>();
    psi.chi = chi_factor * state.w.values.cast<cplx>();
    return {std::move(psi), omega};
  }

  if (target->graph().edges().size() != rg.graph().edges().size())
    throw DimensionError("scale_to_physical: target grid has a different graph");
  std::vector<std::vector<double>> us, ws;
  for (const Edge& e : rg.graph().edges()) {
    const Grid::EdgeLayout& lay = rg.edge(e.id);
    std::vector<double> ue(static_cast<std::size_t>(lay.cells) + 1), we(static_cast<std::size_t>(lay.cells));
    for (int j = 0; j <= lay.cells; ++j) {
      const int dof = rg.phi_index(e.id, j);
      ue[static_cast<std::size_t>(j)] = dof >= 0 ? state.u.values[dof] : 0.0;
    }
    for (int j = 0; j < lay.cells; ++j) we[static_cast<std::size_t>(j)] = state.w.values[rg.chi_index(e.id, j)];
    us.push_back(std::move(ue));
    ws.push_back(std::move(we));
  }
  auto phi_fn = [&](EdgeId e, double x) -> cplx {
    const auto k = static_cast<std::size_t>(e.value);
    return sp.alpha * cubic_interpolate<double>(us[k], 0.0, rg.edge(e).h, sp.lambda * x);
  };
  auto chi_fn = [&](EdgeId e, double x) -> cplx {
    const auto k = static_cast<std::size_t>(e.value);
    const double h = rg.edge(e).h;
    return chi_factor * cubic_interpolate<double>(ws[k], 0.5 * h, h, sp.lambda * x);
  };
  return {SpinorField::sample(target, phi_fn, chi_fn), omega};
}

double nlde_residual(const SpinorField& psi, double omega, const PhysParams& params) {
  params.validate();
  const HermitianOperator A = assemble_dirac(psi.grid, params);
  SpinorField r = A.apply(psi) - nonlinear_term(psi, params.p);
  r = r - cplx(omega) * psi;
  const Grid& g = *psi.grid;
  std::vector<bool> vertex_row(static_cast<std::size_t>(g.phi_size()), false);
  for (const Vertex& v : g.graph().vertices()) vertex_row[static_cast<std::size_t>(g.vertex_dof(v.id))] = true;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < r.phi.size(); ++i)
    if (!vertex_row[static_cast<std::size_t>(i)]) worst = std::max(worst, std::abs(r.phi[i]));
  for (Eigen::Index i = 0; i < r.chi.size(); ++i) worst = std::max(worst, std::abs(r.chi[i]));
  for (const VertexResidual& vr : vertex_residuals(psi, g.graph()))
    worst = std::max(worst, std::abs(vr.kirchhoff_sum));
  return worst;
}

double action_value(const SpinorField& psi, double omega, const HermitianOperator& A, double p) {
  const double mass = l2_norm(psi);
  return energy(psi, A, p) - 0.5 * omega * mass * mass;
}

std::vector<BranchRow> branch_rows(const Branch& branch, const PhysParams& params) {
  std::vector<BranchRow> rows;
  for (const BranchPoint& pt : branch.points) {
    const RescaledState& s = pt.state;
    BranchRow row{s.eps, params.m - s.eps,
                  s.u.values.size() ? s.u.values.cwiseAbs().maxCoeff() : 0.0,
                  s.w.values.size() ? s.w.values.cwiseAbs().maxCoeff() : 0.0,
                  NAN, NAN, pt.newton_iters, pt.min_singular_value, pt.residual_norm};
    if (s.eps > 0.0) {
      const PhysicalStandingWave sw = scale_to_physical(s, params);
      const double norm = l2_norm(sw.psi);
      row.l2_physical_mass = norm * norm;
      row.action = action_value(sw.psi, sw.omega, assemble_dirac(sw.psi.grid, params), params.p);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_branch_csv(std::ostream& os, const std::vector<BranchRow>& rows) {
  csv::row(os, {"eps", "omega", "sup_u", "sup_w", "l2_physical_mass", "action", "newton_iters",
                "min_singular_value", "residual_norm"});
  for (const BranchRow& r : rows) {
    const std::string a = csv::num(r.eps), b = csv::num(r.omega), c = csv::num(r.sup_u),
                      d = csv::num(r.sup_w), e = csv::num(r.l2_physical_mass),
                      f = csv::num(r.action), g = std::to_string(r.newton_iters),
                      h = csv::num(r.min_singular_value), i = csv::num(r.residual_norm);
    csv::row(os, {a, b, c, d, e, f, g, h, i});
  }
}

}  // namespace nldg
