#include "nldg/fields.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "nldg/csv.hpp"
#include "nldg/errors.hpp"

namespace nldg {

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (!a || !b || !a->structurally_equal(*b)) throw DimensionError("fields live on different grids");
}

namespace {

void check_sizes(const SpinorField& f) {
  if (!f.grid) throw DimensionError("field has no grid");
  if (f.phi.size() != f.grid->phi_size() || f.chi.size() != f.grid->chi_size())
    throw DimensionError("field size does not match its grid");
}

template <class Scalar>
void check_sizes(const ScalarField<Scalar>& f) {
  if (!f.grid) throw DimensionError("field has no grid");
  const int n = f.kind == NodeKind::kInteger ? f.grid->phi_size() : f.grid->chi_size();
  if (f.values.size() != n) throw DimensionError("field size does not match its grid");
}

template <class Scalar>
double scalar_norm(const ScalarField<Scalar>& f) {
  check_sizes(f);
  const Eigen::VectorXd& w =
      f.kind == NodeKind::kInteger ? f.grid->phi_weights() : f.grid->chi_weights();
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.values.size(); ++i) s += w[i] * std::norm(f.values[i]);
  return std::sqrt(s);
}

}  // namespace

SpinorField SpinorField::zeros(GridPtr grid) {
  SpinorField f{grid, Eigen::VectorXcd::Zero(grid->phi_size()),
                Eigen::VectorXcd::Zero(grid->chi_size())};
  return f;
}

SpinorField SpinorField::sample(GridPtr grid, const std::function<cplx(EdgeId, double)>& phi,
                                const std::function<cplx(EdgeId, double)>& chi) {
  SpinorField f = zeros(grid);
  std::vector<bool> seen(static_cast<std::size_t>(grid->phi_size()), false);
  for (const Edge& e : grid->graph().edges()) {
    const Grid::EdgeLayout& lay = grid->edge(e.id);
    for (int j = 0; j <= lay.cells; ++j) {
      const int dof = grid->phi_index(e.id, j);
      if (dof < 0 || seen[static_cast<std::size_t>(dof)]) continue;
      seen[static_cast<std::size_t>(dof)] = true;
      f.phi[dof] = phi(e.id, j * lay.h);
    }
    for (int j = 0; j < lay.cells; ++j) f.chi[grid->chi_index(e.id, j)] = chi(e.id, (j + 0.5) * lay.h);
  }
  return f;
}

Eigen::VectorXcd SpinorField::stacked() const {
  Eigen::VectorXcd v(phi.size() + chi.size());
  v << phi, chi;
  return v;
}

SpinorField SpinorField::from_stacked(GridPtr grid, const Eigen::VectorXcd& v) {
  if (v.size() != grid->size()) throw DimensionError("stacked vector size mismatch");
  return SpinorField{grid, v.head(grid->phi_size()), v.tail(grid->chi_size())};
}

Eigen::VectorXcd SpinorField::orthonormal() const {
  check_sizes(*this);
  Eigen::VectorXcd v(grid->size());
  v.head(grid->phi_size()) = phi.cwiseProduct(grid->phi_weights().cwiseSqrt().cast<cplx>());
  v.tail(grid->chi_size()) = chi.cwiseProduct(grid->chi_weights().cwiseSqrt().cast<cplx>());
  return v;
}

SpinorField SpinorField::from_orthonormal(GridPtr grid, const Eigen::VectorXcd& v) {
  if (v.size() != grid->size()) throw DimensionError("orthonormal vector size mismatch");
  SpinorField f{grid, v.head(grid->phi_size()), v.tail(grid->chi_size())};
  f.phi = f.phi.cwiseQuotient(grid->phi_weights().cwiseSqrt().cast<cplx>());
  f.chi = f.chi.cwiseQuotient(grid->chi_weights().cwiseSqrt().cast<cplx>());
  return f;
}

SpinorField& SpinorField::operator+=(const SpinorField& o) {
  require_same_grid(grid, o.grid);
  phi += o.phi;
  chi += o.chi;
  return *this;
}

SpinorField& SpinorField::operator*=(cplx a) {
  phi *= a;
  chi *= a;
  return *this;
}

SpinorField operator-(SpinorField a, const SpinorField& b) {
  require_same_grid(a.grid, b.grid);
  a.phi -= b.phi;
  a.chi -= b.chi;
  return a;
}

bool SpinorField::all_finite() const { return phi.allFinite() && chi.allFinite(); }

double l2_norm(const SpinorField& f) {
  check_sizes(f);
  return f.orthonormal().norm();
}

double l2_norm(const RealField& f) { return scalar_norm(f); }
double l2_norm(const ComplexField& f) { return scalar_norm(f); }

cplx inner(const SpinorField& f, const SpinorField& g) {
  check_sizes(f);
  check_sizes(g);
  require_same_grid(f.grid, g.grid);
  return f.orthonormal().dot(g.orthonormal());
}

Eigen::VectorXd node_density(const Grid& grid, const Eigen::VectorXcd& phi,
                             const Eigen::VectorXcd& chi) {
  const auto& nodes = grid.nodes();
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes.size()));
  const auto& cells = grid.cells();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const double a = 0.5 * cells[c].h * std::norm(chi[static_cast<Eigen::Index>(c)]);
    rho[cells[c].near] += a;
    rho[cells[c].far] += a;
  }
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    rho[static_cast<Eigen::Index>(n)] /= nodes[n].weight;
    if (nodes[n].dof >= 0) rho[static_cast<Eigen::Index>(n)] += std::norm(phi[nodes[n].dof]);
  }
  return rho;
}

double lp_power_integral(const SpinorField& f, double p) {
  if (!(p > 2.0)) throw ParameterError("lp_power_integral requires p > 2");
  check_sizes(f);
  const Eigen::VectorXd rho = node_density(*f.grid, f.phi, f.chi);
  const auto& nodes = f.grid->nodes();
  double s = 0.0;
  for (std::size_t n = 0; n < nodes.size(); ++n)
    s += nodes[n].weight * std::pow(rho[static_cast<Eigen::Index>(n)], 0.5 * p);
  return s;
}

cplx chi_trace(const SpinorField& f, EdgeId e, bool at_head) {
  const Grid& g = *f.grid;
  const int M = g.edge(e).cells;
  if (at_head) return 0.5 * (3.0 * f.chi[g.chi_index(e, 0)] - f.chi[g.chi_index(e, 1)]);
  return 0.5 * (3.0 * f.chi[g.chi_index(e, M - 1)] - f.chi[g.chi_index(e, M - 2)]);
}

std::vector<VertexResidual> vertex_residuals(const SpinorField& f, const MetricGraph& graph) {
  check_sizes(f);
  std::vector<VertexResidual> out;
  for (const Vertex& v : graph.vertices()) {
    VertexResidual r{v.id, 0.0, {0.0, 0.0}};
    // Continuity: every incident edge reads the same shared unknown.
    const int dof = f.grid->vertex_dof(v.id);
    for (const Incidence& inc : v.incidences) {
      const Grid::EdgeLayout& lay = f.grid->edge(inc.edge);
      const int j = inc.sign > 0 ? 0 : lay.cells;
      const int edge_dof = f.grid->phi_index(inc.edge, j);
      r.continuity_max = std::max(r.continuity_max, std::abs(f.phi[edge_dof] - f.phi[dof]));
      const cplx trace = chi_trace(f, inc.edge, inc.sign > 0);
      r.kirchhoff_sum += static_cast<double>(inc.sign) * trace;
    }
    out.push_back(r);
  }
  return out;
}

cplx phi_at(const SpinorField& f, EdgeId e, int j) {
  const int dof = f.grid->phi_index(e, j);
  return dof < 0 ? cplx{0.0, 0.0} : f.phi[dof];
}

template <class Scalar>
Scalar cubic_interpolate(std::span<const Scalar> samples, double x0, double h, double x) {
  const auto n = static_cast<long>(samples.size());
  if (n == 0) return Scalar{};
  const double s = (x - x0) / h;
  if (s < -1.0 || s > static_cast<double>(n)) return Scalar{};
  if (n < 4) {
    const long k = std::clamp(static_cast<long>(std::lround(s)), 0L, n - 1);
    return samples[static_cast<std::size_t>(k)];
  }
  long k0 = static_cast<long>(std::floor(s)) - 1;
  k0 = std::clamp(k0, 0L, n - 4);
  Scalar acc{};
  for (long i = 0; i < 4; ++i) {
    double li = 1.0;
    for (long j = 0; j < 4; ++j) {
      if (j == i) continue;
      li *= (s - static_cast<double>(k0 + j)) / static_cast<double>(i - j);
    }
    acc += li * samples[static_cast<std::size_t>(k0 + i)];
  }
  return acc;
}

template double cubic_interpolate<double>(std::span<const double>, double, double, double);
template cplx cubic_interpolate<cplx>(std::span<const cplx>, double, double, double);

void write_field_csv(std::ostream& os, const SpinorField& f) {
  check_sizes(f);
  csv::row(os, {"edge_id", "node_kind", "x", "re_phi", "im_phi", "re_chi", "im_chi"});
  const std::string nan = "nan";
  for (const Edge& e : f.grid->graph().edges()) {
    const Grid::EdgeLayout& lay = f.grid->edge(e.id);
    const std::string id = std::to_string(e.id.value);
    for (int j = 0; j <= lay.cells; ++j) {
      const cplx v = phi_at(f, e.id, j);
      csv::row(os, {id, "int", csv::num(j * lay.h), csv::num(v.real()), csv::num(v.imag()), nan, nan});
    }
    for (int j = 0; j < lay.cells; ++j) {
      const cplx v = f.chi[f.grid->chi_index(e.id, j)];
      csv::row(os, {id, "half", csv::num((j + 0.5) * lay.h), nan, nan, csv::num(v.real()),
                    csv::num(v.imag())});
    }
  }
}

}  // namespace nldg
