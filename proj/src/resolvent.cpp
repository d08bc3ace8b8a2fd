#include "nldg/resolvent.hpp"

#include <cmath>
#include <ostream>

#include "nldg/csv.hpp"
#include "nldg/errors.hpp"

namespace nldg {

namespace {

constexpr cplx kI{0.0, 1.0};

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_three_star(const Grid& g) {
  if (!g.graph().is_star() || g.graph().edges().size() != 3)
    throw TopologyError("resolvent kernel is only available on the 3-star");
}

/// Per-edge quadrature data of a field.
struct EdgeSamples {
  std::vector<double> xn, wn;  ///< node positions and trapezoid weights
  std::vector<cplx> phi;
  std::vector<double> xc, wc;  ///< cell midpoints and widths
  std::vector<cplx> chi;
};

std::vector<EdgeSamples> edge_samples(const SpinorField& psi) {
  const Grid& g = *psi.grid;
  std::vector<EdgeSamples> out;
  for (const Edge& e : g.graph().edges()) {
    const Grid::EdgeLayout& lay = g.edge(e.id);
    EdgeSamples s;
    for (int j = 0; j <= lay.cells; ++j) {
      s.xn.push_back(j * lay.h);
      s.wn.push_back((j == 0 || j == lay.cells) ? 0.5 * lay.h : lay.h);
      s.phi.push_back(phi_at(psi, e.id, j));
    }
    for (int j = 0; j < lay.cells; ++j) {
      s.xc.push_back((j + 0.5) * lay.h);
      s.wc.push_back(lay.h);
      s.chi.push_back(psi.chi[g.chi_index(e.id, j)]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Collects per-edge phi values at the vertex into one shared value.
KernelApplication assemble_output(GridPtr grid, const std::vector<std::vector<cplx>>& phi_e,
                                  const std::vector<std::vector<cplx>>& chi_e) {
  const Grid& g = *grid;
  KernelApplication out{SpinorField::zeros(grid), 0.0};
  std::vector<cplx> at_vertex;
  for (const Edge& e : g.graph().edges()) {
    const auto k = static_cast<std::size_t>(e.id.value);
    const Grid::EdgeLayout& lay = g.edge(e.id);
    for (int j = 1; j <= lay.cells; ++j) {
      const int dof = g.phi_index(e.id, j);
      if (dof >= 0) out.value.phi[dof] = phi_e[k][static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < lay.cells; ++j)
      out.value.chi[g.chi_index(e.id, j)] = chi_e[k][static_cast<std::size_t>(j)];
    at_vertex.push_back(phi_e[k][0]);
  }
  cplx mean = 0.0;
  for (cplx v : at_vertex) mean += v;
  mean /= static_cast<double>(at_vertex.size());
  for (cplx a : at_vertex)
    for (cplx b : at_vertex) out.continuity_gap = std::max(out.continuity_gap, std::abs(a - b));
  out.value.phi[g.vertex_dof(g.graph().vertices().front().id)] = mean;
  return out;
}

}  // namespace

cplx lambda_of_k(cplx k, double m) {
  if (!(m >= 0.0)) throw ParameterError("lambda_of_k: m must be nonnegative");
  const cplx l2 = k * k - m * m;
  if (std::abs(l2) <= 1e-14 * std::max(1.0, m * m))
    throw DegenerateQueryError("lambda_of_k: k = +-m gives lambda = 0");
  cplx l = std::sqrt(l2);
  if (l.imag() < 0.0) l = -l;
  if (!(l.imag() > 0.0))
    throw ParameterError("lambda_of_k: k lies on the continuous spectrum (Im lambda = 0)");
  return l;
}

ResolventQuery make_query(cplx k, double m) {
  ResolventQuery q{k, m, lambda_of_k(k, m)};
  if (std::abs(m + k + q.lambda) < 1e-14 || std::abs(m - k - q.lambda) < 1e-14)
    throw DegenerateQueryError("make_query: m + k + lambda or m - k - lambda vanishes");
  return q;
}

Block2 line_green(double x, double y, const ResolventQuery& q) {
  const cplx l = q.lambda, k = q.k;
  const double m = q.m;
  const double s = sign_of(x - y);
  const cplx pre = kI / (2.0 * l) * std::exp(kI * l * std::abs(x - y));
  Block2 b;
  b << pre * (m + k), pre * l * s, pre * l * s, pre * (-m + k);
  return b;
}

Block2 star3_kernel(double x, int e, double y, int f, const ResolventQuery& q,
                    const KernelOptions& options) {
  if (e < 0 || e > 2 || f < 0 || f > 2) throw LookupError("star3_kernel: edge index must be 0, 1 or 2");
  const cplx l = q.lambda, k = q.k;
  const double m = q.m;
  Block2 b = e == f ? line_green(x, y, q) : Block2::Zero();
  const cplx ex = std::exp(kI * l * (x + y));
  const bool same = e == f;
  if (options.form == KernelForm::kDerived) {
    const cplx pre = options.correction_scale * kI * ex / (6.0 * l) * (same ? -1.0 : 2.0);
    Block2 Q;
    Q << m + k, -l, l, m - k;
    b += pre * Q;
    return b;
  }
  // Three-matrix form, rows (phi, chi) of edge e, columns of edge f.
  const cplx p1 = kI * ex * (m + k + l) / (6.0 * l * (m - k - l));
  const cplx p2 = -options.correction_scale * kI * ex / (6.0 * l);
  const cplx p3 = kI * ex * (k - m + l) / (6.0 * l * (m + k + l));
  const cplx a0 = same ? -2.0 * (m + k) : (m + k);
  const cplx a1 = same ? 2.0 * l : l;
  Block2 b1, b2, b3;
  b1 << -l, -m + k, 0.0, 0.0;
  b2 << a0, a1, -l, -m + k;
  b3 << 0.0, 0.0, a0, a1;
  b += p1 * b1 + p2 * b2 + p3 * b3;
  return b;
}

std::array<cplx, 3> correction_coefficients(const SpinorField& psi, const ResolventQuery& q,
                                            bool flip_last_sign) {
  require_three_star(*psi.grid);
  const cplx l = q.lambda, k = q.k;
  const double m = q.m;
  const auto samples = edge_samples(psi);
  std::array<cplx, 3> P{}, S{};
  for (std::size_t e = 0; e < 3; ++e) {
    const EdgeSamples& s = samples[e];
    for (std::size_t j = 0; j < s.xn.size(); ++j) {
      const cplx ph = s.wn[j] * std::exp(kI * l * s.xn[j]) * s.phi[j];
      P[e] += (m + k) * ph;
      S[e] += -l * ph;
    }
    for (std::size_t j = 0; j < s.xc.size(); ++j) {
      const cplx ch = s.wc[j] * std::exp(kI * l * s.xc[j]) * s.chi[j];
      P[e] += -l * ch;
      S[e] += (-m + k) * ch;
    }
  }
  const cplx sym = (S[0] + S[1] + S[2]) / (3.0 * (m - k - l));
  const cplx den = 3.0 * (m + k + l);
  std::array<cplx, 3> alpha{};
  for (int e = 0; e < 3; ++e) {
    const int f = (e + 1) % 3, g = (e + 2) % 3;
    // The vertex conditions require 2 P_e - P_f - P_g.
    const cplx last = flip_last_sign ? P[static_cast<std::size_t>(g)] : -P[static_cast<std::size_t>(g)];
    alpha[static_cast<std::size_t>(e)] =
        sym - (2.0 * P[static_cast<std::size_t>(e)] - P[static_cast<std::size_t>(f)] + last) / den;
  }
  return alpha;
}

KernelApplication apply_kernel(const SpinorField& psi, const ResolventQuery& q,
                               const KernelOptions& options) {
  require_three_star(*psi.grid);
  const auto in = edge_samples(psi);
  std::vector<std::vector<cplx>> phi_out(3), chi_out(3);
  for (int e = 0; e < 3; ++e) {
    const EdgeSamples& oe = in[static_cast<std::size_t>(e)];
    auto eval = [&](double x, int row) {
      cplx acc = 0.0;
      for (int f = 0; f < 3; ++f) {
        const EdgeSamples& s = in[static_cast<std::size_t>(f)];
        for (std::size_t j = 0; j < s.xn.size(); ++j)
          if (s.phi[j] != 0.0) acc += star3_kernel(x, e, s.xn[j], f, q, options)(row, 0) * s.wn[j] * s.phi[j];
        for (std::size_t j = 0; j < s.xc.size(); ++j)
          if (s.chi[j] != 0.0) acc += star3_kernel(x, e, s.xc[j], f, q, options)(row, 1) * s.wc[j] * s.chi[j];
      }
      return acc;
    };
    for (double x : oe.xn) phi_out[static_cast<std::size_t>(e)].push_back(eval(x, 0));
    for (double x : oe.xc) chi_out[static_cast<std::size_t>(e)].push_back(eval(x, 1));
  }
  return assemble_output(psi.grid, phi_out, chi_out);
}

KernelApplication apply_kernel_ansatz(const SpinorField& psi, const ResolventQuery& q) {
  require_three_star(*psi.grid);
  const auto alpha = correction_coefficients(psi, q);
  const cplx l = q.lambda, k = q.k;
  const double m = q.m;
  const auto in = edge_samples(psi);
  std::vector<std::vector<cplx>> phi_out(3), chi_out(3);
  for (int e = 0; e < 3; ++e) {
    const EdgeSamples& s = in[static_cast<std::size_t>(e)];
    const cplx a = alpha[static_cast<std::size_t>(e)];
    auto eval = [&](double x, int row) {
      cplx acc = 0.0;
      for (std::size_t j = 0; j < s.xn.size(); ++j)
        acc += line_green(x, s.xn[j], q)(row, 0) * s.wn[j] * s.phi[j];
      for (std::size_t j = 0; j < s.xc.size(); ++j)
        acc += line_green(x, s.xc[j], q)(row, 1) * s.wc[j] * s.chi[j];
      const cplx pre = kI / (2.0 * l) * std::exp(kI * l * x);
      acc += row == 0 ? pre * (m + k + l) * a : pre * (l - m + k) * a;
      return acc;
    };
    for (double x : s.xn) phi_out[static_cast<std::size_t>(e)].push_back(eval(x, 0));
    for (double x : s.xc) chi_out[static_cast<std::size_t>(e)].push_back(eval(x, 1));
  }
  return assemble_output(psi.grid, phi_out, chi_out);
}

void write_kernel_samples(std::ostream& os, const std::vector<KernelSample>& samples,
                          const ResolventQuery& q, const KernelOptions& options) {
  csv::row(os, {"x", "e", "y", "f", "re11", "im11", "re12", "im12", "re21", "im21", "re22", "im22"});
  for (const KernelSample& s : samples) {
    const Block2 b = star3_kernel(s.x, s.e, s.y, s.f, q, options);
    const std::string c[12] = {csv::num(s.x), std::to_string(s.e), csv::num(s.y), std::to_string(s.f),
                               csv::num(b(0, 0).real()), csv::num(b(0, 0).imag()),
                               csv::num(b(0, 1).real()), csv::num(b(0, 1).imag()),
                               csv::num(b(1, 0).real()), csv::num(b(1, 0).imag()),
                               csv::num(b(1, 1).real()), csv::num(b(1, 1).imag())};
    csv::row(os, {c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], c[8], c[9], c[10], c[11]});
  }
}

}  // namespace nldg
