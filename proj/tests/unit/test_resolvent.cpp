#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "gen.hpp"
#include "nldg/errors.hpp"
#include "nldg/operators.hpp"
#include "nldg/resolvent.hpp"

using namespace nldg;

namespace {

const cplx kI(0.0, 1.0);

double block_diff(const Block2& a, const Block2& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Smooth data with distinct bumps on each edge and component.
SpinorField edge_data(GridPtr g) {
  return SpinorField::sample(
      g, [](EdgeId e, double x) { return cplx(1.0 + e.value, 0.5) * std::exp(-(x - 1.0) * (x - 1.0)); },
      [](EdgeId e, double x) { return cplx(0.3, -0.2 * e.value) * std::exp(-(x - 2.0) * (x - 2.0)); });
}

SpinorField symmetric_data(GridPtr g) {
  return SpinorField::sample(
      g, [](EdgeId, double x) { return cplx(1.0, 0.25) * std::exp(-(x - 1.0) * (x - 1.0)); },
      [](EdgeId, double x) { return cplx(-0.4, 0.1) * x * std::exp(-x * x); });
}

}  // namespace

TEST_CASE("lambda_of_k examples") {
  CHECK(std::abs(lambda_of_k(kI, 1.0) - kI * std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(lambda_of_k(0.0, 1.0) - kI) < 1e-15);
  CHECK(std::abs(lambda_of_k(2.0 * kI, 0.0) - 2.0 * kI) < 1e-15);
  CHECK(std::abs(lambda_of_k(0.5, 1.0) - kI * std::sqrt(0.75)) < 1e-15);
}

TEST_CASE("lambda_of_k errors") {
  CHECK_THROWS_AS(lambda_of_k(1.0, 1.0), DegenerateQueryError);
  CHECK_THROWS_AS(lambda_of_k(-2.0, 2.0), DegenerateQueryError);
  CHECK_THROWS_AS(make_query(1.0, 1.0), DegenerateQueryError);
  CHECK_THROWS_AS(lambda_of_k(2.0, 1.0), ParameterError);
  CHECK_THROWS_AS(lambda_of_k(kI, -1.0), ParameterError);
}

TEST_CASE("property: lambda_of_k has positive imaginary part and round-trips") {
  gen::for_seeds(200, [](gen::Rng& rng) {
    const cplx k(rng.uniform(-3.0, 3.0), rng.uniform(0.05, 3.0) * (rng.integer(0, 1) ? 1.0 : -1.0));
    const double m = rng.uniform(0.0, 2.0);
    const cplx l = lambda_of_k(k, m);
    CHECK(l.imag() > 0.0);
    CHECK(std::abs(l * l + m * m - k * k) < 1e-12 * std::max(1.0, std::norm(k)));
    const ResolventQuery q = make_query(k, m);
    CHECK(q.lambda == l);
    CHECK(std::abs(m + k + l) > 0.0);
    CHECK(std::abs(m - k - l) > 0.0);
  });
}

TEST_CASE("line_green examples") {
  const ResolventQuery q = make_query(cplx(1.0, 0.5), 1.0);
  const Block2 d = line_green(0.7, 0.7, q);
  const cplx pre = kI / (2.0 * q.lambda);
  CHECK(std::abs(d(0, 0) - pre * (q.m + q.k)) < 1e-15);
  CHECK(std::abs(d(1, 1) - pre * (-q.m + q.k)) < 1e-15);
  CHECK(d(0, 1) == cplx(0.0));
  CHECK(d(1, 0) == cplx(0.0));

  gen::for_seeds(50, [&](gen::Rng& rng) {
    const double x = rng.uniform(-5.0, 5.0), y = rng.uniform(-5.0, 5.0);
    const Block2 a = line_green(x, y, q), b = line_green(y, x, q);
    CHECK(std::abs(a(0, 0) - b(0, 0)) < 1e-15);
    CHECK(std::abs(a(1, 1) - b(1, 1)) < 1e-15);
    CHECK(std::abs(a(0, 1) + b(0, 1)) < 1e-15);
    CHECK(std::abs(a(1, 0) + b(1, 0)) < 1e-15);
  });

  double prev = INFINITY;
  for (double r : {1.0, 5.0, 10.0, 20.0, 40.0}) {
    const double n = line_green(r, 0.0, q).norm();
    CHECK(n < prev);
    prev = n;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("line_green is the Green's function of the free Dirac operator") {
  // -i sigma_1 d/dx + m sigma_3 - k applied in x annihilates G away from x = y.
  const ResolventQuery q = make_query(cplx(0.3, 0.8), 1.0);
  Block2 s1, s3;
  s1 << 0, 1, 1, 0;
  s3 << 1, 0, 0, -1;
  for (double x : {-2.0, 0.5, 3.0}) {
    const double y = 1.0, d = 1e-5;
    const Block2 dx = (line_green(x + d, y, q) - line_green(x - d, y, q)) / (2.0 * d);
    const Block2 r = -kI * s1 * dx + (q.m * s3 - q.k * Block2::Identity()) * line_green(x, y, q);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-8);
  }
  // Jump of -i sigma_1 G across x = y is the identity.
  const Block2 jump = -kI * s1 * (line_green(1.0 + 1e-12, 1.0, q) - line_green(1.0 - 1e-12, 1.0, q));
  CHECK(block_diff(jump, Block2::Identity()) < 1e-10);
}

TEST_CASE("star3_kernel: free part dominates far from the vertex") {
  const ResolventQuery q = make_query(cplx(1.0, 0.5), 1.0);
  const double tol = 10.0 * std::exp(-2.0 * q.lambda.imag() * 15.0);
  for (int e = 0; e < 3; ++e) {
    CHECK(block_diff(star3_kernel(15.0, e, 15.0, e, q), line_green(15.0, 15.0, q)) < tol);
    CHECK(star3_kernel(15.0, e, 15.0, (e + 1) % 3, q).cwiseAbs().maxCoeff() < tol);
  }
  double prev = INFINITY;
  for (double s : {0.0, 2.0, 5.0, 10.0, 20.0}) {
    const double n = (star3_kernel(s, 0, s, 1, q)).norm();
    CHECK(n < prev);
    prev = n;
  }
}

TEST_CASE("property: star3_kernel is invariant under edge permutations") {
  const ResolventQuery q = make_query(cplx(0.7, 0.4), 1.3);
  std::array<int, 3> perm{0, 1, 2};
  gen::Rng rng(3);
  do {
    for (int trial = 0; trial < 10; ++trial) {
      const double x = rng.uniform(0.0, 4.0), y = rng.uniform(0.0, 4.0);
      for (int e = 0; e < 3; ++e)
        for (int f = 0; f < 3; ++f)
          CHECK(block_diff(star3_kernel(x, e, y, f, q), star3_kernel(x, perm[e], y, perm[f], q)) < 1e-14);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("star3_kernel rejects invalid edges") {
  const ResolventQuery q = make_query(kI, 1.0);
  CHECK_THROWS_AS(star3_kernel(1.0, 3, 1.0, 0, q), LookupError);
  CHECK_THROWS_AS(star3_kernel(1.0, 0, 1.0, -1, q), LookupError);
}

TEST_CASE("correction coefficients") {
  const GridPtr g = make_star_grid({3, 15.0}, 0.05);
  const ResolventQuery q = make_query(cplx(1.0, 0.5), 1.0);
  for (cplx a : correction_coefficients(SpinorField::zeros(g), q)) CHECK(a == cplx(0.0));

  const auto sym = correction_coefficients(symmetric_data(g), q);
  CHECK(std::abs(sym[0] - sym[1]) < 1e-13 * std::abs(sym[0]));
  CHECK(std::abs(sym[0] - sym[2]) < 1e-13 * std::abs(sym[0]));
  CHECK(std::abs(sym[0]) > 0.0);

  // With the sign of the last term flipped the bracket no longer cancels
  // for symmetric data: the coefficients stay equal but shift by 2 P / den.
  const auto flipped_sym = correction_coefficients(symmetric_data(g), q, true);
  CHECK(std::abs(flipped_sym[0] - flipped_sym[1]) < 1e-13 * std::abs(flipped_sym[0]));
  CHECK(std::abs(flipped_sym[0] - sym[0]) > 1e-3);
  const auto a = correction_coefficients(edge_data(g), q);
  const auto b = correction_coefficients(edge_data(g), q, true);
  double gap = 0.0;
  for (int e = 0; e < 3; ++e) gap = std::max(gap, std::abs(a[e] - b[e]));
  CHECK(gap > 1e-3);
}

TEST_CASE("apply_kernel: zero data and agreement with the ansatz") {
  const GridPtr g = make_star_grid({3, 15.0}, 0.05);
  const ResolventQuery q = make_query(cplx(1.0, 0.5), 1.0);
  const KernelApplication z = apply_kernel(SpinorField::zeros(g), q);
  CHECK(l2_norm(z.value) == 0.0);
  CHECK(z.continuity_gap == 0.0);

  const SpinorField psi = edge_data(g);
  const KernelApplication quad = apply_kernel(psi, q);
  const KernelApplication ans = apply_kernel_ansatz(psi, q);
  CHECK(l2_norm(quad.value - ans.value) <= 1e-8 * l2_norm(quad.value));
}

TEST_CASE("apply_kernel inverts D - k and matches the shifted solve") {
  const PhysParams pp{1.0, 1.0, 4.0};
  const cplx k(1.0, 0.5);
  const ResolventQuery q = make_query(k, pp.m);
  std::vector<double> vs_solve, gap;
  for (double h : {0.1, 0.05}) {
    const GridPtr g = make_star_grid({3, 20.0}, h);
    const SpinorField psi = edge_data(g);
    const HermitianOperator D = assemble_dirac(g, pp);
    const KernelApplication r = apply_kernel(psi, q);
    const SpinorField direct = shifted_solve(D, k, psi);
    vs_solve.push_back(l2_norm(r.value - direct) / l2_norm(direct));
    gap.push_back(r.continuity_gap);
    CHECK(l2_norm(D.apply(r.value) - k * r.value - psi) / l2_norm(psi) < 1e-2);
  }
  CHECK(vs_solve[0] < 1e-2);
  CHECK(vs_solve[1] < vs_solve[0]);
  CHECK(gap[1] < gap[0]);
}

TEST_CASE("apply_kernel negative controls") {
  const PhysParams pp{1.0, 1.0, 4.0};
  const cplx k(1.0, 0.5);
  const ResolventQuery q = make_query(k, pp.m);
  const GridPtr g = make_star_grid({3, 20.0}, 0.05);
  const SpinorField psi = edge_data(g);
  const SpinorField direct = shifted_solve(assemble_dirac(g, pp), k, psi);
  auto err = [&](const KernelOptions& o) { return l2_norm(apply_kernel(psi, q, o).value - direct) / l2_norm(direct); };
  const double good = err({});
  CHECK(good < 1e-3);
  CHECK(err({KernelForm::kDerived, 1.5}) > 100.0 * good);
  CHECK(err({KernelForm::kThreeMatrix, 1.0}) > 10.0 * good);
}

TEST_CASE("apply_kernel requires the 3-star") {
  const ResolventQuery q = make_query(kI, 1.0);
  CHECK_THROWS_AS(apply_kernel(SpinorField::zeros(make_star_grid({4, 5.0}, 0.1)), q), TopologyError);
}

TEST_CASE("kernel samples CSV schema") {
  const ResolventQuery q = make_query(cplx(1.0, 0.5), 1.0);
  std::ostringstream os;
  write_kernel_samples(os, {{0.5, 0, 1.0, 2}, {2.0, 1, 2.0, 1}}, q);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "x,e,y,f,re11,im11,re12,im12,re21,im21,re22,im22");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 11);
  }
  CHECK(rows == 2);
}
