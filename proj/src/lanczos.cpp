#include "nldg/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "nldg/errors.hpp"

namespace nldg {

LanczosResult lanczos_largest(const HermitianMap& op, int n, int count, double rtol, int max_dim,
                              std::uint64_t seed) {
  if (n <= 0 || count <= 0) throw ParameterError("lanczos needs n > 0 and count > 0");
  count = std::min(count, n);
  max_dim = std::min(max_dim, n);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd V(n, max_dim + 1);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = {gauss(rng), gauss(rng)};
  V.col(0) = v / v.norm();

  std::vector<double> alpha, beta;
  Eigen::VectorXcd w(n);
  double last_bound = INFINITY;

  for (int j = 0; j < max_dim; ++j) {
    op(V.col(j), w);
    const double a = V.col(j).dot(w).real();
    alpha.push_back(a);
    w -= a * V.col(j);
    if (j > 0) w -= beta.back() * V.col(j - 1);
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXcd proj = V.leftCols(j + 1).adjoint() * w;
      w -= V.leftCols(j + 1) * proj;
    }
    const double b = w.norm();

    const int m = j + 1;
    const bool exhausted = b <= 1e-14 * std::abs(a) || m == n;
    if (m >= count && (m % 4 == 0 || exhausted || m == max_dim)) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      std::vector<int> order(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
      std::sort(order.begin(), order.end(), [&](int x, int y) {
        return std::abs(es.eigenvalues()[x]) > std::abs(es.eigenvalues()[y]);
      });
      bool converged = true;
      last_bound = 0.0;
      for (int k = 0; k < count; ++k) {
        const int i = order[static_cast<std::size_t>(k)];
        const double theta = es.eigenvalues()[i];
        const double bound = b * std::abs(es.eigenvectors()(m - 1, i));
        last_bound = std::max(last_bound, bound / std::max(std::abs(theta), 1e-300));
        if (bound > rtol * std::abs(theta)) converged = false;
      }
      if (converged || exhausted) {
        LanczosResult r;
        r.iterations = m;
        for (int k = 0; k < count; ++k) r.values.push_back(es.eigenvalues()[order[static_cast<std::size_t>(k)]]);
        return r;
      }
    }
    beta.push_back(b);
    V.col(j + 1) = w / b;
  }
  throw ConvergenceError("lanczos did not converge", last_bound, max_dim);
}

}  // namespace nldg
