#pragma once

// Small seeded generators for property tests.

#include <complex>
#include <cstdint>
#include <random>

#include "nldg/fields.hpp"
#include "nldg/grid.hpp"

namespace gen {

using nldg::cplx;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  cplx complex(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

  Eigen::VectorXcd vector(Eigen::Index n) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = complex();
    return v;
  }

  /// Star grid with 2..6 edges, length 4..12 and 40..120 cells per edge.
  nldg::GridPtr star_grid(nldg::FarEnd far = nldg::FarEnd::kHardWall) {
    const int N = integer(2, 6);
    const double L = uniform(4.0, 12.0);
    const int cells = integer(40, 120);
    return nldg::make_star_grid({N, L}, L / cells, far);
  }

  /// Arbitrary (non-smooth) spinor with random entries.
  nldg::SpinorField noise(nldg::GridPtr g) {
    nldg::SpinorField f = nldg::SpinorField::zeros(g);
    f.phi = vector(f.phi.size());
    f.chi = vector(f.chi.size());
    return f;
  }

  /// Smooth decaying spinor: a random Gaussian bump per edge and component.
  nldg::SpinorField bumps(nldg::GridPtr g) {
    const int ne = g->graph().edge_count();
    std::vector<cplx> a(2 * ne);
    std::vector<double> x0(2 * ne), w(2 * ne);
    for (int i = 0; i < 2 * ne; ++i) {
      a[i] = complex();
      x0[i] = uniform(0.5, 2.5);
      w[i] = uniform(0.6, 1.4);
    }
    auto f = [&](int i, double x) {
      const double s = (x - x0[i]) / w[i];
      return a[i] * std::exp(-s * s);
    };
    return nldg::SpinorField::sample(
        g, [&](nldg::EdgeId e, double x) { return f(e.value, x); },
        [&](nldg::EdgeId e, double x) { return f(ne + e.value, x); });
  }

 private:
  std::mt19937_64 eng_;
};

/// Runs `body` for `cases` seeds.
template <class F>
void for_seeds(int cases, F&& body) {
  for (int s = 0; s < cases; ++s) {
    Rng rng(0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(s + 1));
    body(rng);
  }
}

}  // namespace gen
