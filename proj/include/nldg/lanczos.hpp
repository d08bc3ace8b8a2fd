#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace nldg {

/// y = Op x for a Hermitian linear map.
using HermitianMap = std::function<void(const Eigen::VectorXcd& x, Eigen::VectorXcd& y)>;

struct LanczosResult {
  std::vector<double> values;  ///< sorted by decreasing magnitude
  int iterations = 0;
};

/// Largest-magnitude eigenvalues of a Hermitian map by Lanczos with full
/// reorthogonalization. A Ritz value is accepted when its residual bound is
/// below rtol * |value|. Throws ConvergenceError if max_dim is reached first.
LanczosResult lanczos_largest(const HermitianMap& op, int n, int count, double rtol,
                              int max_dim = 400, std::uint64_t seed = 0x5eed);

}  // namespace nldg
