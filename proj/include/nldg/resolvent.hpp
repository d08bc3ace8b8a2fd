#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "nldg/fields.hpp"

namespace nldg {

using Block2 = Eigen::Matrix2cd;

/// k with k^2 = m^2 + lambda^2, Im lambda > 0.
struct ResolventQuery {
  cplx k;
  double m = 1.0;
  cplx lambda;
};

/// Principal root with Im lambda > 0. Throws DegenerateQueryError for k = +-m
/// and ParameterError when k lies on the continuous spectrum.
cplx lambda_of_k(cplx k, double m);
ResolventQuery make_query(cplx k, double m);

/// Free Dirac Green's function on the line (c = 1), sign(0) = 0.
Block2 line_green(double x, double y, const ResolventQuery& q);

enum class KernelForm {
  kDerived,      ///< correction (i/(6 lambda)) e^{i lambda (x+y)} (2 - 3 delta_ef) Q
  kThreeMatrix,  ///< sum of three separate correction matrices B1 + B2 + B3
};

struct KernelOptions {
  KernelForm form = KernelForm::kDerived;
  /// Multiplies the whole correction (derived form) or B2 (three-matrix
  /// form). Anything other than 1 is a negative control.
  double correction_scale = 1.0;
};

/// (e, f) block of the resolvent kernel of the 3-star, x on edge e, y on edge f.
/// Edge indices are 0-based.
Block2 star3_kernel(double x, int e, double y, int f, const ResolventQuery& q,
                    const KernelOptions& options = {});

/// alpha_e of the ansatz (R psi)_e = free part + (i/2 lambda) e^{i lambda x}
/// [[m+k, lambda], [lambda, k-m]] (alpha_e, alpha_e). `flip_last_sign` flips the
/// sign of the last term, which breaks the vertex conditions for any nonzero
/// data.
std::array<cplx, 3> correction_coefficients(const SpinorField& psi, const ResolventQuery& q,
                                            bool flip_last_sign = false);

struct KernelApplication {
  SpinorField value;
  double continuity_gap = 0.0;  ///< spread of the per-edge phi values at the vertex
};

/// Direct quadrature of the kernel against psi: phi output on integer nodes,
/// chi output on half nodes. Trapezoid in y for phi, midpoint for chi.
KernelApplication apply_kernel(const SpinorField& psi, const ResolventQuery& q,
                               const KernelOptions& options = {});

/// Same operator through the free part plus the alpha-coefficient ansatz.
KernelApplication apply_kernel_ansatz(const SpinorField& psi, const ResolventQuery& q);

/// x,e,y,f,re11,im11,re12,im12,re21,im21,re22,im22
struct KernelSample {
  double x;
  int e;
  double y;
  int f;
};
void write_kernel_samples(std::ostream& os, const std::vector<KernelSample>& samples,
                          const ResolventQuery& q, const KernelOptions& options = {});

}  // namespace nldg
