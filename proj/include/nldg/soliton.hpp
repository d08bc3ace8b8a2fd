#pragma once

#include "nldg/graph.hpp"

namespace nldg {

/// Positive solutions of u''/(2m) + |u|^{p-2} u = u on an N-star built from
/// the line soliton phi(t) = c_p sech^{gamma_p}(delta t).
struct SolitonSpec {
  double p = 4.0;
  double m = 0.5;
  int N = 3;
  double shift = 0.0;  ///< a >= 0; must be 0 for odd N

  void validate() const;
  double c_p() const;
  double gamma_p() const;
  double delta() const;
};

/// Line soliton phi(t) and its first two derivatives.
double soliton_profile(const SolitonSpec& spec, double t);
double soliton_profile_d1(const SolitonSpec& spec, double t);
double soliton_profile_d2(const SolitonSpec& spec, double t);

/// U_e(x): phi(x - a) on edges 0..N/2-1 and phi(x + a) on the rest (N even),
/// phi(x) on every edge (N odd). Edge index is 0-based.
double soliton_eval(const SolitonSpec& spec, EdgeId edge, double x);
double soliton_eval_d1(const SolitonSpec& spec, EdgeId edge, double x);
double soliton_eval_d2(const SolitonSpec& spec, EdgeId edge, double x);

}  // namespace nldg
