#include "nldg/soliton.hpp"

#include <cmath>

#include "nldg/errors.hpp"

namespace nldg {

void SolitonSpec::validate() const {
  if (!(p > 2.0)) throw ParameterError("soliton: p must exceed 2");
  if (!(m > 0.0)) throw ParameterError("soliton: m must be positive");
  if (N < 2) throw ParameterError("soliton: N must be at least 2");
  if (!(shift >= 0.0)) throw ParameterError("soliton: shift must be nonnegative");
  if (N % 2 == 1 && shift != 0.0)
    throw ParameterError("soliton: odd N admits only the unshifted solution (shift = 0)");
}

double SolitonSpec::c_p() const { return std::pow(0.5 * p, 1.0 / (p - 2.0)); }
double SolitonSpec::gamma_p() const { return 2.0 / (p - 2.0); }
double SolitonSpec::delta() const { return std::sqrt(2.0 * m) / gamma_p(); }

double soliton_profile(const SolitonSpec& spec, double t) {
  const double d = spec.delta();
  return spec.c_p() * std::pow(1.0 / std::cosh(d * t), spec.gamma_p());
}

double soliton_profile_d1(const SolitonSpec& spec, double t) {
  const double d = spec.delta();
  return -d * spec.gamma_p() * std::tanh(d * t) * soliton_profile(spec, t);
}

double soliton_profile_d2(const SolitonSpec& spec, double t) {
  // phi' = -d g tanh(d t) phi  =>  phi'' = d^2 g (g tanh^2 - sech^2) phi.
  const double d = spec.delta();
  const double g = spec.gamma_p();
  const double th = std::tanh(d * t);
  return d * d * g * (g * th * th - (1.0 - th * th)) * soliton_profile(spec, t);
}

namespace {

double edge_offset(const SolitonSpec& spec, EdgeId edge) {
  spec.validate();
  if (edge.value < 0 || edge.value >= spec.N) throw LookupError("soliton: edge index out of range");
  if (spec.N % 2 == 1) return 0.0;
  return edge.value < spec.N / 2 ? -spec.shift : spec.shift;
}

}  // namespace

double soliton_eval(const SolitonSpec& spec, EdgeId edge, double x) {
  return soliton_profile(spec, x + edge_offset(spec, edge));
}

double soliton_eval_d1(const SolitonSpec& spec, EdgeId edge, double x) {
  return soliton_profile_d1(spec, x + edge_offset(spec, edge));
}

double soliton_eval_d2(const SolitonSpec& spec, EdgeId edge, double x) {
  return soliton_profile_d2(spec, x + edge_offset(spec, edge));
}

}  // namespace nldg
