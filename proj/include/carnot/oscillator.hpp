#pragma once

#include <vector>

#include "carnot/diffops.hpp"
#include "carnot/fields.hpp"
#include "carnot/group.hpp"
#include "carnot/nets.hpp"

namespace carnot {

// The tensor-power map exp(x) -> (+)_r x^{tensor r} / r!, with duplicate
// tensor coordinates collapsed: one component x^mu / mu! per monomial mu of
// degree 1..s. The component count equals the ordered-word count, so the
// derivative family is square and its wedge norm is an exact determinant.
struct VeroneseMap {
  PolynomialMap<Rational> map;
  std::vector<std::vector<std::uint8_t>> powers;  // exponent vector per component
};

VeroneseMap veronese_map(const GroupOps& ops);

// |/\_W W phi(p)| over the full ordered-word family, exactly, for the pure
// Veronese map at a rational point.
Rational veronese_wedge_exact(const GroupOps& ops, const VeroneseMap& vm,
                              const std::vector<Rational>& p);

// smooth radial profile: 1 on [0, 1.1], 0 on [1.45, inf)
double cutoff_profile(double t);
// eta(p) = profile(smooth_gauge(p)); identically 1 on the unit gauge ball,
// vanishing outside the 1.5 ball
double cutoff_eta(const GroupOps& ops, const std::vector<double>& p);

// One pasted oscillating map: per color a, the sum over net translates g of
// eta(g^{-1} p) phi0(g^{-1} p), supports disjoint within a color.
class OscillatorMap {
 public:
  OscillatorMap(const GroupOps& ops, VeroneseMap vm, std::vector<std::vector<std::vector<double>>>
                                                         translates_per_color);

  int dim() const { return n_colors_ * comps_; }
  int colors() const { return n_colors_; }
  int components_per_color() const { return comps_; }

  std::vector<double> operator()(const std::vector<double>& p) const;
  MapFn as_fn() const {
    return [this](const std::vector<double>& p) { return (*this)(p); };
  }

 private:
  const GroupOps* ops_;
  PolynomialMap<double> veronese_d_;
  int comps_;
  int n_colors_;
  std::vector<std::vector<std::vector<double>>> translates_;  // [color][piece] = g
};

// Pastes the Veronese map over a coloring of a maximal 1-net (taken in the
// smooth-gauge metric so the cutoff and the net agree about balls).
OscillatorMap paste_oscillator(const GroupOps& ops, const Net& unit_net, const Coloring& coloring);

// Finite-difference wedge of {W phi(p)} over the ordered-word family.
double wedge_lower_bound_numeric(const GroupOps& ops, const MapFn& f,
                                 const std::vector<double>& p, double h,
                                 bool richardson = true);

}  // namespace carnot
