#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "carnot/algebra.hpp"
#include "carnot/polynomial.hpp"

namespace carnot {

// Group arithmetic in exponential coordinates. The BCH group law is built
// symbolically once per algebra (the Dynkin series truncated at word length s,
// exact because the algebra is nilpotent); evaluation then runs in either
// exact-rational or double mode.
class GroupOps {
 public:
  explicit GroupOps(StratifiedAlgebra alg);

  const StratifiedAlgebra& algebra() const { return alg_; }
  int dim() const { return alg_.dim(); }
  int step() const { return alg_.step(); }
  int hdim() const { return alg_.hdim(); }
  int k1() const { return alg_.stratum_dim(1); }

  // z(x, y) in 2n variables: x_0..x_{n-1}, y_0..y_{n-1}
  const PolynomialMap<Rational>& law() const { return law_; }

  // Coefficient polynomials of the left-invariant field X_e: component j is
  // the coefficient of d/dx_j, a homogeneous polynomial of weighted degree
  // weight(j) - weight(e) (zero below, one on the diagonal).
  const PolynomialMap<Rational>& field_coeffs(int e) const { return field_[e]; }

  template <class S>
  std::vector<S> identity() const {
    return std::vector<S>(alg_.dim(), S(0));
  }

  template <class S>
  std::vector<S> product(const std::vector<S>& x, const std::vector<S>& y) const {
    check_point(x);
    check_point(y);
    std::vector<S> xy;
    xy.reserve(2 * alg_.dim());
    xy.insert(xy.end(), x.begin(), x.end());
    xy.insert(xy.end(), y.begin(), y.end());
    if constexpr (std::is_same_v<S, double>)
      return law_d_.eval(xy);
    else
      return law_.eval(xy);
  }

  template <class S>
  std::vector<S> inverse(const std::vector<S>& x) const {
    check_point(x);
    std::vector<S> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = S(0) - x[i];
    return out;
  }

  template <class S>
  std::vector<S> dilate(const S& lambda, const std::vector<S>& x) const {
    if (!(lambda > S(0))) throw std::domain_error("dilate: lambda must be positive");
    check_point(x);
    std::vector<S> out(x.size());
    for (int e = 0; e < alg_.dim(); ++e) {
      S f(1);
      for (int w = 0; w < alg_.weight(e); ++w) f *= lambda;
      out[e] = f * x[e];
    }
    return out;
  }

  // N(p) = sum |x_{r,i}|^{1/r}
  double quasinorm(const std::vector<double>& x) const {
    check_point(x);
    double acc = 0.0;
    for (int e = 0; e < alg_.dim(); ++e)
      acc += std::pow(std::fabs(x[e]), 1.0 / alg_.weight(e));
    return acc;
  }

  double quasinorm(const std::vector<Rational>& x) const {
    std::vector<double> xd(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xd[i] = to_double(x[i]);
    return quasinorm(xd);
  }

  double quasimetric(const std::vector<double>& p, const std::vector<double>& q) const {
    return quasinorm(product(inverse(p), q));
  }

  // Smooth homogeneous gauge (sum_e |x_e|^{2 s! / r_e})^{1 / (2 s!)}; always
  // <= quasinorm, 1-homogeneous under dilations.
  double smooth_gauge(const std::vector<double>& x) const {
    check_point(x);
    double acc = 0.0;
    for (int e = 0; e < alg_.dim(); ++e) {
      double t = 1.0;
      const double a = std::fabs(x[e]);
      const int p = gauge_exp_ / alg_.weight(e);
      for (int q = 0; q < p; ++q) t *= a;
      acc += t;
    }
    return std::pow(acc, 1.0 / gauge_exp_);
  }

  double gauge_metric(const std::vector<double>& p, const std::vector<double>& q) const {
    return smooth_gauge(product(inverse(p), q));
  }

  // exp of a horizontal vector u in V_1
  std::vector<double> exp_horizontal(const std::vector<double>& u) const {
    std::vector<double> p(alg_.dim(), 0.0);
    for (int i = 0; i < k1(); ++i) p[i] = u[i];
    return p;
  }

  std::vector<double> basis_point(int e, double t) const {
    std::vector<double> p(alg_.dim(), 0.0);
    p[e] = t;
    return p;
  }

 private:
  template <class S>
  void check_point(const std::vector<S>& x) const {
    if (static_cast<int>(x.size()) != alg_.dim())
      throw std::invalid_argument("group point has wrong coordinate count");
  }

  StratifiedAlgebra alg_;
  PolynomialMap<Rational> law_;
  PolynomialMap<double> law_d_;
  std::vector<PolynomialMap<Rational>> field_;
  int gauge_exp_;  // 2 * s!
};

}  // namespace carnot
