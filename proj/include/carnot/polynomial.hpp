#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "carnot/rational.hpp"

namespace carnot {

// Sparse multivariate polynomial. Terms live in an ordered map keyed by the
// exponent vector, which keeps printing, iteration, and hashing deterministic.
template <class S>
class Polynomial {
 public:
  using Monomial = std::vector<std::uint8_t>;

  Polynomial() : nvars_(0) {}
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, S c) {
    Polynomial p(nvars);
    if (!(c == S(0))) p.terms_.emplace(Monomial(nvars, 0), std::move(c));
    return p;
  }

  static Polynomial variable(int nvars, int v) {
    Polynomial p(nvars);
    Monomial m(nvars, 0);
    m[v] = 1;
    p.terms_.emplace(std::move(m), S(1));
    return p;
  }

  static Polynomial monomial(int nvars, Monomial m, S c) {
    Polynomial p(nvars);
    if (!(c == S(0))) p.terms_.emplace(std::move(m), std::move(c));
    return p;
  }

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const std::map<Monomial, S>& terms() const { return terms_; }

  S constant_term() const {
    auto it = terms_.find(Monomial(nvars_, 0));
    return it == terms_.end() ? S(0) : it->second;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_vars(o);
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    check_vars(o);
    for (const auto& [m, c] : o.terms_) add_term(m, S(0) - c);
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  Polynomial operator*(const Polynomial& o) const {
    check_vars(o);
    Polynomial out(nvars_);
    for (const auto& [ma, ca] : terms_)
      for (const auto& [mb, cb] : o.terms_) {
        Monomial m(nvars_);
        for (int i = 0; i < nvars_; ++i) m[i] = static_cast<std::uint8_t>(ma[i] + mb[i]);
        out.add_term(m, ca * cb);
      }
    return out;
  }

  Polynomial operator*(const S& c) const {
    Polynomial out(nvars_);
    if (c == S(0)) return out;
    for (const auto& [m, cc] : terms_) out.terms_.emplace(m, cc * c);
    return out;
  }

  Polynomial operator-() const { return (*this) * S(-1); }

  bool operator==(const Polynomial& o) const {
    return nvars_ == o.nvars_ && terms_ == o.terms_;
  }

  Polynomial derivative(int var) const {
    Polynomial out(nvars_);
    for (const auto& [m, c] : terms_) {
      if (m[var] == 0) continue;
      Monomial d = m;
      d[var] -= 1;
      out.add_term(d, c * S(static_cast<int>(m[var])));
    }
    return out;
  }

  // Drop every term that uses a variable in [lo, hi), then forget those
  // variables. Used to restrict the group law z(x, y) to y = 0.
  Polynomial restrict_zero(int lo, int hi) const {
    Polynomial out(nvars_ - (hi - lo));
    for (const auto& [m, c] : terms_) {
      bool uses = false;
      for (int i = lo; i < hi; ++i)
        if (m[i] != 0) {
          uses = true;
          break;
        }
      if (uses) continue;
      Monomial r;
      r.reserve(out.nvars_);
      for (int i = 0; i < nvars_; ++i)
        if (i < lo || i >= hi) r.push_back(m[i]);
      out.add_term(r, c);
    }
    return out;
  }

  template <class T>
  Polynomial<T> convert() const {
    Polynomial<T> out(nvars_);
    for (const auto& [m, c] : terms_) out.add_term(m, scalar_from_rational<T>(c));
    return out;
  }

  template <class T>
  T eval(const std::vector<T>& x) const {
    if (static_cast<int>(x.size()) != nvars_) throw std::invalid_argument("eval: wrong arity");
    T acc(0);
    for (const auto& [m, c] : terms_) acc += term_value(m, x) * scalar_cast<T>(c);
    return acc;
  }

  // Max weighted degree over terms (weight[i] per variable); -1 for zero.
  int weighted_degree(const std::vector<int>& weight) const {
    int deg = -1;
    for (const auto& [m, c] : terms_) {
      (void)c;
      int d = 0;
      for (int i = 0; i < nvars_; ++i) d += weight[i] * m[i];
      if (d > deg) deg = d;
    }
    return deg;
  }

  bool is_weighted_homogeneous(const std::vector<int>& weight, int deg) const {
    for (const auto& [m, c] : terms_) {
      (void)c;
      int d = 0;
      for (int i = 0; i < nvars_; ++i) d += weight[i] * m[i];
      if (d != deg) return false;
    }
    return true;
  }

  std::string to_string(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) out += " + ";
      first = false;
      out += coeff_str(c);
      for (int i = 0; i < nvars_; ++i)
        for (int e = 0; e < m[i]; ++e) out += "*" + names[i];
    }
    return out;
  }

  void add_term(const Monomial& m, const S& c) {
    if (c == S(0)) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, c);
    } else {
      it->second += c;
      if (it->second == S(0)) terms_.erase(it);
    }
  }

 private:
  template <class T>
  static T scalar_cast(const S& c) {
    if constexpr (std::is_same_v<S, T>)
      return c;
    else
      return scalar_from_rational<T>(c);
  }

  template <class T>
  static T term_value(const Monomial& m, const std::vector<T>& x) {
    T v(1);
    for (std::size_t i = 0; i < m.size(); ++i)
      for (int e = 0; e < m[i]; ++e) v *= x[i];
    return v;
  }

  void check_vars(const Polynomial& o) const {
    if (nvars_ != o.nvars_) throw std::invalid_argument("polynomial arity mismatch");
  }

  static std::string coeff_str(const S& c) {
    if constexpr (std::is_same_v<S, Rational>) {
      return c.str();
    } else {
      return std::to_string(c);
    }
  }

  int nvars_;
  std::map<Monomial, S> terms_;
};

// A tuple of polynomials sharing one variable set: the components of a map.
template <class S>
struct PolynomialMap {
  int nvars = 0;
  std::vector<Polynomial<S>> comps;

  PolynomialMap() = default;
  explicit PolynomialMap(int nv) : nvars(nv) {}

  std::size_t size() const { return comps.size(); }

  template <class T>
  std::vector<T> eval(const std::vector<T>& x) const {
    std::vector<T> out;
    out.reserve(comps.size());
    for (const auto& p : comps) out.push_back(p.template eval<T>(x));
    return out;
  }

  template <class T>
  PolynomialMap<T> convert() const {
    PolynomialMap<T> out(nvars);
    out.comps.reserve(comps.size());
    for (const auto& p : comps) out.comps.push_back(p.template convert<T>());
    return out;
  }
};

}  // namespace carnot
