#include "carnot/group.hpp"

#include <functional>

namespace carnot {

namespace {

using PolyVec = std::vector<Polynomial<Rational>>;

PolyVec bracket_pv(const StratifiedAlgebra& alg, const PolyVec& x, const PolyVec& y, int nvars) {
  PolyVec z(alg.dim(), Polynomial<Rational>(nvars));
  for (int a = 0; a < alg.dim(); ++a) {
    if (x[a].is_zero()) continue;
    for (int b = 0; b < alg.dim(); ++b) {
      if (y[b].is_zero()) continue;
      const auto& row = alg.bracket_basis(a, b);
      if (row.empty()) continue;
      const Polynomial<Rational> prod = x[a] * y[b];
      for (const auto& [c, coeff] : row) z[c] += prod * coeff;
    }
  }
  return z;
}

// right-nested bracket [w_0, [w_1, ... [w_{l-2}, w_{l-1}]...]]
PolyVec nested_bracket(const StratifiedAlgebra& alg, const std::vector<const PolyVec*>& word,
                       int nvars) {
  PolyVec acc = *word.back();
  for (std::size_t i = word.size() - 1; i-- > 0;) acc = bracket_pv(alg, *word[i], acc, nvars);
  return acc;
}

long factorial(int n) {
  long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// all block sequences ((r_1,s_1),...,(r_m,s_m)), r_i+s_i >= 1, total <= cap
void enumerate_blocks(int m, int cap, std::vector<std::pair<int, int>>& cur,
                      const std::function<void(const std::vector<std::pair<int, int>>&)>& emit) {
  if (m == 0) {
    emit(cur);
    return;
  }
  for (int r = 0; r <= cap; ++r)
    for (int s = 0; s + r <= cap; ++s) {
      if (r + s == 0) continue;
      cur.emplace_back(r, s);
      enumerate_blocks(m - 1, cap - r - s, cur, emit);
      cur.pop_back();
    }
}

}  // namespace

GroupOps::GroupOps(StratifiedAlgebra alg) : alg_(std::move(alg)) {
  const int n = alg_.dim();
  const int s = alg_.step();
  const int nvars = 2 * n;
  gauge_exp_ = 2 * static_cast<int>(factorial(s));

  PolyVec x(n, Polynomial<Rational>(nvars)), y(n, Polynomial<Rational>(nvars));
  for (int i = 0; i < n; ++i) {
    x[i] = Polynomial<Rational>::variable(nvars, i);
    y[i] = Polynomial<Rational>::variable(nvars, n + i);
  }

  // Dynkin series for log(exp x exp y), truncated at word length s. Words of
  // length > s vanish because each letter carries weight >= 1.
  PolyVec total(n, Polynomial<Rational>(nvars));
  for (int m = 1; m <= s; ++m) {
    std::vector<std::pair<int, int>> cur;
    enumerate_blocks(m, s, cur, [&](const std::vector<std::pair<int, int>>& blocks) {
      int len = 0;
      long denom = static_cast<long>(m);
      int letters = 0;
      for (const auto& [r, si] : blocks) {
        len += r + si;
        denom *= factorial(r) * factorial(si);
        letters += r + si;
      }
      if (len == 0 || len > s) return;
      denom *= letters;
      std::vector<const PolyVec*> word;
      word.reserve(len);
      for (const auto& [r, si] : blocks) {
        for (int q = 0; q < r; ++q) word.push_back(&x);
        for (int q = 0; q < si; ++q) word.push_back(&y);
      }
      PolyVec nb = word.size() == 1 ? *word[0] : nested_bracket(alg_, word, nvars);
      const Rational coeff = Rational((m % 2 == 1) ? 1 : -1) / Rational(denom);
      for (int i = 0; i < n; ++i)
        if (!nb[i].is_zero()) total[i] += nb[i] * coeff;
    });
  }

  law_.nvars = nvars;
  law_.comps = std::move(total);
  law_d_ = law_.convert<double>();

  // X_e coefficient of d/dx_j: d z_j / d y_e restricted to y = 0
  field_.reserve(n);
  for (int e = 0; e < n; ++e) {
    PolynomialMap<Rational> f(n);
    f.comps.reserve(n);
    for (int j = 0; j < n; ++j)
      f.comps.push_back(law_.comps[j].derivative(n + e).restrict_zero(n, 2 * n));
    field_.push_back(std::move(f));
  }
}

}  // namespace carnot
