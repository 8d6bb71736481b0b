#pragma once

#include <map>
#include <vector>

#include "carnot/group.hpp"

namespace carnot {

// A finite word X_{r_1,j_1} ... X_{r_m,j_m} of left-invariant derivations,
// stored as flat basis indices. letters[0] is the outermost derivation.
struct OperatorWord {
  std::vector<int> letters;

  bool operator<(const OperatorWord& o) const { return letters < o.letters; }
  bool operator==(const OperatorWord& o) const { return letters == o.letters; }
};

inline bool is_ordered(const OperatorWord& w) {
  for (std::size_t i = 0; i + 1 < w.letters.size(); ++i)
    if (w.letters[i] > w.letters[i + 1]) return false;
  return true;
}

inline int word_weight(const StratifiedAlgebra& alg, const OperatorWord& w) {
  int t = 0;
  for (int e : w.letters) t += alg.weight(e);
  return t;
}

// X_e acting as a derivation: sum_j coeff_j(x) d/dx_j.
inline Polynomial<Rational> apply_field(const GroupOps& ops, int e,
                                        const Polynomial<Rational>& p) {
  const auto& coeffs = ops.field_coeffs(e);
  Polynomial<Rational> out(p.nvars());
  for (int j = 0; j < ops.dim(); ++j) {
    if (coeffs.comps[j].is_zero()) continue;
    const Polynomial<Rational> dj = p.derivative(j);
    if (dj.is_zero()) continue;
    out += coeffs.comps[j] * dj;
  }
  return out;
}

// Composition applied right-to-left: letters.back() acts first.
inline Polynomial<Rational> apply_word(const GroupOps& ops, const OperatorWord& w,
                                       Polynomial<Rational> p) {
  for (std::size_t i = w.letters.size(); i-- > 0;) p = apply_field(ops, w.letters[i], p);
  return p;
}

inline PolynomialMap<Rational> apply_word(const GroupOps& ops, const OperatorWord& w,
                                          const PolynomialMap<Rational>& m) {
  PolynomialMap<Rational> out(m.nvars);
  out.comps.reserve(m.comps.size());
  for (const auto& p : m.comps) out.comps.push_back(apply_word(ops, w, p));
  return out;
}

// PBW-style straightening: rewrites W as a combination of ordered words that
// acts identically on polynomials. Adjacent out-of-order letters are swapped
// via X_b X_a = X_a X_b - [X_a, X_b]; brackets landing above stratum s vanish
// with the structure table. Total weight is preserved term by term.
inline std::vector<std::pair<Rational, OperatorWord>> normalize_operator_word(
    const StratifiedAlgebra& alg, const OperatorWord& w) {
  std::map<std::vector<int>, Rational> done;
  std::vector<std::pair<Rational, std::vector<int>>> todo{{Rational(1), w.letters}};
  while (!todo.empty()) {
    auto [coeff, letters] = todo.back();
    todo.pop_back();
    std::size_t inv = letters.size();
    for (std::size_t i = 0; i + 1 < letters.size(); ++i)
      if (letters[i] > letters[i + 1]) {
        inv = i;
        break;
      }
    if (inv == letters.size()) {
      auto [it, fresh] = done.emplace(letters, coeff);
      if (!fresh) it->second += coeff;
      continue;
    }
    const int b = letters[inv], a = letters[inv + 1];
    std::vector<int> swapped = letters;
    std::swap(swapped[inv], swapped[inv + 1]);
    todo.emplace_back(coeff, std::move(swapped));
    // [X_a, X_b] terms with one letter fewer
    for (const auto& [c, sc] : alg.bracket_basis(a, b)) {
      std::vector<int> shorter;
      shorter.reserve(letters.size() - 1);
      shorter.insert(shorter.end(), letters.begin(), letters.begin() + inv);
      shorter.push_back(c);
      shorter.insert(shorter.end(), letters.begin() + inv + 2, letters.end());
      todo.emplace_back(coeff * (-sc), std::move(shorter));
    }
  }
  std::vector<std::pair<Rational, OperatorWord>> out;
  for (auto& [letters, coeff] : done)
    if (coeff != 0) out.push_back({coeff, OperatorWord{letters}});
  return out;
}

// Every ordered word of length 1..s over the full graded basis, in
// lexicographic order. This is the wedge family of the freeness bounds.
inline std::vector<OperatorWord> ordered_words(const StratifiedAlgebra& alg) {
  std::vector<OperatorWord> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start, int remaining) -> void {
    if (!cur.empty()) out.push_back(OperatorWord{cur});
    if (remaining == 0) return;
    for (int e = start; e < alg.dim(); ++e) {
      cur.push_back(e);
      self(self, e, remaining - 1);
      cur.pop_back();
    }
  };
  rec(rec, 0, alg.step());
  return out;
}

}  // namespace carnot
