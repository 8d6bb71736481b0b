#pragma once

#include <functional>
#include <vector>

#include "carnot/fields.hpp"
#include "carnot/group.hpp"

namespace carnot {

using MapFn = std::function<std::vector<double>(const std::vector<double>&)>;

// Central difference of f along the left-invariant flow p exp(t X_e).
inline std::vector<double> fd_derivative(const GroupOps& ops, const MapFn& f, int e,
                                         const std::vector<double>& p, double h) {
  const auto plus = f(ops.product(p, ops.basis_point(e, h)));
  const auto minus = f(ops.product(p, ops.basis_point(e, -h)));
  std::vector<double> out(plus.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (plus[i] - minus[i]) / (2.0 * h);
  return out;
}

// W f with W = X_{e_1} ... X_{e_m}: the first letter differentiates last.
inline std::vector<double> fd_word_derivative(const GroupOps& ops, const MapFn& f,
                                              const std::vector<int>& letters,
                                              const std::vector<double>& p, double h) {
  if (letters.empty()) return f(p);
  if (letters.size() == 1) return fd_derivative(ops, f, letters[0], p, h);
  const std::vector<int> inner(letters.begin() + 1, letters.end());
  const int e = letters.front();
  const auto plus = fd_word_derivative(ops, f, inner, ops.product(p, ops.basis_point(e, h)), h);
  const auto minus = fd_word_derivative(ops, f, inner, ops.product(p, ops.basis_point(e, -h)), h);
  std::vector<double> out(plus.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (plus[i] - minus[i]) / (2.0 * h);
  return out;
}

// Richardson-extrapolated variant: (4 D(h/2) - D(h)) / 3.
inline std::vector<double> fd_word_derivative_rich(const GroupOps& ops, const MapFn& f,
                                                   const std::vector<int>& letters,
                                                   const std::vector<double>& p, double h) {
  const auto coarse = fd_word_derivative(ops, f, letters, p, h);
  const auto fine = fd_word_derivative(ops, f, letters, p, h / 2.0);
  std::vector<double> out(coarse.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return out;
}

}  // namespace carnot
