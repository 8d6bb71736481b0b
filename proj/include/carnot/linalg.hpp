#pragma once

#include <stdexcept>
#include <vector>

#include "carnot/rational.hpp"

namespace carnot::linalg {

struct SingularityError : std::runtime_error {
  explicit SingularityError(double det)
      : std::runtime_error("rank-deficient map (det(TT*) = " + std::to_string(det) + ")"),
        gram_det(det) {}
  double gram_det;
};

struct DegeneratePrefix : std::runtime_error {
  explicit DegeneratePrefix(int len)
      : std::runtime_error("degenerate Gram-Schmidt prefix of length " + std::to_string(len)),
        prefix_length(len) {}
  int prefix_length;
};

using Vecs = std::vector<std::vector<double>>;

// |v_1 ^ ... ^ v_n| via the Gram determinant (Cauchy-Binet), computed by a
// pivoted symmetric factorization; negative round-off pivots clamp to zero.
double wedge_norm_squared(const Vecs& vs);
double wedge_norm(const Vecs& vs);

// <u_1^...^u_n, v_1^...^v_n> = det(u_i . v_j)
double polarized_wedge_inner(const Vecs& us, const Vecs& vs);

// |v_1^..^v_n| <= |v_1^..^v_i| |v_{i+1}^..^v_n| within tolerance
bool wedge_cauchy_schwarz_check(const Vecs& vs, int split, double tol = 1e-9);

// Minimum-norm right inverse of a full-row-rank map T (rows = images of the
// coordinate functionals). apply(y) returns T^*(TT^*)^{-1} y.
class Pseudoinverse {
 public:
  // rank_tol < 0 selects the default 1e-12 * (max row norm)^2
  explicit Pseudoinverse(const Vecs& t_rows, double rank_tol = -1.0);

  std::vector<double> apply(const std::vector<double>& y) const;
  // T^{-1} materialized column by column: D x m
  Vecs dense() const;
  double gram_det() const { return gram_det_; }
  int rows() const { return m_; }
  int cols() const { return d_; }

 private:
  int m_, d_;
  Vecs t_;
  Vecs chol_;  // lower Cholesky factor of TT*
  double gram_det_;
};

// Gram-Schmidt in the ratio form v_i = (|^_{j<i} w| / |^_{j<=i} w|)(w_i - sum (w_i.v_j) v_j).
// Throws DegeneratePrefix carrying the first failing prefix length.
Vecs gram_schmidt(const Vecs& ws, double degeneracy_tol = 1e-12);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm(const std::vector<double>& a);

// exact determinant of a square rational matrix (plain fraction arithmetic)
Rational det_rational(std::vector<std::vector<Rational>> m);

}  // namespace carnot::linalg
