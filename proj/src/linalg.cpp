#include "carnot/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "carnot/kernels.hpp"

namespace carnot::linalg {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  return kernels::dot(a.data(), b.data(), a.size());
}

double norm(const std::vector<double>& a) {
  return std::sqrt(kernels::squared_norm(a.data(), a.size()));
}

namespace {

// Pivoted Cholesky of a symmetric PSD matrix; returns the product of the
// pivots (the determinant) with negative round-off clamped to zero.
double psd_det(std::vector<std::vector<double>> g) {
  const int n = static_cast<int>(g.size());
  double det = 1.0;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::fabs(g[i][i]));
  const double clamp = 1e-14 * scale * n;
  for (int i = 0; i < n; ++i) {
    int piv = i;
    for (int j = i + 1; j < n; ++j)
      if (g[j][j] > g[piv][piv]) piv = j;
    if (piv != i) {
      std::swap(g[i], g[piv]);
      for (int r = 0; r < n; ++r) std::swap(g[r][i], g[r][piv]);
    }
    double d = g[i][i];
    if (d <= clamp) return 0.0;  // dependent within tolerance
    det *= d;
    for (int j = i + 1; j < n; ++j) {
      const double f = g[j][i] / d;
      for (int c = i; c < n; ++c) g[j][c] -= f * g[i][c];
    }
  }
  return det;
}

void check_common_dim(const Vecs& vs) {
  if (vs.empty()) return;
  const std::size_t d = vs[0].size();
  for (const auto& v : vs)
    if (v.size() != d) throw std::invalid_argument("vector tuple: dimension mismatch");
  if (vs.size() > d) throw std::invalid_argument("vector tuple: more vectors than dimensions");
}

}  // namespace

double wedge_norm_squared(const Vecs& vs) {
  check_common_dim(vs);
  const int n = static_cast<int>(vs.size());
  if (n == 0) return 1.0;
  std::vector<std::vector<double>> g(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) g[i][j] = g[j][i] = dot(vs[i], vs[j]);
  return psd_det(g);
}

double wedge_norm(const Vecs& vs) { return std::sqrt(std::max(0.0, wedge_norm_squared(vs))); }

double polarized_wedge_inner(const Vecs& us, const Vecs& vs) {
  if (us.size() != vs.size()) throw std::invalid_argument("polarized inner: length mismatch");
  const int n = static_cast<int>(us.size());
  if (n == 0) return 1.0;
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = dot(us[i], vs[j]);
  // LU with partial pivoting
  double det = 1.0;
  for (int i = 0; i < n; ++i) {
    int piv = i;
    for (int j = i + 1; j < n; ++j)
      if (std::fabs(m[j][i]) > std::fabs(m[piv][i])) piv = j;
    if (m[piv][i] == 0.0) return 0.0;
    if (piv != i) {
      std::swap(m[i], m[piv]);
      det = -det;
    }
    det *= m[i][i];
    for (int j = i + 1; j < n; ++j) {
      const double f = m[j][i] / m[i][i];
      for (int c = i; c < n; ++c) m[j][c] -= f * m[i][c];
    }
  }
  return det;
}

bool wedge_cauchy_schwarz_check(const Vecs& vs, int split, double tol) {
  if (split < 1 || split >= static_cast<int>(vs.size()))
    throw std::invalid_argument("split out of range");
  const Vecs head(vs.begin(), vs.begin() + split);
  const Vecs tail(vs.begin() + split, vs.end());
  const double whole = wedge_norm(vs);
  const double parts = wedge_norm(head) * wedge_norm(tail);
  return whole <= parts + tol * (1.0 + parts);
}

Pseudoinverse::Pseudoinverse(const Vecs& t_rows, double rank_tol) {
  check_common_dim(t_rows);
  m_ = static_cast<int>(t_rows.size());
  if (m_ == 0) throw std::invalid_argument("pseudoinverse of empty map");
  d_ = static_cast<int>(t_rows[0].size());
  t_ = t_rows;
  double scale = 0.0;
  for (const auto& r : t_) scale = std::max(scale, kernels::squared_norm(r.data(), r.size()));
  if (rank_tol < 0) rank_tol = 1e-12 * scale;

  std::vector<std::vector<double>> g(m_, std::vector<double>(m_));
  for (int i = 0; i < m_; ++i)
    for (int j = i; j < m_; ++j) g[i][j] = g[j][i] = dot(t_[i], t_[j]);

  // unpivoted Cholesky; pivot failure means rank deficiency
  chol_.assign(m_, std::vector<double>(m_, 0.0));
  gram_det_ = 1.0;
  for (int i = 0; i < m_; ++i) {
    double d = g[i][i];
    for (int k = 0; k < i; ++k) d -= chol_[i][k] * chol_[i][k];
    if (!(d > rank_tol)) {
      gram_det_ *= std::max(d, 0.0);
      throw SingularityError(gram_det_);
    }
    gram_det_ *= d;
    chol_[i][i] = std::sqrt(d);
    for (int j = i + 1; j < m_; ++j) {
      double v = g[j][i];
      for (int k = 0; k < i; ++k) v -= chol_[j][k] * chol_[i][k];
      chol_[j][i] = v / chol_[i][i];
    }
  }
}

std::vector<double> Pseudoinverse::apply(const std::vector<double>& y) const {
  if (static_cast<int>(y.size()) != m_) throw std::invalid_argument("pinv apply: bad length");
  // solve (LL^T) z = y
  std::vector<double> z(y);
  for (int i = 0; i < m_; ++i) {
    for (int k = 0; k < i; ++k) z[i] -= chol_[i][k] * z[k];
    z[i] /= chol_[i][i];
  }
  for (int i = m_ - 1; i >= 0; --i) {
    for (int k = i + 1; k < m_; ++k) z[i] -= chol_[k][i] * z[k];
    z[i] /= chol_[i][i];
  }
  std::vector<double> out(d_, 0.0);
  for (int i = 0; i < m_; ++i) kernels::axpy(z[i], t_[i].data(), out.data(), d_);
  return out;
}

Vecs Pseudoinverse::dense() const {
  Vecs cols;
  cols.reserve(m_);
  std::vector<double> e(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    e[i] = 1.0;
    cols.push_back(apply(e));
    e[i] = 0.0;
  }
  return cols;
}

Vecs gram_schmidt(const Vecs& ws, double degeneracy_tol) {
  check_common_dim(ws);
  Vecs vs;
  vs.reserve(ws.size());
  for (std::size_t i = 0; i < ws.size(); ++i) {
    std::vector<double> r = ws[i];
    // two projection passes for orthogonality at the 1e-10 level
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : vs) kernels::axpy(-dot(r, v), v.data(), r.data(), r.size());
    const double rn = norm(r);
    if (!(rn > degeneracy_tol * (1.0 + norm(ws[i]))))
      throw DegeneratePrefix(static_cast<int>(i + 1));
    kernels::scale(1.0 / rn, r.data(), r.size());
    vs.push_back(std::move(r));
  }
  return vs;
}

Rational det_rational(std::vector<std::vector<Rational>> m) {
  const int n = static_cast<int>(m.size());
  for (const auto& row : m)
    if (static_cast<int>(row.size()) != n) throw std::invalid_argument("det: not square");
  Rational det(1);
  for (int i = 0; i < n; ++i) {
    int piv = i;
    while (piv < n && m[piv][i] == 0) ++piv;
    if (piv == n) return Rational(0);
    if (piv != i) {
      std::swap(m[i], m[piv]);
      det = -det;
    }
    det *= m[i][i];
    const Rational inv = Rational(1) / m[i][i];
    for (int j = i + 1; j < n; ++j) {
      if (m[j][i] == 0) continue;
      const Rational f = m[j][i] * inv;
      for (int c = i; c < n; ++c) m[j][c] -= f * m[i][c];
    }
  }
  return det;
}

}  // namespace carnot::linalg
