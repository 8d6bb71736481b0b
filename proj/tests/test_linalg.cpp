#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "carnot/linalg.hpp"
#include "carnot/rng.hpp"

using namespace carnot;
using linalg::Vecs;

namespace {

// Independent oracle: wedge coordinates over all n-subsets of axes.
void subsets(int d, int n, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < d; ++i) {
    cur.push_back(i);
    subsets(d, n, i + 1, cur, out);
    cur.pop_back();
  }
}

double det_small(std::vector<std::vector<double>> m) {
  const int n = static_cast<int>(m.size());
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

std::vector<double> wedge_coordinates(const Vecs& vs) {
  const int n = static_cast<int>(vs.size());
  const int d = static_cast<int>(vs[0].size());
  std::vector<std::vector<int>> subs;
  std::vector<int> cur;
  subsets(d, n, 0, cur, subs);
  std::vector<double> coords;
  coords.reserve(subs.size());
  for (const auto& s : subs) {
    std::vector<std::vector<double>> minor(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) minor[i][j] = vs[i][s[j]];
    coords.push_back(det_small(minor));
  }
  return coords;
}

double oracle_wedge_norm(const Vecs& vs) {
  double acc = 0.0;
  for (double c : wedge_coordinates(vs)) acc += c * c;
  return std::sqrt(acc);
}

Vecs random_tuple(Rng& rng, int n, int d) {
  Vecs vs(n, std::vector<double>(d));
  for (auto& v : vs)
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return vs;
}

}  // namespace

TEST_CASE("wedge norm basics") {
  Vecs e12{{1, 0, 0}, {0, 1, 0}};
  CHECK(linalg::wedge_norm(e12) == doctest::Approx(1.0));
  Vecs skew{{1, 1, 0}, {1, -1, 0}};
  CHECK(linalg::wedge_norm(skew) == doctest::Approx(2.0));
  Vecs dep{{1, 2, 3}, {2, 4, 6}};
  CHECK(linalg::wedge_norm(dep) == doctest::Approx(0.0));
}

TEST_CASE("wedge norm matches exterior-coordinate oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(5));  // up to 6
    const int n = 1 + static_cast<int>(rng.below(std::min(d, 3)));
    auto vs = random_tuple(rng, n, d);
    const double mine = linalg::wedge_norm(vs);
    const double oracle = oracle_wedge_norm(vs);
    CHECK(mine == doctest::Approx(oracle).epsilon(1e-9));
  }
}

TEST_CASE("polarized inner product matches wedge coordinate dot") {
  Rng rng(22);
  for (int trial = 0; trial < 500; ++trial) {
    auto us = random_tuple(rng, 3, 5);
    auto vs = random_tuple(rng, 3, 5);
    const double mine = linalg::polarized_wedge_inner(us, vs);
    const auto cu = wedge_coordinates(us);
    const auto cv = wedge_coordinates(vs);
    double oracle = 0.0;
    for (std::size_t i = 0; i < cu.size(); ++i) oracle += cu[i] * cv[i];
    CHECK(mine == doctest::Approx(oracle).epsilon(1e-9));
    // symmetry and the us == vs reduction
    CHECK(linalg::polarized_wedge_inner(vs, us) == doctest::Approx(mine).epsilon(1e-9));
  }
  auto ws = random_tuple(rng, 3, 6);
  CHECK(linalg::polarized_wedge_inner(ws, ws) ==
        doctest::Approx(linalg::wedge_norm_squared(ws)).epsilon(1e-9));
}

TEST_CASE("polarized inner on orthonormal and orthogonal tuples") {
  Vecs us{{1, 0, 0, 0}, {0, 1, 0, 0}};
  CHECK(linalg::polarized_wedge_inner(us, us) == doctest::Approx(1.0));
  Vecs vs{{0, 0, 1, 0}, {0, 0, 0, 1}};
  CHECK(linalg::polarized_wedge_inner(us, vs) == doctest::Approx(0.0));
}

TEST_CASE("wedge Cauchy-Schwarz holds on random tuples") {
  Rng rng(23);
  for (int trial = 0; trial < 10000; ++trial) {
    const int d = 3 + static_cast<int>(rng.below(4));
    const int n = 2 + static_cast<int>(rng.below(std::min(d - 1, 3)));
    auto vs = random_tuple(rng, n, d);
    const int split = 1 + static_cast<int>(rng.below(n - 1));
    CHECK(linalg::wedge_cauchy_schwarz_check(vs, split));
  }
  // equality for orthonormal tuples
  Vecs e{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  CHECK(linalg::wedge_cauchy_schwarz_check(e, 1));
  CHECK(linalg::wedge_cauchy_schwarz_check(e, 2));
  // dependent tuple: 0 <= product
  Vecs dep{{1, 0, 0}, {1, 0, 0}};
  CHECK(linalg::wedge_cauchy_schwarz_check(dep, 1));
}

TEST_CASE("pseudoinverse basics") {
  // T = (2, 0): R^2 -> R^1
  linalg::Pseudoinverse p({{2, 0}});
  auto x = p.apply({1});
  CHECK(x[0] == doctest::Approx(0.5));
  CHECK(x[1] == doctest::Approx(0.0));

  // orthonormal rows: inverse is the transpose
  linalg::Pseudoinverse q({{1, 0, 0}, {0, 1, 0}});
  auto cols = q.dense();
  CHECK(cols[0][0] == doctest::Approx(1.0));
  CHECK(cols[1][1] == doctest::Approx(1.0));
  CHECK(cols[0][1] == doctest::Approx(0.0));
}

TEST_CASE("pseudoinverse satisfies the Moore-Penrose identities") {
  Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 4, d = 9;
    Vecs t = random_tuple(rng, m, d);
    linalg::Pseudoinverse pinv(t);

    // T T^{-1} = I
    std::vector<double> y(m), e(m, 0.0);
    for (int i = 0; i < m; ++i) {
      e[i] = 1.0;
      auto xi = pinv.apply(e);
      for (int j = 0; j < m; ++j) {
        const double tij = linalg::dot(t[j], xi);
        CHECK(std::fabs(tij - (i == j ? 1.0 : 0.0)) < 1e-10);
      }
      e[i] = 0.0;
    }

    // minimum-norm property: T^{-1} y is orthogonal to ker T, i.e. lies in
    // the row span; check  T^{-1}(T x_r) == x_r for x_r in the row span.
    std::vector<double> xr(d, 0.0);
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < d; ++c) xr[c] += (0.3 + i) * t[i][c];
    for (int i = 0; i < m; ++i) y[i] = linalg::dot(t[i], xr);
    auto back = pinv.apply(y);
    for (int c = 0; c < d; ++c) CHECK(back[c] == doctest::Approx(xr[c]).epsilon(1e-8));
  }
}

TEST_CASE("pseudoinverse reports rank deficiency with the gram determinant") {
  Vecs t{{1, 0, 0}, {2, 0, 0}};
  CHECK_THROWS_AS(linalg::Pseudoinverse{t}, linalg::SingularityError);
  try {
    linalg::Pseudoinverse bad(t);
  } catch (const linalg::SingularityError& err) {
    CHECK(err.gram_det <= 1e-10);
  }
}

TEST_CASE("gram schmidt") {
  // already orthonormal input: returned unchanged
  Vecs e{{1, 0, 0}, {0, 0, 1}};
  auto v = linalg::gram_schmidt(e);
  CHECK(v[0][0] == doctest::Approx(1.0));
  CHECK(v[1][2] == doctest::Approx(1.0));

  // forced by span and positivity
  Vecs w{{1, 0}, {1, 1}};
  auto u = linalg::gram_schmidt(w);
  CHECK(u[0][0] == doctest::Approx(1.0));
  CHECK(u[1][1] == doctest::Approx(1.0));
  CHECK(std::fabs(u[1][0]) < 1e-12);

  Rng rng(25);
  for (int trial = 0; trial < 200; ++trial) {
    auto ws = random_tuple(rng, 5, 8);
    auto vs = linalg::gram_schmidt(ws);
    // Gram matrix is the identity to 1e-10
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        CHECK(std::fabs(linalg::dot(vs[i], vs[j]) - (i == j ? 1.0 : 0.0)) < 1e-10);
    // prefix spans preserved: each w_i has zero residual against v_0..v_i
    for (int i = 0; i < 5; ++i) {
      std::vector<double> r = ws[i];
      for (int j = 0; j <= i; ++j)
        for (std::size_t c = 0; c < r.size(); ++c) r[c] -= linalg::dot(ws[i], vs[j]) * vs[j][c];
      CHECK(linalg::norm(r) < 1e-9 * (1.0 + linalg::norm(ws[i])));
    }
    // positivity v_i . w_i > 0
    for (int i = 0; i < 5; ++i) CHECK(linalg::dot(vs[i], ws[i]) > 0.0);
  }
}

TEST_CASE("gram schmidt flags the first degenerate prefix") {
  Vecs w{{1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  CHECK_THROWS_AS(linalg::gram_schmidt(w), linalg::DegeneratePrefix);
  try {
    linalg::gram_schmidt(w);
  } catch (const linalg::DegeneratePrefix& err) {
    CHECK(err.prefix_length == 3);
  }
}

TEST_CASE("ratio form of the normalizer agrees with the wedge quotient") {
  Rng rng(26);
  for (int trial = 0; trial < 100; ++trial) {
    auto ws = random_tuple(rng, 4, 6);
    auto vs = linalg::gram_schmidt(ws);
    for (int i = 1; i < 4; ++i) {
      const Vecs prefix(ws.begin(), ws.begin() + i);
      const Vecs prefix1(ws.begin(), ws.begin() + i + 1);
      const double ratio = linalg::wedge_norm(prefix) / linalg::wedge_norm(prefix1);
      std::vector<double> r = ws[i];
      for (int j = 0; j < i; ++j)
        for (std::size_t c = 0; c < r.size(); ++c) r[c] -= linalg::dot(ws[i], vs[j]) * vs[j][c];
      CHECK(1.0 / linalg::norm(r) == doctest::Approx(ratio).epsilon(1e-7));
    }
  }
}

TEST_CASE("exact rational determinant") {
  std::vector<std::vector<Rational>> m{{Rational(1), Rational(2)}, {Rational(3), Rational(4)}};
  CHECK(linalg::det_rational(m) == Rational(-2));
  std::vector<std::vector<Rational>> s{{Rational(1, 2), Rational(0)}, {Rational(7), Rational(2)}};
  CHECK(linalg::det_rational(s) == Rational(1));
}
