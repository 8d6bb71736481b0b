#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "carnot/algebra.hpp"
#include "carnot/fields.hpp"
#include "carnot/group.hpp"
#include "carnot/rng.hpp"

#include <nlohmann/json.hpp>

using namespace carnot;

namespace {

std::vector<Rational> random_rational_point(const GroupOps& ops, Rng& rng, int span = 6,
                                            int max_den = 4) {
  std::vector<Rational> p(ops.dim());
  for (auto& c : p)
    c = Rational(rng.rational_int(-span, span), rng.rational_int(1, max_den));
  return p;
}

}  // namespace

TEST_CASE("validate accepts the bundled groups") {
  for (auto alg : {StratifiedAlgebra::heisenberg3(), StratifiedAlgebra::heisenberg5(),
                   StratifiedAlgebra::engel4()}) {
    auto rep = validate_algebra(alg);
    for (const auto& issue : rep.issues) MESSAGE(issue.axiom, ": ", issue.detail);
    CHECK(rep.ok());
  }
}

TEST_CASE("validate flags a broken antisymmetry entry") {
  auto alg = StratifiedAlgebra::heisenberg3();
  // overwrite only one direction
  alg.set_bracket_oneway(alg.flat(1, 2), alg.flat(1, 1), {{alg.flat(2, 1), Rational(1)}});
  auto rep = validate_algebra(alg);
  bool found = false;
  for (const auto& issue : rep.issues) found = found || issue.axiom == "antisymmetry";
  CHECK(found);
}

TEST_CASE("validate flags a non-generating table") {
  // step-2 with k_2 = 1 but [V1,V1] = 0
  StratifiedAlgebra alg("broken", {2, 1});
  auto rep = validate_algebra(alg);
  bool found = false;
  for (const auto& issue : rep.issues) found = found || issue.axiom == "generation";
  CHECK(found);
}

TEST_CASE("bracket bilinearity on h3") {
  auto alg = StratifiedAlgebra::heisenberg3();
  std::vector<Rational> x1{1, 0, 0}, x2{0, 1, 0};
  auto z = alg.bracket(x1, x2);
  CHECK(z == std::vector<Rational>{0, 0, 1});
  // [v, v] = 0
  std::vector<Rational> v{Rational(3, 2), Rational(-1, 3), Rational(5)};
  auto vv = alg.bracket(v, v);
  CHECK(vv == std::vector<Rational>{0, 0, 0});
  // [X1+X2, X1-X2] = -2 X3
  std::vector<Rational> a{1, 1, 0}, b{1, -1, 0};
  CHECK(alg.bracket(a, b) == std::vector<Rational>{0, 0, -2});
}

TEST_CASE("bch product on h3 matches the closed form") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  std::vector<Rational> p{1, 0, 0}, q{0, 1, 0};
  auto pq = ops.product(p, q);
  CHECK(pq == std::vector<Rational>{1, 1, Rational(1, 2)});

  auto id = ops.identity<Rational>();
  CHECK(ops.product(p, id) == p);

  // commutator loop lands on (0,0,1)
  auto loop = ops.product(ops.product(ops.product(p, q), ops.inverse(p)), ops.inverse(q));
  CHECK(loop == std::vector<Rational>{0, 0, 1});
}

TEST_CASE("bch associativity is exact in rational mode") {
  Rng rng(41);
  for (auto alg : {StratifiedAlgebra::heisenberg3(), StratifiedAlgebra::engel4()}) {
    GroupOps ops(alg);
    for (int t = 0; t < 300; ++t) {
      auto a = random_rational_point(ops, rng);
      auto b = random_rational_point(ops, rng);
      auto c = random_rational_point(ops, rng);
      CHECK(ops.product(ops.product(a, b), c) == ops.product(a, ops.product(b, c)));
      CHECK(ops.product(a, ops.inverse(a)) == ops.identity<Rational>());
    }
  }
}

TEST_CASE("bch output is graded: stratum r gets weighted-degree-r corrections") {
  GroupOps ops(StratifiedAlgebra::engel4());
  const auto& alg = ops.algebra();
  std::vector<int> w2;
  for (int rep = 0; rep < 2; ++rep)
    for (int e = 0; e < alg.dim(); ++e) w2.push_back(alg.weight(e));
  for (int e = 0; e < alg.dim(); ++e) {
    // z_e - x_e - y_e is homogeneous of weighted degree weight(e)
    auto p = ops.law().comps[e];
    Polynomial<Rational>::Monomial mx(2 * alg.dim(), 0), my(2 * alg.dim(), 0);
    mx[e] = 1;
    my[alg.dim() + e] = 1;
    p.add_term(mx, Rational(-1));
    p.add_term(my, Rational(-1));
    if (!p.is_zero()) CHECK(p.is_weighted_homogeneous(w2, alg.weight(e)));
  }
}

TEST_CASE("dilate scales strata and is a homomorphism") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  std::vector<Rational> p{1, 1, 1};
  CHECK(ops.dilate(Rational(2), p) == std::vector<Rational>{2, 2, 4});
  CHECK(ops.dilate(Rational(1), p) == p);

  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    auto a = random_rational_point(ops, rng);
    auto b = random_rational_point(ops, rng);
    const Rational lam(rng.rational_int(1, 8), rng.rational_int(1, 3));
    CHECK(ops.dilate(lam, ops.product(a, b)) ==
          ops.product(ops.dilate(lam, a), ops.dilate(lam, b)));
    const Rational mu(rng.rational_int(1, 5), 1);
    CHECK(ops.dilate(lam, ops.dilate(mu, a)) == ops.dilate(Rational(lam * mu), a));
  }
  CHECK_THROWS_AS(ops.dilate(0.0, std::vector<double>{0, 0, 0}), std::domain_error);
}

TEST_CASE("quasinorm values and homogeneity") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  CHECK(ops.quasinorm(std::vector<double>{1, 1, 1}) == doctest::Approx(3.0));
  CHECK(ops.quasinorm(ops.identity<double>()) == 0.0);
  CHECK(ops.quasinorm(std::vector<double>{2, 2, 4}) == doctest::Approx(6.0));

  // floating-mode homogeneity within 1e-12 relative error
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(3);
    for (auto& c : p) c = rng.uniform(-5, 5);
    const double lam = std::exp(rng.uniform(-1.5, 1.5));
    const double lhs = ops.quasinorm(ops.dilate(lam, p));
    const double rhs = lam * ops.quasinorm(p);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  // exact rational-mode statement: coordinates scale by exactly lambda^r
  GroupOps eng(StratifiedAlgebra::engel4());
  Rng rng2(12);
  for (int t = 0; t < 100; ++t) {
    auto p = random_rational_point(eng, rng2);
    const Rational lam(rng2.rational_int(1, 9), rng2.rational_int(1, 4));
    auto d = eng.dilate(lam, p);
    for (int e = 0; e < eng.dim(); ++e) {
      Rational expect = p[e];
      for (int w = 0; w < eng.algebra().weight(e); ++w) expect *= lam;
      CHECK(d[e] == expect);
    }
  }
}

TEST_CASE("left-invariant fields take the triangular form") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  // X1 = d/dx1 - (x2/2) d/dx3
  const auto& f0 = ops.field_coeffs(0);
  CHECK(f0.comps[0] == Polynomial<Rational>::constant(3, Rational(1)));
  CHECK(f0.comps[1].is_zero());
  CHECK(f0.comps[2] == Polynomial<Rational>::variable(3, 1) * Rational(-1, 2));
  // X3 = d/dx3 (top stratum)
  const auto& f2 = ops.field_coeffs(2);
  CHECK(f2.comps[0].is_zero());
  CHECK(f2.comps[1].is_zero());
  CHECK(f2.comps[2] == Polynomial<Rational>::constant(3, Rational(1)));

  // coefficient matrix at the identity is the identity for any algebra
  for (auto alg : {StratifiedAlgebra::heisenberg5(), StratifiedAlgebra::engel4()}) {
    GroupOps g(alg);
    std::vector<Rational> zero(g.dim(), Rational(0));
    for (int e = 0; e < g.dim(); ++e)
      for (int j = 0; j < g.dim(); ++j) {
        const Rational v = g.field_coeffs(e).comps[j].eval(zero);
        CHECK(v == Rational(e == j ? 1 : 0));
      }
  }
}

TEST_CASE("field coefficients are weighted homogeneous of degree w(j)-w(e)") {
  GroupOps ops(StratifiedAlgebra::engel4());
  const auto& alg = ops.algebra();
  for (int e = 0; e < alg.dim(); ++e)
    for (int j = 0; j < alg.dim(); ++j) {
      const auto& c = ops.field_coeffs(e).comps[j];
      if (c.is_zero()) continue;
      CHECK(c.is_weighted_homogeneous(alg.weights(), alg.weight(j) - alg.weight(e)));
    }
}

TEST_CASE("apply_field on h3 polynomials") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  const auto x1 = Polynomial<Rational>::variable(3, 0);
  const auto x3 = Polynomial<Rational>::variable(3, 2);
  CHECK(apply_field(ops, 0, x1) == Polynomial<Rational>::constant(3, Rational(1)));
  CHECK(apply_field(ops, 0, x3) == Polynomial<Rational>::variable(3, 1) * Rational(-1, 2));

  OperatorWord w12{{0, 1}}, w21{{1, 0}};
  CHECK(apply_word(ops, w12, x3) == Polynomial<Rational>::constant(3, Rational(1, 2)));
  CHECK(apply_word(ops, w21, x3) == Polynomial<Rational>::constant(3, Rational(-1, 2)));
}

TEST_CASE("operator word straightening") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  const auto& alg = ops.algebra();

  OperatorWord ordered{{0, 1}};
  auto out = normalize_operator_word(alg, ordered);
  REQUIRE(out.size() == 1);
  CHECK(out[0].first == Rational(1));
  CHECK(out[0].second == ordered);

  // X2 X1 = X1 X2 - X3
  OperatorWord w21{{1, 0}};
  auto r = normalize_operator_word(alg, w21);
  REQUIRE(r.size() == 2);
  bool saw_word = false, saw_x3 = false;
  for (const auto& [c, w] : r) {
    if (w.letters == std::vector<int>{0, 1}) {
      saw_word = true;
      CHECK(c == Rational(1));
    }
    if (w.letters == std::vector<int>{2}) {
      saw_x3 = true;
      CHECK(c == Rational(-1));
    }
  }
  CHECK(saw_word);
  CHECK(saw_x3);
}

TEST_CASE("straightened words act identically on low-degree polynomials") {
  for (auto base : {StratifiedAlgebra::heisenberg3(), StratifiedAlgebra::engel4()}) {
    GroupOps ops(base);
    const auto& alg = ops.algebra();
    const int n = alg.dim();
    const int s = alg.step();

    // all words of length <= s (not merely weight <= s: words above weight s
    // are certified on the degree <= s test space only)
    std::vector<OperatorWord> words;
    std::vector<int> cur;
    auto gen = [&](auto&& self, int depth) -> void {
      if (!cur.empty()) words.push_back(OperatorWord{cur});
      if (depth == s) return;
      for (int e = 0; e < n; ++e) {
        cur.push_back(e);
        self(self, depth + 1);
        cur.pop_back();
      }
    };
    gen(gen, 0);

    // monomial test space of weighted degree <= s
    std::vector<Polynomial<Rational>> monos;
    std::vector<std::uint8_t> exps(n, 0);
    auto genm = [&](auto&& self, int var, int wleft) -> void {
      monos.push_back(Polynomial<Rational>::monomial(n, exps, Rational(1)));
      if (var == n) return;
      for (int v = var; v < n; ++v) {
        if (alg.weight(v) > wleft) continue;
        exps[v] += 1;
        self(self, v, wleft - alg.weight(v));
        exps[v] -= 1;
      }
    };
    genm(genm, 0, s);

    for (const auto& w : words) {
      auto combo = normalize_operator_word(alg, w);
      for (const auto& [c, ow] : combo) CHECK(is_ordered(ow));
      for (const auto& [c, ow] : combo) CHECK(word_weight(alg, ow) == word_weight(alg, w));
      for (const auto& mono : monos) {
        auto direct = apply_word(ops, w, mono);
        Polynomial<Rational> rebuilt(n);
        for (const auto& [c, ow] : combo) rebuilt += apply_word(ops, ow, mono) * c;
        CHECK(direct == rebuilt);
      }
    }
  }
}

TEST_CASE("bundled spec files load, validate, and match the builtins") {
  const std::string dir = std::string(CARNOT_SOURCE_DIR) + "/data/groups/";
  for (auto builtin : {StratifiedAlgebra::heisenberg3(), StratifiedAlgebra::heisenberg5(),
                       StratifiedAlgebra::engel4()}) {
    auto loaded = StratifiedAlgebra::from_json_file(dir + builtin.name() + ".json");
    CHECK(validate_algebra(loaded).ok());
    CHECK(loaded.step() == builtin.step());
    CHECK(loaded.dim() == builtin.dim());
    GroupOps a(builtin), b(loaded);
    Rng rng(99);
    for (int t = 0; t < 10; ++t) {
      auto p = random_rational_point(a, rng);
      auto q = random_rational_point(a, rng);
      CHECK(a.product(p, q) == b.product(p, q));
    }
  }
}

TEST_CASE("json round trip preserves the table") {
  auto alg = StratifiedAlgebra::engel4();
  auto j = alg.to_json();
  auto back = StratifiedAlgebra::from_json(j);
  CHECK(validate_algebra(back).ok());
  GroupOps a(alg), b(back);
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    auto p = random_rational_point(a, rng);
    auto q = random_rational_point(a, rng);
    CHECK(a.product(p, q) == b.product(p, q));
  }
}
