#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "carnot/oscillator.hpp"
#include "carnot/rng.hpp"

using namespace carnot;

namespace {

std::vector<double> sample_ball(const GroupOps& ops, double radius, Rng& rng) {
  const int s = ops.step();
  for (;;) {
    std::vector<double> p(ops.dim());
    for (int e = 0; e < ops.dim(); ++e) {
      const double w = ops.algebra().weight(e);
      const double lim = std::pow(radius, w);
      p[e] = rng.uniform(-lim, lim);
    }
    (void)s;
    if (ops.quasinorm(p) < radius) return p;
  }
}

}  // namespace

TEST_CASE("veronese components on h3") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  auto vm = veronese_map(ops);
  REQUIRE(vm.map.comps.size() == 9);

  // includes x1, x2, x3 with unit coefficient, x1^2/2, x1 x2, x3^2/2
  const auto x1 = Polynomial<Rational>::variable(3, 0);
  const auto x3 = Polynomial<Rational>::variable(3, 2);
  bool has_x1 = false, has_sq = false, has_x1x2 = false, has_x3sq = false;
  for (const auto& c : vm.map.comps) {
    if (c == x1) has_x1 = true;
    if (c == x1 * x1 * Rational(1, 2)) has_sq = true;
    if (c == x1 * Polynomial<Rational>::variable(3, 1)) has_x1x2 = true;
    if (c == x3 * x3 * Rational(1, 2)) has_x3sq = true;
  }
  CHECK(has_x1);
  CHECK(has_sq);
  CHECK(has_x1x2);
  CHECK(has_x3sq);

  // evaluation at the identity is the zero vector
  std::vector<Rational> zero(3, Rational(0));
  for (const auto& c : vm.map.comps) CHECK(c.eval(zero) == Rational(0));

  // X1 X2 applied to the x1x2-component evaluates to 1 at the identity
  OperatorWord w12{{0, 1}};
  for (std::size_t i = 0; i < vm.map.comps.size(); ++i)
    if (vm.map.comps[i] == x1 * Polynomial<Rational>::variable(3, 1))
      CHECK(apply_word(ops, w12, vm.map.comps[i]).eval(zero) == Rational(1));
}

TEST_CASE("veronese wedge is exactly 1 at random rational points") {
  Rng rng(31);
  for (auto alg : {StratifiedAlgebra::heisenberg3(), StratifiedAlgebra::engel4()}) {
    GroupOps ops(alg);
    auto vm = veronese_map(ops);
    std::vector<Rational> id(ops.dim(), Rational(0));
    CHECK(veronese_wedge_exact(ops, vm, id) == Rational(1));
    for (int t = 0; t < 25; ++t) {
      std::vector<Rational> p(ops.dim());
      for (auto& c : p) c = Rational(rng.rational_int(-6, 6), rng.rational_int(1, 5));
      CHECK(veronese_wedge_exact(ops, vm, p) == Rational(1));
    }
  }
}

TEST_CASE("cutoff profile and gauge") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  CHECK(cutoff_profile(0.0) == 1.0);
  CHECK(cutoff_profile(1.05) == 1.0);
  CHECK(cutoff_profile(1.5) == 0.0);
  CHECK(cutoff_profile(1.27) > 0.0);
  CHECK(cutoff_profile(1.27) < 1.0);

  // gauge <= quasinorm, both 1-homogeneous
  Rng rng(32);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-4, 4)};
    CHECK(ops.smooth_gauge(p) <= ops.quasinorm(p) + 1e-12);
    const double lam = std::exp(rng.uniform(-1, 1));
    CHECK(ops.smooth_gauge(ops.dilate(lam, p)) ==
          doctest::Approx(lam * ops.smooth_gauge(p)).epsilon(1e-10));
  }
}

TEST_CASE("pasted oscillator pieces and supports") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  Rng rng(33);
  std::vector<double> coords;
  for (int i = 0; i < 400; ++i) {
    auto p = sample_ball(ops, 4.0, rng);
    coords.insert(coords.end(), p.begin(), p.end());
  }
  auto cloud = make_gauge_cloud(ops, coords);
  auto net = greedy_maximal_net(cloud, 1.0);
  auto coloring = color_net(net, 3.0);
  CHECK(coloring.n_colors <= 2401);  // 7^{n_h}
  auto osc = paste_oscillator(ops, net, coloring);
  const int V = osc.components_per_color();

  auto vm = veronese_map(ops);
  auto vd = vm.map.convert<double>();

  // at a net point g, the piece of g's color equals the pure Veronese value
  // at g^{-1} g = 0 when no same-color translate interferes; and points
  // gauge-far from a whole color leave that block at zero
  const auto classes = coloring.classes();
  for (std::size_t a = 0; a < classes.size() && a < 8; ++a) {
    const int g_idx = classes[a][0];
    const auto g = cloud.point_vec(g_idx);
    const auto val = osc(g);
    bool interference = false;
    for (int other : classes[a])
      if (other != g_idx && cloud.dist(other, g_idx) < 1.5) interference = true;
    if (!interference) {
      // block a equals veronese(0) = 0 vector plus eta(0) * veronese(0)...
      // the translate at g contributes eta(0) * phi0(0) = 0; off-identity
      // pieces vanish by support, so compare against a shifted probe too
      for (int c = 0; c < V; ++c) CHECK(val[a * V + c] == doctest::Approx(0.0).epsilon(1e-12));
      // probe a nearby point where the covering piece is pure Veronese
      std::vector<double> step{0.25, -0.2, 0.1};
      const auto probe = ops.product(g, step);
      const auto pval = osc(probe);
      const auto rel = ops.product(ops.inverse(g), probe);
      REQUIRE(ops.smooth_gauge(rel) < 1.1);  // inside the eta = 1 plateau
      const auto pure = vd.eval(rel);
      bool contaminated = false;
      for (int other : classes[a]) {
        if (other == g_idx) continue;
        const auto rel2 = ops.product(ops.inverse(cloud.point_vec(other)), probe);
        if (ops.smooth_gauge(rel2) < 1.45) contaminated = true;
      }
      if (!contaminated)
        for (int c = 0; c < V; ++c)
          CHECK(pval[a * V + c] == doctest::Approx(pure[c]).epsilon(1e-10));
    }
  }

  // a point far outside every 1.5-ball of one color contributes zero there
  int far_color = -1, far_point = -1;
  for (int p = 0; p < cloud.size() && far_color < 0; ++p)
    for (std::size_t a = 0; a < classes.size(); ++a) {
      bool all_far = true;
      for (int g : classes[a])
        if (cloud.dist(g, p) < 1.6) all_far = false;
      if (all_far) {
        far_color = static_cast<int>(a);
        far_point = p;
        break;
      }
    }
  if (far_color >= 0) {
    const auto val = osc(cloud.point_vec(far_point));
    for (int c = 0; c < V; ++c) CHECK(val[far_color * V + c] == 0.0);
  }
}

TEST_CASE("pasted oscillator keeps the wedge above 0.9 on sampled points") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  Rng rng(34);
  std::vector<double> coords;
  for (int i = 0; i < 250; ++i) {
    auto p = sample_ball(ops, 4.0, rng);
    coords.insert(coords.end(), p.begin(), p.end());
  }
  auto cloud = make_gauge_cloud(ops, coords);
  auto net = greedy_maximal_net(cloud, 1.0);
  auto coloring = color_net(net, 3.0);
  auto osc = paste_oscillator(ops, net, coloring);
  auto f = osc.as_fn();

  double min_wedge = 1e30;
  for (int p = 0; p < cloud.size(); p += 5) {
    const double w = wedge_lower_bound_numeric(ops, f, cloud.point_vec(p), 4e-3);
    min_wedge = std::min(min_wedge, w);
  }
  MESSAGE("min pasted wedge: ", min_wedge);
  CHECK(min_wedge >= 0.9);
}

TEST_CASE("pure veronese numeric wedge matches the exact value") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  auto vm = veronese_map(ops);
  auto vd = vm.map.convert<double>();
  MapFn f = [&](const std::vector<double>& p) { return vd.eval(p); };
  Rng rng(35);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double w = wedge_lower_bound_numeric(ops, f, p, 1e-3);
    CHECK(w == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("finite-difference derivative norms of the pasted map are uniform in the radius") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());

  auto max_deriv = [&](double radius, int npts, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> coords;
    for (int i = 0; i < npts; ++i) {
      auto p = sample_ball(ops, radius, rng);
      coords.insert(coords.end(), p.begin(), p.end());
    }
    auto cloud = make_gauge_cloud(ops, coords);
    auto net = greedy_maximal_net(cloud, 1.0);
    auto coloring = color_net(net, 3.0);
    auto osc = paste_oscillator(ops, net, coloring);
    auto f = osc.as_fn();
    double mx = 0.0;
    for (int p = 0; p < cloud.size(); p += 10)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          for (int c = 0; c < 2; ++c) {
            auto d3 = fd_word_derivative(ops, f, {a, b, c}, cloud.point_vec(p), 2e-2);
            double nn = 0.0;
            for (double x : d3) nn += x * x;
            mx = std::max(mx, std::sqrt(nn));
          }
          auto d2 = fd_word_derivative(ops, f, {a, b}, cloud.point_vec(p), 2e-2);
          double nn = 0.0;
          for (double x : d2) nn += x * x;
          mx = std::max(mx, std::sqrt(nn));
        }
    return mx;
  };

  // C^j proxy for j <= 3: the sup does not grow with the sampled radius
  // (locality of the translates), and stays under a generous absolute cap
  const double small = max_deriv(3.0, 150, 36);
  const double large = max_deriv(6.0, 300, 37);
  MESSAGE("max FD derivative norm: radius 3 -> ", small, ", radius 6 -> ", large);
  CHECK(small < 1e4);
  CHECK(large < 1e4);
  CHECK(large < 2.0 * small + 10.0);
}
