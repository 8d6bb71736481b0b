#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "carnot/harness.hpp"
#include "carnot/rng.hpp"

using namespace carnot;

namespace {

PointCloud dyadic_line_cloud(int J) {
  std::vector<double> xs{0.0};
  for (int j = 0; j <= J; ++j) xs.push_back(std::ldexp(1.0, j) / 3.0);
  return make_euclidean_cloud(1, xs);
}

}  // namespace

TEST_CASE("heisenberg ball generation") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  auto b2 = generate_heisenberg_ball(ops, 2.0);
  bool has_id = false, has_e1 = false, has_me1 = false, has_e2 = false, has_me2 = false;
  for (int i = 0; i < b2.size(); ++i) {
    const double* p = b2.point(i);
    if (p[0] == 0 && p[1] == 0 && p[2] == 0) has_id = true;
    if (p[0] == 1 && p[1] == 0 && p[2] == 0) has_e1 = true;
    if (p[0] == -1 && p[1] == 0 && p[2] == 0) has_me1 = true;
    if (p[0] == 0 && p[1] == 1 && p[2] == 0) has_e2 = true;
    if (p[0] == 0 && p[1] == -1 && p[2] == 0) has_me2 = true;
  }
  CHECK(has_id);
  CHECK(has_e1);
  CHECK(has_me1);
  CHECK(has_e2);
  CHECK(has_me2);

  // growth exponent n_h = 4: count(2R)/count(R) within [8, 32]
  const long c4 = generate_heisenberg_ball(ops, 4.0).size();
  const long c8 = generate_heisenberg_ball(ops, 8.0).size();
  const long c16 = generate_heisenberg_ball(ops, 16.0, 4000000).size();
  MESSAGE("ball counts: ", c4, " ", c8, " ", c16);
  CHECK(static_cast<double>(c8) / c4 >= 8.0);
  CHECK(static_cast<double>(c8) / c4 <= 32.0);
  CHECK(static_cast<double>(c16) / c8 >= 8.0);
  CHECK(static_cast<double>(c16) / c8 <= 32.0);

  CHECK_THROWS(generate_heisenberg_ball(ops, 1.5));
  CHECK_THROWS(generate_heisenberg_ball(ops, 64.0, 1000));

  // pairwise separation of the lattice ball: calibrated minimum is 1
  auto b4 = generate_heisenberg_ball(ops, 4.0);
  double minsep = 1e30;
  for (int i = 0; i < b4.size(); ++i)
    for (int j = i + 1; j < b4.size(); ++j) minsep = std::min(minsep, b4.dist(i, j));
  CHECK(minsep == doctest::Approx(1.0));
}

TEST_CASE("distortion basics") {
  auto cloud = make_euclidean_cloud(1, {0.0, 1.0});
  // isometric two-point map at eps = 0
  std::vector<std::vector<double>> vals{{0.0}, {1.0}};
  auto rep = distortion(cloud, vals, 0.0);
  CHECK(rep.distortion == doctest::Approx(1.0));

  // scaling all distances by 5 leaves distortion at 1
  std::vector<std::vector<double>> scaled{{0.0}, {5.0}};
  auto rep5 = distortion(cloud, scaled, 0.0);
  CHECK(rep5.distortion == doctest::Approx(1.0));

  // collapsing a pair reports infinite distortion with a witness
  auto three = make_euclidean_cloud(1, {0.0, 1.0, 2.0});
  std::vector<std::vector<double>> collapse{{0.0}, {0.0}, {1.0}};
  auto repc = distortion(three, collapse, 0.0);
  CHECK(repc.collapsed);
  CHECK(std::isinf(repc.distortion));
  CHECK(repc.con_p == 0);
  CHECK(repc.con_q == 1);
}

TEST_CASE("distortion invariances and witness reproduction") {
  Rng rng(51);
  const int n = 60, D = 6;
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.uniform(0.0, 10.0);
  auto cloud = make_euclidean_cloud(1, xs);
  std::vector<std::vector<double>> vals(n, std::vector<double>(D));
  for (auto& v : vals)
    for (auto& c : v) c = rng.uniform(-1, 1);

  const double eps = 0.125;
  auto rep = distortion(cloud, vals, eps);

  // witnesses reproduce the reported ratios on recomputation
  auto ratio = [&](int p, int q) {
    double acc = 0.0;
    for (int c = 0; c < D; ++c) acc += (vals[p][c] - vals[q][c]) * (vals[p][c] - vals[q][c]);
    return std::sqrt(acc) / std::pow(cloud.dist(p, q), 1.0 - eps);
  };
  CHECK(ratio(rep.exp_p, rep.exp_q) == doctest::Approx(rep.expansion).epsilon(1e-12));
  CHECK(ratio(rep.con_p, rep.con_q) == doctest::Approx(rep.contraction).epsilon(1e-12));

  // global scaling of the embedding cancels
  auto vals2 = vals;
  for (auto& v : vals2)
    for (auto& c : v) c *= 7.5;
  auto rep2 = distortion(cloud, vals2, eps);
  CHECK(rep2.distortion == doctest::Approx(rep.distortion).epsilon(1e-12));

  // isometries of the target (two Householder reflections) cancel
  std::vector<double> u(D), w(D);
  for (auto& c : u) c = rng.normal();
  for (auto& c : w) c = rng.normal();
  auto normalize = [&](std::vector<double>& v) {
    double nn = 0.0;
    for (double c : v) nn += c * c;
    for (double& c : v) c /= std::sqrt(nn);
  };
  normalize(u);
  normalize(w);
  auto reflect = [&](std::vector<double> v, const std::vector<double>& h) {
    double d = 0.0;
    for (int c = 0; c < D; ++c) d += v[c] * h[c];
    for (int c = 0; c < D; ++c) v[c] -= 2.0 * d * h[c];
    return v;
  };
  auto vals3 = vals;
  for (auto& v : vals3) v = reflect(reflect(v, u), w);
  auto rep3 = distortion(cloud, vals3, eps);
  CHECK(rep3.distortion == doctest::Approx(rep.distortion).epsilon(1e-10));

  // determinism for the sampled path: same seed, same report
  std::vector<double> big;
  const int nb = 4000;
  for (int i = 0; i < nb; ++i) big.push_back(rng.uniform(0, 100));
  auto bigcloud = make_euclidean_cloud(1, big);
  std::vector<std::vector<double>> bigvals(nb, std::vector<double>(2));
  for (auto& v : bigvals)
    for (auto& c : v) c = rng.uniform(-1, 1);
  auto ra = distortion(bigcloud, bigvals, eps, 9);
  auto rb = distortion(bigcloud, bigvals, eps, 9);
  CHECK(ra.distortion == rb.distortion);
  CHECK(ra.exp_p == rb.exp_p);
  CHECK(ra.con_q == rb.con_q);
}

TEST_CASE("slope fit recovers synthetic laws") {
  std::vector<SweepRow> rows;
  for (double eps : {0.25, 0.125, 0.0625, 0.03125}) {
    SweepRow r;
    r.eps = eps;
    r.distortion = 3.0 / std::sqrt(eps);
    r.ok = true;
    rows.push_back(r);
  }
  auto fit = fit_loglog_slope(rows);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));

  for (auto& r : rows) r.distortion = 3.0 / r.eps;
  auto fit2 = fit_loglog_slope(rows);
  CHECK(fit2.slope == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS(sweep_epsilon(make_euclidean_cloud(1, {0.0, 1.0}),
                             [](const PointCloud&, double) { return EmbeddingMap{}; },
                             {0.25, 0.125}));
}

TEST_CASE("holder-rate separation on the dyadic line: sqrt vs linear in 1/eps") {
  auto cloud = dyadic_line_cloud(60);
  AssouadOptions opt;
  opt.extra_coarse_scales = 160;

  auto blocked_fam = assouad_family(cloud, false, opt);
  auto shared_fam = assouad_family(cloud, true, opt);

  const std::vector<double> eps_list{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  std::vector<std::pair<double, double>> blocked_pts, shared_pts;
  for (double eps : eps_list) {
    auto mb = assemble_weierstrass(blocked_fam, eps, cloud.point_vec(0));
    auto ms = assemble_weierstrass(shared_fam, eps, cloud.point_vec(0));
    const auto vb = embed_all(cloud, mb);
    const auto vs = embed_all(cloud, ms);
    const double hb = measure_holder(cloud, vb, eps).constant;
    const double hs = measure_holder(cloud, vs, eps).constant;
    blocked_pts.emplace_back(eps, hb);
    shared_pts.emplace_back(eps, hs);
    MESSAGE("eps=", eps, " holder blocked=", hb, " shared=", hs,
            " predicted M=", predicted_holder_M(2.0, eps));
  }
  const auto fb = fit_loglog(blocked_pts);
  const auto fs = fit_loglog(shared_pts);
  MESSAGE("blocked slope ", fb.slope, ", shared slope ", fs.slope);
  CHECK(fb.slope >= -0.65);
  CHECK(fb.slope <= -0.35);
  CHECK(fs.slope <= -0.8);
}

TEST_CASE("report generation") {
  namespace fs = std::filesystem;
  const std::string dir = "report_test_dir";
  fs::create_directory(dir);
  CHECK_THROWS(run_report(dir));  // empty: error listing expected files

  {
    std::ofstream a(dir + "/distortion.json");
    a << R"({"kind":"distortion","distortion":2.5})";
    std::ofstream b(dir + "/frame.json");
    b << R"({"kind":"extend-frame","ok":true})";
  }
  auto rep1 = run_report(dir);
  auto rep2 = run_report(dir);
  CHECK(rep1.dump() == rep2.dump());  // idempotent
  CHECK(rep1["pass"] == 1);
  CHECK(rep1["artifacts"].size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("cloud csv round trip") {
  GroupOps ops(StratifiedAlgebra::heisenberg3());
  auto ball = generate_heisenberg_ball(ops, 2.0);
  write_cloud_csv("cloud_test.csv", ball, carnot_coordinate_names(ops.algebra()));
  auto [dim, coords] = read_cloud_csv("cloud_test.csv");
  CHECK(dim == 3);
  CHECK(coords == ball.raw());
  std::remove("cloud_test.csv");
}
