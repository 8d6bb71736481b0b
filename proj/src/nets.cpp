#include "carnot/nets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "carnot/kernels.hpp"

namespace carnot {

PointCloud make_euclidean_cloud(int dim, std::vector<double> coords) {
  auto metric = [dim](const double* a, const double* b) {
    return std::sqrt(kernels::squared_distance(a, b, dim));
  };
  return PointCloud(dim, std::move(coords), metric, false);
}

namespace {

PointCloud make_group_cloud(const GroupOps& ops, std::vector<double> coords, bool gauge) {
  const int n = ops.dim();
  // the law and weights are copied into the closure so the cloud owns its oracle
  const PolynomialMap<double> law = ops.law().convert<double>();
  const std::vector<int> weights = ops.algebra().weights();
  const int gauge_exp = 2 * [&] {
    long f = 1;
    for (int i = 2; i <= ops.step(); ++i) f *= i;
    return static_cast<int>(f);
  }();
  auto metric = [n, law, weights, gauge, gauge_exp](const double* a, const double* b) {
    std::vector<double> xy(2 * n);
    for (int i = 0; i < n; ++i) xy[i] = -a[i];
    for (int i = 0; i < n; ++i) xy[n + i] = b[i];
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = law.comps[i].eval(xy);
      if (gauge) {
        double t = 1.0;
        const int p = gauge_exp / weights[i];
        const double az = std::fabs(z);
        for (int q = 0; q < p; ++q) t *= az;
        acc += t;
      } else {
        acc += std::pow(std::fabs(z), 1.0 / weights[i]);
      }
    }
    return gauge ? std::pow(acc, 1.0 / gauge_exp) : acc;
  };
  return PointCloud(n, std::move(coords), metric, true);
}

}  // namespace

PointCloud make_carnot_cloud(const GroupOps& ops, std::vector<double> coords) {
  return make_group_cloud(ops, std::move(coords), false);
}

PointCloud make_gauge_cloud(const GroupOps& ops, std::vector<double> coords) {
  return make_group_cloud(ops, std::move(coords), true);
}

Net greedy_maximal_net(const PointCloud& cloud, double delta) {
  if (cloud.size() == 0) throw std::invalid_argument("net of an empty cloud");
  if (!(delta > 0)) throw std::invalid_argument("net separation must be positive");
  Net net{&cloud, delta, {}};
  for (int i = 0; i < cloud.size(); ++i) {
    bool admit = true;
    for (int m : net.members)
      if (cloud.dist(m, i) < delta) {
        admit = false;
        break;
      }
    if (admit) net.members.push_back(i);
  }
  return net;
}

NetReport verify_net(const Net& net) {
  NetReport rep;
  const auto& cloud = *net.cloud;
  for (std::size_t a = 0; a < net.members.size(); ++a)
    for (std::size_t b = a + 1; b < net.members.size(); ++b)
      if (cloud.dist(net.members[a], net.members[b]) < net.delta)
        rep.separation_violations.emplace_back(net.members[a], net.members[b]);
  for (int i = 0; i < cloud.size(); ++i) {
    bool covered = false;
    for (int m : net.members)
      if (cloud.dist(m, i) < net.delta) {
        covered = true;
        break;
      }
    if (!covered) rep.covering_violations.push_back(i);
  }
  return rep;
}

long net_ball_count(const Net& net, double radius, int center) {
  long count = 0;
  for (int m : net.members)
    if (net.cloud->dist(center, m) < radius) ++count;
  return count;
}

bool ball_count_check(const Net& net, double radius, int center, int hdim) {
  const double bound = std::pow(2.0 * radius / net.delta + 1.0, hdim);
  return static_cast<double>(net_ball_count(net, radius, center)) <= bound;
}

Coloring color_net(const Net& net, double coarse_sep) {
  Coloring col{&net, coarse_sep, std::vector<int>(net.members.size(), -1), 0};
  const auto& cloud = *net.cloud;
  for (std::size_t i = 0; i < net.members.size(); ++i) {
    std::vector<bool> used(col.n_colors + 1, false);
    for (std::size_t j = 0; j < i; ++j)
      if (cloud.dist(net.members[i], net.members[j]) < coarse_sep) used[col.color_of[j]] = true;
    int c = 0;
    while (used[c]) ++c;
    col.color_of[i] = c;
    col.n_colors = std::max(col.n_colors, c + 1);
  }
  return col;
}

std::vector<std::vector<int>> Coloring::classes() const {
  std::vector<std::vector<int>> out(n_colors);
  for (std::size_t i = 0; i < color_of.size(); ++i)
    out[color_of[i]].push_back(net->members[i]);
  return out;
}

DoublingProfile estimate_doubling(const Net& net, int max_m) {
  DoublingProfile prof;
  double best = 1.0;
  for (int m : net.members)
    for (int e = 0; e <= max_m; ++e) {
      const long c = net_ball_count(net, std::ldexp(net.delta, e), m);
      if (c > 0) best = std::max(best, std::pow(static_cast<double>(c), 1.0 / (e + 1)));
    }
  prof.K_est = best;
  return prof;
}

double quasimetric(const GroupOps& ops, const std::vector<double>& p,
                   const std::vector<double>& q) {
  return ops.quasimetric(p, q);
}

namespace {

// endpoint defect coordinates of the control path p exp(u_1)...exp(u_T) vs q
std::vector<double> endpoint_residual_coords(const GroupOps& ops, const std::vector<double>& p,
                                             const std::vector<double>& q,
                                             const std::vector<double>& controls, int T) {
  const int k = ops.k1();
  std::vector<double> cur = p;
  std::vector<double> u(k);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < k; ++i) u[i] = controls[t * k + i];
    cur = ops.product(cur, ops.exp_horizontal(u));
  }
  return ops.product(ops.inverse(cur), q);
}

double path_length(const std::vector<double>& controls, int T, int k) {
  double len = 0.0;
  for (int t = 0; t < T; ++t)
    len += std::sqrt(kernels::squared_norm(controls.data() + t * k, k));
  return len;
}

// One damped Gauss-Newton pass on the stacked residual
// [ sqrt(mu_end) * endpoint_coords ; sqrt(mu_len) * controls ].
// Returns true if it made progress.
bool gauss_newton(const GroupOps& ops, const std::vector<double>& p, const std::vector<double>& q,
                  std::vector<double>& controls, int T, double mu_end, double mu_len,
                  int iterations) {
  const int k = ops.k1();
  const int n = ops.dim();
  const int np = T * k;
  const double fd = 1e-6;

  auto objective = [&](const std::vector<double>& c) {
    const auto r = endpoint_residual_coords(ops, p, q, c, T);
    double f = mu_end * kernels::squared_norm(r.data(), r.size());
    f += mu_len * kernels::squared_norm(c.data(), c.size());
    return f;
  };

  double lambda = 1e-3;
  double fcur = objective(controls);
  bool improved = false;
  for (int it = 0; it < iterations; ++it) {
    const auto r0 = endpoint_residual_coords(ops, p, q, controls, T);
    // numeric Jacobian of the endpoint coordinates
    std::vector<double> jac(static_cast<std::size_t>(n) * np);
    std::vector<double> cpert = controls;
    for (int pvar = 0; pvar < np; ++pvar) {
      const double save = cpert[pvar];
      cpert[pvar] = save + fd;
      const auto rp = endpoint_residual_coords(ops, p, q, cpert, T);
      cpert[pvar] = save - fd;
      const auto rm = endpoint_residual_coords(ops, p, q, cpert, T);
      cpert[pvar] = save;
      for (int row = 0; row < n; ++row)
        jac[static_cast<std::size_t>(row) * np + pvar] = (rp[row] - rm[row]) / (2 * fd);
    }
    // normal equations: (mu_end J^T J + (mu_len + lambda) I) step = -(mu_end J^T r0 + mu_len c)
    std::vector<std::vector<double>> h(np, std::vector<double>(np, 0.0));
    std::vector<double> g(np, 0.0);
    for (int row = 0; row < n; ++row) {
      const double* jrow = jac.data() + static_cast<std::size_t>(row) * np;
      for (int a = 0; a < np; ++a) {
        g[a] += mu_end * jrow[a] * r0[row];
        for (int b = a; b < np; ++b) h[a][b] += mu_end * jrow[a] * jrow[b];
      }
    }
    for (int a = 0; a < np; ++a) {
      g[a] += mu_len * controls[a];
      for (int b = a; b < np; ++b) h[b][a] = h[a][b];
    }

    bool stepped = false;
    for (int damp = 0; damp < 8 && !stepped; ++damp) {
      std::vector<std::vector<double>> hl = h;
      for (int a = 0; a < np; ++a) hl[a][a] += mu_len + lambda;
      // Cholesky solve
      bool okchol = true;
      for (int i = 0; i < np && okchol; ++i) {
        double d = hl[i][i];
        for (int kk = 0; kk < i; ++kk) d -= hl[i][kk] * hl[i][kk];
        if (d <= 0) {
          okchol = false;
          break;
        }
        hl[i][i] = std::sqrt(d);
        for (int j = i + 1; j < np; ++j) {
          double v = hl[j][i];
          for (int kk = 0; kk < i; ++kk) v -= hl[j][kk] * hl[i][kk];
          hl[j][i] = v / hl[i][i];
        }
      }
      if (!okchol) {
        lambda *= 10;
        continue;
      }
      std::vector<double> step(g);
      for (int i = 0; i < np; ++i) {
        for (int kk = 0; kk < i; ++kk) step[i] -= hl[i][kk] * step[kk];
        step[i] /= hl[i][i];
      }
      for (int i = np - 1; i >= 0; --i) {
        for (int kk = i + 1; kk < np; ++kk) step[i] -= hl[kk][i] * step[kk];
        step[i] /= hl[i][i];
      }
      std::vector<double> trial = controls;
      for (int a = 0; a < np; ++a) trial[a] -= step[a];
      const double ftrial = objective(trial);
      if (ftrial < fcur) {
        controls = std::move(trial);
        fcur = ftrial;
        lambda = std::max(1e-9, lambda * 0.3);
        stepped = true;
        improved = true;
      } else {
        lambda *= 10;
      }
    }
    if (!stepped) break;
    if (fcur < 1e-26) break;
  }
  return improved;
}

}  // namespace

CcResult cc_upper_bound(const GroupOps& ops, const std::vector<double>& p,
                        const std::vector<double>& q, const CcOptions& opt) {
  if (opt.n_segments < 1) throw std::invalid_argument("n_segments must be >= 1");
  const int k = ops.k1();
  const int T = opt.n_segments;
  Rng rng(opt.seed);

  CcResult best;
  best.length = std::numeric_limits<double>::infinity();

  const double qn = ops.quasimetric(p, q);
  if (qn == 0.0) return CcResult{0.0, true, 0.0, 0};
  const double tol = opt.endpoint_tol * (1.0 + qn);

  for (int restart = 0; restart <= opt.restarts; ++restart) {
    std::vector<double> controls(static_cast<std::size_t>(T) * k, 0.0);
    // straight init toward the horizontal displacement, then noise on retries
    const auto rel = ops.product(ops.inverse(p), q);
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < k; ++i) controls[t * k + i] = rel[i] / T;
    if (restart > 0) {
      const double amp = 0.5 * qn * restart / opt.restarts + 0.1;
      for (auto& c : controls) c += amp * rng.normal() / T * 4.0;
    }

    // phase 1: reach the endpoint
    gauss_newton(ops, p, q, controls, T, 1.0, 0.0, opt.iterations);
    auto res = endpoint_residual_coords(ops, p, q, controls, T);
    double defect = ops.quasinorm(res);
    if (defect > tol) continue;

    // phase 2: shorten while pinning the endpoint with a growing penalty
    for (double mu = 1.0; mu <= 1e8; mu *= 100.0) {
      auto trial = controls;
      gauss_newton(ops, p, q, trial, T, mu, 1.0 / mu, opt.iterations / 4);
      const auto r2 = endpoint_residual_coords(ops, p, q, trial, T);
      if (ops.quasinorm(r2) <= tol && path_length(trial, T, k) < path_length(controls, T, k))
        controls = std::move(trial);
    }
    // re-pin the endpoint exactly
    gauss_newton(ops, p, q, controls, T, 1.0, 0.0, opt.iterations / 2);
    res = endpoint_residual_coords(ops, p, q, controls, T);
    defect = ops.quasinorm(res);
    if (defect > tol) continue;

    const double len = path_length(controls, T, k);
    if (len < best.length) {
      best.length = len;
      best.feasible = true;
      best.endpoint_residual = defect;
    }
  }

  if (!best.feasible) {
    best.length = std::numeric_limits<double>::infinity();
    const auto rel = ops.product(ops.inverse(p), q);
    best.endpoint_residual = ops.quasinorm(rel);
  }
  best.iterations_used = opt.iterations;
  return best;
}

CalibrationResult calibrate_equivalence(const GroupOps& ops, const PointCloud& cloud,
                                        int samples, const CcOptions& opt, Rng& rng) {
  CalibrationResult cal;
  cal.c_low = std::numeric_limits<double>::infinity();
  cal.c_high = 0.0;
  const int npts = cloud.size();
  if (npts < 2) throw std::invalid_argument("calibration needs at least two points");
  int used = 0;
  for (int s = 0; s < samples; ++s) {
    const int i = static_cast<int>(rng.below(npts));
    int j = static_cast<int>(rng.below(npts));
    if (i == j) continue;
    const auto p = cloud.point_vec(i);
    const auto q = cloud.point_vec(j);
    const double quasi = ops.quasimetric(p, q);
    if (quasi == 0.0) continue;
    CcOptions o = opt;
    o.seed = opt.seed + 1000003ULL * s;
    const auto cc = cc_upper_bound(ops, p, q, o);
    if (!cc.feasible) continue;
    const double ratio = cc.length / quasi;
    cal.c_low = std::min(cal.c_low, ratio);
    cal.c_high = std::max(cal.c_high, ratio);
    ++used;
  }
  cal.pairs_used = used;
  return cal;
}

}  // namespace carnot
