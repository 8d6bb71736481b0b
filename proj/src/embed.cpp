#include "carnot/embed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "carnot/kernels.hpp"
#include "carnot/linalg.hpp"
#include "carnot/parallel.hpp"

namespace carnot {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// --- bilinear form ----------------------------------------------------------

std::vector<std::vector<double>> bilinear_form_B(const GroupOps& ops, const MapFn& phi,
                                                 const MapFn& psi, const std::vector<double>& p,
                                                 double h) {
  const int k = ops.k1();
  std::vector<std::vector<double>> dphi(k), dpsi(k);
  for (int i = 0; i < k; ++i) {
    dphi[i] = fd_derivative(ops, phi, i, p, h);
    dpsi[i] = fd_derivative(ops, psi, i, p, h);
  }
  std::vector<std::vector<double>> b(k, std::vector<double>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double xij = kernels::dot(dphi[i].data(), dpsi[j].data(), dphi[i].size());
      const double xji = kernels::dot(dphi[j].data(), dpsi[i].data(), dphi[j].size());
      b[i][j] = 0.5 * (xij + xji);
    }
  return b;
}

std::vector<std::vector<double>> t_psi_rows(const GroupOps& ops, const MapFn& psi,
                                            const std::vector<double>& p, double h) {
  const int k = ops.k1();
  const int k2 = ops.algebra().stratum_dim(2);
  std::vector<std::vector<double>> rows;
  rows.reserve(k + k * (k + 1) / 2 + k2);
  for (int i = 0; i < k; ++i) rows.push_back(fd_derivative(ops, psi, i, p, h));
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) rows.push_back(fd_word_derivative(ops, psi, {i, j}, p, h));
  for (int i2 = 1; i2 <= k2; ++i2)
    rows.push_back(fd_derivative(ops, psi, ops.algebra().flat(2, i2), p, h));
  return rows;
}

ExplicitSolveResult explicit_solve(const GroupOps& ops, const MapFn& psi,
                                   const std::vector<std::vector<double>>& F,
                                   const std::vector<double>& p, double h, double rank_tol) {
  const int k = ops.k1();
  const auto rows = t_psi_rows(ops, psi, p, h);
  const int D = static_cast<int>(rows[0].size());
  if (D < static_cast<int>(rows.size()))
    throw std::invalid_argument("target dimension below k + k(k+1)/2 + k_2");

  ExplicitSolveResult out;
  out.row_wedge = linalg::wedge_norm(rows);
  linalg::Pseudoinverse pinv(rows, rank_tol);

  std::vector<double> y(rows.size(), 0.0);
  int idx = k;
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) y[idx++] = -F[i][j];
  out.phi = pinv.apply(y);
  return out;
}

// --- grids ------------------------------------------------------------------

long Grid::size() const {
  long s = 1;
  for (int c : shape) s *= c;
  return s;
}

std::vector<double> Grid::point(long flat) const {
  const int n = static_cast<int>(shape.size());
  std::vector<double> p(n);
  for (int e = n - 1; e >= 0; --e) {
    const long q = flat / shape[e];
    const long r = flat - q * shape[e];
    p[e] = origin[e] + spacing[e] * r;
    flat = q;
  }
  return p;
}

long Grid::index(const std::vector<int>& multi) const {
  long idx = 0;
  for (std::size_t e = 0; e < shape.size(); ++e) idx = idx * shape[e] + multi[e];
  return idx;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (double s : spacing) v *= s;
  return v;
}

double Grid::resolution() const {
  double r = 0.0;
  for (std::size_t e = 0; e < shape.size(); ++e)
    r = std::max(r, std::pow(spacing[e], 1.0 / ops->algebra().weight(static_cast<int>(e))));
  return r;
}

Grid centered_grid(const GroupOps& ops, double radius, int cells_per_axis) {
  Grid g;
  g.ops = &ops;
  const int n = ops.dim();
  g.shape.assign(n, cells_per_axis);
  g.origin.resize(n);
  g.spacing.resize(n);
  for (int e = 0; e < n; ++e) {
    const double span = std::pow(radius, ops.algebra().weight(e));
    g.origin[e] = -span;
    g.spacing[e] = 2.0 * span / (cells_per_axis - 1);
  }
  return g;
}

std::vector<double> GridFn::interp(const std::vector<double>& p) const {
  const int n = static_cast<int>(grid.shape.size());
  std::vector<int> lo(n);
  std::vector<double> frac(n);
  for (int e = 0; e < n; ++e) {
    double t = (p[e] - grid.origin[e]) / grid.spacing[e];
    t = std::clamp(t, 0.0, static_cast<double>(grid.shape[e] - 1));
    lo[e] = std::min(static_cast<int>(t), grid.shape[e] - 2);
    if (lo[e] < 0) lo[e] = 0;
    frac[e] = t - lo[e];
  }
  std::vector<double> out(D, 0.0);
  const int corners = 1 << n;
  std::vector<int> multi(n);
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    for (int e = 0; e < n; ++e) {
      const int bit = (c >> e) & 1;
      multi[e] = lo[e] + bit;
      w *= bit ? frac[e] : 1.0 - frac[e];
    }
    if (w == 0.0) continue;
    kernels::axpy(w, at(grid.index(multi)), out.data(), D);
  }
  return out;
}

MapFn GridFn::as_fn() const {
  // captures a copy, so the closure survives the original
  GridFn self = *this;
  return [self = std::move(self)](const std::vector<double>& p) { return self.interp(p); };
}

GridFn sample_on_grid(const Grid& grid, const MapFn& f, int D) {
  GridFn out;
  out.grid = grid;
  out.D = D;
  out.values.resize(static_cast<std::size_t>(grid.size()) * D);
  for (long i = 0; i < grid.size(); ++i) {
    const auto v = f(grid.point(i));
    std::copy(v.begin(), v.end(), out.at(i));
  }
  return out;
}

namespace {

double bump1(double t) {
  const double t2 = t * t;
  if (t2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t2));
}

}  // namespace

GridFn mollifier_lowpass(const GridFn& f, double N) {
  const Grid& grid = f.grid;
  const GroupOps& ops = *grid.ops;
  const int n = ops.dim();
  if (!(grid.resolution() < 1.0 / N))
    throw std::runtime_error("grid resolution is coarser than 1/N; refusing to low-pass");

  GridFn out;
  out.grid = grid;
  out.D = f.D;
  out.values.assign(f.values.size(), 0.0);

  const long total = grid.size();
  // The horizontal coordinates of g^{-1} p are exactly p - g, so a per-axis
  // window on stratum 1 prunes most of the double loop.
  std::vector<double> hwin(n, std::numeric_limits<double>::infinity());
  for (int e = 0; e < n; ++e)
    if (ops.algebra().weight(e) == 1) hwin[e] = 1.0 / N;
  std::vector<double> npow(n);
  for (int e = 0; e < n; ++e) npow[e] = std::pow(N, ops.algebra().weight(e));

  const PolynomialMap<double> law = ops.law().convert<double>();

  parallel_chunks(static_cast<std::size_t>(total), 128,
                  [&](std::size_t, std::size_t plo, std::size_t phi_) {
                    std::vector<double> xy(2 * n);
                    for (std::size_t pi = plo; pi < phi_; ++pi) {
                      const auto p = grid.point(static_cast<long>(pi));
                      double wsum = 0.0;
                      double* acc = out.at(static_cast<long>(pi));
                      for (long gi = 0; gi < total; ++gi) {
                        const auto g = grid.point(gi);
                        bool prune = false;
                        for (int e = 0; e < n && !prune; ++e)
                          if (std::fabs(p[e] - g[e]) >= hwin[e]) prune = true;
                        if (prune) continue;
                        for (int e = 0; e < n; ++e) xy[e] = -g[e];
                        for (int e = 0; e < n; ++e) xy[n + e] = p[e];
                        double w = 1.0;
                        for (int e = 0; e < n && w > 0.0; ++e)
                          w *= bump1(law.comps[e].eval(xy) * npow[e]);
                        if (w <= 0.0) continue;
                        wsum += w;
                        kernels::axpy(w, f.at(gi), acc, f.D);
                      }
                      if (wsum > 0.0) kernels::scale(1.0 / wsum, acc, f.D);
                    }
                  });
  return out;
}

// --- isometry field ----------------------------------------------------------

std::vector<double> IsometryField::apply(int point, const std::vector<double>& s) const {
  std::vector<double> out(D, 0.0);
  for (int j = 0; j < d0; ++j) kernels::axpy(s[j], column(point, j), out.data(), D);
  return out;
}

IsometryField build_isometry_field(const GroupOps& ops, const MapFn& psi, const PointCloud& cloud,
                                   int d0, const IsometryOptions& opt) {
  IsometryField field;
  field.cloud = &cloud;
  field.d0 = d0;
  const int k = ops.k1();
  const int k2 = ops.algebra().stratum_dim(2);
  const int m0 = k + k * (k + 1) / 2 + k2;

  const int npts = cloud.size();
  std::vector<std::vector<std::vector<double>>> gs(npts);
  field.min_row_wedge = std::numeric_limits<double>::infinity();
  int D = 0;
  for (int p = 0; p < npts; ++p) {
    auto rows = t_psi_rows(ops, psi, cloud.point_vec(p), opt.fd_step);
    D = static_cast<int>(rows[0].size());
    for (int i = 0; i < k; ++i) kernels::scale(1.0 / opt.M, rows[i].data(), rows[i].size());
    for (int i = k; i < m0; ++i) kernels::scale(opt.A, rows[i].data(), rows[i].size());
    const double wedge = linalg::wedge_norm(rows);
    field.min_row_wedge = std::min(field.min_row_wedge, wedge);
    if (!(wedge > opt.wedge_tol)) throw linalg::SingularityError(wedge * wedge);
    gs[p] = linalg::gram_schmidt(rows);
  }
  field.D = D;
  if (d0 == 0) {
    field.max_perp_residual = 0.0;
    return field;  // vacuous success
  }
  if (m0 + d0 > D) throw std::invalid_argument("not enough ambient dimensions for the isometry");

  FrameField frame;
  frame.cloud = &cloud;
  frame.D = D;
  frame.m = m0;
  frame.values.resize(static_cast<std::size_t>(m0) * npts * D);
  for (int p = 0; p < npts; ++p)
    for (int i = 0; i < m0; ++i) std::copy(gs[p][i].begin(), gs[p][i].end(), frame.at(i, p));
  frame.lipschitz_bound = 1.0;
  const auto val = verify_frame(frame, 50000, opt.seed);
  frame.lipschitz_bound = std::max(1e-6, val.max_lip_ratio * 1.05);

  auto rep = extend_frame_repeated(cloud, frame, d0, opt.K, opt.seed);
  field.extension_steps = rep.steps;

  field.columns.resize(static_cast<std::size_t>(npts) * d0 * D);
  for (int p = 0; p < npts; ++p)
    for (int j = 0; j < d0; ++j)
      std::copy(rep.frame.at(m0 + j, p), rep.frame.at(m0 + j, p) + D,
                field.columns.begin() + (static_cast<std::size_t>(p) * d0 + j) * D);

  // audit: every column is perpendicular to the raw first and second
  // derivative rows of psi
  double worst = 0.0;
  for (int p = 0; p < npts; ++p) {
    const auto rows = t_psi_rows(ops, psi, cloud.point_vec(p), opt.fd_step);
    for (int j = 0; j < d0; ++j)
      for (const auto& r : rows)
        worst = std::max(worst,
                         std::fabs(kernels::dot(field.column(p, j), r.data(), D)) /
                             std::max(1.0, std::sqrt(kernels::squared_norm(r.data(), D))));
  }
  field.max_perp_residual = worst;
  return field;
}

// --- Weierstrass -------------------------------------------------------------

int LacunaryFamily::total_dim() const {
  if (shared_block) return dims.empty() ? 0 : *std::max_element(dims.begin(), dims.end());
  int t = 0;
  for (int d : dims) t += d;
  return t;
}

double predicted_holder_M(double A, double eps) {
  return 1.0 / std::sqrt(1.0 - std::pow(A, -2.0 * eps));
}

EmbeddingMap assemble_weierstrass(const LacunaryFamily& family, double eps,
                                  const std::vector<double>& base) {
  const int dim = family.total_dim();
  std::vector<std::vector<double>> base_vals(family.scale_count());
  for (int s = 0; s < family.scale_count(); ++s) base_vals[s] = family.phi[s](base);

  std::vector<double> weights(family.scale_count());
  for (int s = 0; s < family.scale_count(); ++s)
    weights[s] = std::pow(family.A, -eps * (family.M1 + s));

  std::vector<int> offsets(family.scale_count(), 0);
  if (!family.shared_block) {
    int off = 0;
    for (int s = 0; s < family.scale_count(); ++s) {
      offsets[s] = off;
      off += family.dims[s];
    }
  }

  EmbeddingMap map;
  map.dim = dim;
  std::ostringstream prov;
  prov << "weierstrass A=" << family.A << " M1=" << family.M1 << " M2=" << family.M2
       << " eps=" << eps << " shared=" << family.shared_block << " dim=" << dim;
  map.provenance = std::to_string(fnv1a64(prov.str()));
  map.eval = [family, base_vals, weights, offsets, dim](const std::vector<double>& p) {
    std::vector<double> out(dim, 0.0);
    for (int s = 0; s < family.scale_count(); ++s) {
      const auto v = family.phi[s](p);
      double* block = out.data() + (family.shared_block ? 0 : offsets[s]);
      for (std::size_t c = 0; c < v.size(); ++c) block[c] += weights[s] * (v[c] - base_vals[s][c]);
    }
    return out;
  };
  return map;
}

std::vector<std::vector<double>> embed_all(const PointCloud& cloud, const EmbeddingMap& map) {
  std::vector<std::vector<double>> out(cloud.size());
  parallel_chunks(static_cast<std::size_t>(cloud.size()), 64,
                  [&](std::size_t, std::size_t lo, std::size_t hi) {
                    for (std::size_t p = lo; p < hi; ++p)
                      out[p] = map.eval(cloud.point_vec(static_cast<int>(p)));
                  });
  return out;
}

HolderDiag measure_holder(const PointCloud& cloud, const std::vector<std::vector<double>>& values,
                          double eps, long pair_budget, std::uint64_t seed) {
  const int npts = cloud.size();
  const long all_pairs = static_cast<long>(npts) * (npts - 1) / 2;
  const bool exhaustive = all_pairs <= pair_budget;
  const long budget = exhaustive ? all_pairs : pair_budget;

  struct Best {
    double v = 0.0;
    int p = -1, q = -1;
  };
  const std::size_t n_chunks = 128;
  std::vector<Best> bests(n_chunks);
  std::vector<int> pairs;
  if (!exhaustive) {
    pairs.resize(2 * budget);
    Rng rng(seed);
    for (long t = 0; t < budget; ++t) {
      pairs[2 * t] = static_cast<int>(rng.below(npts));
      pairs[2 * t + 1] = static_cast<int>(rng.below(npts));
    }
  }
  parallel_chunks(static_cast<std::size_t>(budget), n_chunks,
                  [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
                    Best local;
                    for (std::size_t t = lo; t < hi; ++t) {
                      int p, q;
                      if (exhaustive) {
                        p = static_cast<int>(t / npts);
                        q = static_cast<int>(t % npts);
                        if (q <= p) {
                          p = npts - 2 - p;
                          q = npts - 1 - q;
                        }
                      } else {
                        p = pairs[2 * t];
                        q = pairs[2 * t + 1];
                        if (p == q) continue;
                      }
                      const double d = cloud.dist(p, q);
                      if (d <= 0) continue;
                      const double diff = std::sqrt(kernels::squared_distance(
                          values[p].data(), values[q].data(), values[p].size()));
                      const double r = diff / std::pow(d, 1.0 - eps);
                      if (r > local.v) local = {r, p, q};
                    }
                    bests[chunk] = local;
                  });
  HolderDiag diag;
  diag.pairs = budget;
  for (const auto& b : bests)
    if (b.v > diag.constant) {
      diag.constant = b.v;
      diag.witness_p = b.p;
      diag.witness_q = b.q;
    }
  return diag;
}

EmbeddingMap concatenate_scales(const GroupOps& ops, const EmbeddingMap& phi1, double eps,
                                int a) {
  if (a < 1) throw std::invalid_argument("need at least one block");
  EmbeddingMap map;
  map.dim = phi1.dim * a;
  map.provenance = std::to_string(fnv1a64("concat a=" + std::to_string(a) +
                                          " eps=" + std::to_string(eps) + " inner=" +
                                          phi1.provenance));
  const GroupOps* o = &ops;
  const int inner_dim = phi1.dim;
  map.eval = [o, phi1, eps, a, inner_dim](const std::vector<double>& p) {
    std::vector<double> out(static_cast<std::size_t>(inner_dim) * a);
    for (int m = 1; m <= a; ++m) {
      const double lam = std::ldexp(1.0, -(m - 1));  // 2^{-m+1}
      const auto v = phi1.eval(o->dilate(lam, p));
      const double scale = std::pow(2.0, (m - 1) * (1.0 - eps));
      for (int c = 0; c < inner_dim; ++c) out[(m - 1) * inner_dim + c] = scale * v[c];
    }
    return out;
  };
  return map;
}

// --- Assouad bumps -----------------------------------------------------------

LacunaryFamily assouad_family(const PointCloud& cloud, bool shared, const AssouadOptions& opt) {
  const int npts = cloud.size();
  if (npts < 2) throw std::invalid_argument("assouad family needs at least two points");
  double minsep = std::numeric_limits<double>::infinity();
  double diam = 0.0;
  for (int p = 0; p < npts; ++p)
    for (int q = p + 1; q < npts; ++q) {
      const double d = cloud.dist(p, q);
      if (d > 0) minsep = std::min(minsep, d);
      diam = std::max(diam, d);
    }
  const double logA = std::log(opt.A);
  // scales from the capture scale of the closest pair up to well past the
  // diameter; the coarse tail carries the epsilon-dependence of the sums
  const int M1 = static_cast<int>(std::floor(std::log(minsep) / logA));
  const int Mdiam = static_cast<int>(std::ceil(std::log(diam) / logA));
  const int M2 = Mdiam + opt.extra_coarse_scales;

  LacunaryFamily fam;
  fam.A = opt.A;
  fam.M1 = M1;
  fam.M2 = M2;
  fam.shared_block = shared;

  const auto metric = cloud.metric_fn();
  for (int m = M1; m <= M2; ++m) {
    const double delta = std::pow(opt.A, m);
    const double reach = opt.tent_radius_factor * delta;
    // nets above the diameter collapse to the first point; build them at a
    // capped separation to avoid useless scans
    const double net_delta = std::min(delta, 2.0 * diam + 1.0);
    Net net = greedy_maximal_net(cloud, net_delta);
    Coloring col = color_net(net, opt.color_sep_factor * net_delta);
    const auto classes = col.classes();
    const int ncolors = col.n_colors;
    fam.dims.push_back(ncolors);

    std::vector<std::vector<std::vector<double>>> members(classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c)
      for (int idx : classes[c]) members[c].push_back(cloud.point_vec(idx));

    // Truncated-distance bumps, written as -sum min(d, reach): equal to the
    // tent sum up to a p-independent constant, but immune to cancellation
    // when reach dwarfs the diameter.
    fam.phi.push_back([members, reach, ncolors, metric](const std::vector<double>& p) {
      std::vector<double> out(ncolors, 0.0);
      for (int c = 0; c < ncolors; ++c) {
        double acc = 0.0;
        for (const auto& y : members[c]) acc -= std::min(metric(y.data(), p.data()), reach);
        out[c] = acc;
      }
      return out;
    });
  }
  return fam;
}

EmbeddingMap assouad_baseline(const PointCloud& cloud, double eps, const AssouadOptions& opt) {
  auto fam = assouad_family(cloud, true, opt);
  return assemble_weierstrass(fam, eps, cloud.point_vec(0));
}

// --- Nash-Moser ledger ---------------------------------------------------------

namespace {

std::vector<std::vector<double>> unpack_sym(const double* vals, int k) {
  std::vector<std::vector<double>> F(k, std::vector<double>(k, 0.0));
  int idx = 0;
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      F[i][j] = F[j][i] = vals[idx];
      ++idx;
    }
  return F;
}

double frob_diff(const std::vector<std::vector<double>>& a, const double* packed, int k) {
  auto b = unpack_sym(packed, k);
  double acc = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double d = a[i][j] - b[i][j];
      acc += d * d;
    }
  return std::sqrt(acc);
}

std::vector<long> interior_indices(const Grid& grid, double margin) {
  std::vector<long> out;
  const int n = static_cast<int>(grid.shape.size());
  for (long i = 0; i < grid.size(); ++i) {
    const auto p = grid.point(i);
    bool inside = true;
    for (int e = 0; e < n && inside; ++e) {
      const double extent = grid.spacing[e] * (grid.shape[e] - 1);
      const double lo = grid.origin[e] + margin * extent;
      const double hi = grid.origin[e] + (1.0 - margin) * extent;
      inside = p[e] >= lo && p[e] <= hi;
    }
    if (inside) out.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<NashMoserLevel> nash_moser_diagnostic(const GroupOps& ops, const GridFn& psi,
                                                  const GridFn& F, double N0, int levels,
                                                  double fd_step, double interior_margin) {
  if (levels > 4) throw std::invalid_argument("diagnostic iteration is capped at 4 dyadic levels");
  const int k = ops.k1();
  const Grid& grid = psi.grid;
  const auto audit = interior_indices(grid, interior_margin);
  if (audit.empty()) throw std::invalid_argument("interior margin leaves no audit points");

  std::vector<NashMoserLevel> ledger;

  GridFn ppsi = mollifier_lowpass(psi, N0);
  GridFn pf = mollifier_lowpass(F, N0);

  // Corrections are solved on a slightly smaller interior than the audit
  // margin; near the boundary the clamped interpolant degenerates the rows.
  const auto solve_set = interior_indices(grid, interior_margin * 0.5);

  GridFn phi;
  phi.grid = grid;
  phi.D = psi.D;
  phi.values.assign(psi.values.size(), 0.0);
  {
    const MapFn ppsi_fn = ppsi.as_fn();
    for (long i : solve_set) {
      const auto Fp = unpack_sym(pf.at(i), k);
      const auto sol = explicit_solve(ops, ppsi_fn, Fp, grid.point(i), fd_step);
      std::copy(sol.phi.begin(), sol.phi.end(), phi.at(i));
    }
    const MapFn phi_fn = phi.as_fn();
    double res = 0.0;
    for (long i : audit) {
      const auto b = bilinear_form_B(ops, phi_fn, ppsi_fn, grid.point(i), fd_step);
      res = std::max(res, frob_diff(b, pf.at(i), k));
    }
    double corr = 0.0;
    for (long i = 0; i < grid.size(); ++i)
      corr = std::max(corr, std::sqrt(kernels::squared_norm(phi.at(i), phi.D)));
    ledger.push_back({N0, res, corr});
  }

  for (int level = 1; level <= levels; ++level) {
    const double N = N0 * std::ldexp(1.0, level);
    GridFn ppsi_hi = mollifier_lowpass(psi, N);
    GridFn pf_hi = mollifier_lowpass(F, N);
    // band parts P_(N) = P_{<=N} - P_{<=N/2}
    GridFn band_psi = ppsi_hi;
    for (std::size_t t = 0; t < band_psi.values.size(); ++t) band_psi.values[t] -= ppsi.values[t];
    GridFn band_f = pf_hi;
    for (std::size_t t = 0; t < band_f.values.size(); ++t) band_f.values[t] -= pf.values[t];

    GridFn phi_moll = mollifier_lowpass(phi, N);
    const MapFn phi_moll_fn = phi_moll.as_fn();
    const MapFn ppsi_hi_fn = ppsi_hi.as_fn();
    const MapFn band_psi_fn = band_psi.as_fn();

    GridFn phi_new = phi;
    double corr = 0.0;
    const int k2 = ops.algebra().stratum_dim(2);
    for (long i : solve_set) {
      const auto p = grid.point(i);
      const auto bp = band_psi.interp(p);
      // a^i_N, b^{ij}_N, c^{i'}_N of the recursion, no derivatives on the band
      std::vector<double> y;
      y.reserve(k + k * (k + 1) / 2 + k2);
      for (int a = 0; a < k; ++a) {
        const auto d1 = fd_derivative(ops, phi_moll_fn, a, p, fd_step);
        y.push_back(-kernels::dot(d1.data(), bp.data(), d1.size()));
      }
      {
        const double* bf = band_f.at(i);
        int idx = 0;
        for (int a = 0; a < k; ++a)
          for (int b = a; b < k; ++b) {
            const auto d2 = fd_word_derivative(ops, phi_moll_fn, {a, b}, p, fd_step);
            y.push_back(-kernels::dot(d2.data(), bp.data(), d2.size()) - bf[idx]);
            ++idx;
          }
      }
      for (int i2 = 1; i2 <= k2; ++i2) {
        const auto d1 = fd_derivative(ops, phi_moll_fn, ops.algebra().flat(2, i2), p, fd_step);
        y.push_back(-kernels::dot(d1.data(), bp.data(), d1.size()));
      }
      const auto rows = t_psi_rows(ops, ppsi_hi_fn, p, fd_step);
      linalg::Pseudoinverse pinv(rows);
      const auto dphi = pinv.apply(y);
      corr = std::max(corr, std::sqrt(kernels::squared_norm(dphi.data(), dphi.size())));
      double* dst = phi_new.at(i);
      for (int c = 0; c < phi.D; ++c) dst[c] += dphi[c];
    }
    phi = std::move(phi_new);
    ppsi = std::move(ppsi_hi);
    pf = std::move(pf_hi);

    const MapFn phi_fn = phi.as_fn();
    const MapFn ppsi_fn = ppsi.as_fn();
    double res = 0.0;
    for (long i : audit) {
      const auto b = bilinear_form_B(ops, phi_fn, ppsi_fn, grid.point(i), fd_step);
      res = std::max(res, frob_diff(b, pf.at(i), k));
    }
    ledger.push_back({N, res, corr});
    (void)band_psi_fn;
  }
  return ledger;
}

}  // namespace carnot
