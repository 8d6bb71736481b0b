#include "carnot/frames.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "carnot/kernels.hpp"
#include "carnot/parallel.hpp"

namespace carnot {

FrameField FrameField::constant(const PointCloud& cloud, const std::vector<std::vector<double>>& vs,
                                double lipschitz_bound) {
  FrameField f;
  f.cloud = &cloud;
  f.m = static_cast<int>(vs.size());
  f.D = vs.empty() ? 0 : static_cast<int>(vs[0].size());
  f.lipschitz_bound = lipschitz_bound;
  f.values.resize(static_cast<std::size_t>(f.m) * cloud.size() * f.D);
  for (int i = 0; i < f.m; ++i)
    for (int p = 0; p < cloud.size(); ++p)
      std::copy(vs[i].begin(), vs[i].end(), f.at(i, p));
  return f;
}

FrameValidation verify_frame(const FrameField& frame, long pair_budget, std::uint64_t seed) {
  FrameValidation val;
  const auto& cloud = *frame.cloud;
  const int npts = cloud.size();
  for (int p = 0; p < npts; ++p)
    for (int i = 0; i < frame.m; ++i) {
      const double nn = kernels::squared_norm(frame.at(i, p), frame.D);
      val.max_norm_dev = std::max(val.max_norm_dev, std::fabs(std::sqrt(nn) - 1.0));
      for (int j = i + 1; j < frame.m; ++j)
        val.max_cross_dot = std::max(
            val.max_cross_dot, std::fabs(kernels::dot(frame.at(i, p), frame.at(j, p), frame.D)));
    }
  const long all_pairs = static_cast<long>(npts) * (npts - 1) / 2;
  Rng rng(seed);
  const bool exhaustive = all_pairs <= pair_budget;
  const long budget = exhaustive ? all_pairs : pair_budget;
  for (long t = 0; t < budget; ++t) {
    int p, q;
    if (exhaustive) {
      // unrank the t-th pair
      p = static_cast<int>(t / npts);
      q = static_cast<int>(t % npts);
      if (q <= p) {
        p = npts - 2 - p;
        q = npts - 1 - q;
      }
    } else {
      p = static_cast<int>(rng.below(npts));
      q = static_cast<int>(rng.below(npts));
      if (p == q) continue;
    }
    const double d = cloud.dist(p, q);
    if (d <= 0) continue;
    for (int i = 0; i < frame.m; ++i) {
      const double diff = std::sqrt(kernels::squared_distance(frame.at(i, p), frame.at(i, q),
                                                              frame.D));
      val.max_lip_ratio = std::max(val.max_lip_ratio, diff / (frame.lipschitz_bound * d));
    }
  }
  return val;
}

ExtensionConfig ExtensionConfig::derive(double K, int m, int D, std::uint64_t seed) {
  if (!(K >= 2.0)) throw std::invalid_argument("doubling constant must be >= 2");
  if (m < 1) throw std::invalid_argument("need at least one existing field");
  ExtensionConfig c;
  c.K = K;
  c.m = m;
  c.D = D;
  c.seed = seed;
  c.delta = 1.0 / (8.0 * K * m);
  c.eps_cap = 1.0 / (4.0 * K * K);
  c.gap_ok = (D - m) >= 224.0 * K * K * K * K * std::log(K);
  return c;
}

std::vector<double> sample_orthocomplement_unit(const std::vector<const double*>& basis, int D,
                                                Rng& rng) {
  if (static_cast<int>(basis.size()) >= D)
    throw std::invalid_argument("orthocomplement is trivial: m = D");
  std::vector<double> v(D);
  for (;;) {
    for (auto& x : v) x = rng.normal();
    for (const double* b : basis) kernels::axpy(-kernels::dot(b, v.data(), D), b, v.data(), D);
    // one more pass keeps the projection at working precision
    for (const double* b : basis) kernels::axpy(-kernels::dot(b, v.data(), D), b, v.data(), D);
    const double nn = std::sqrt(kernels::squared_norm(v.data(), D));
    if (nn > 1e-8) {
      kernels::scale(1.0 / nn, v.data(), D);
      return v;
    }
  }
}

namespace {

std::vector<std::vector<int>> net_neighbors(const Net& net, double radius) {
  const int n = net.size();
  std::vector<std::vector<int>> nbr(n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (net.cloud->dist(net.members[a], net.members[b]) < radius) {
        nbr[a].push_back(b);
        nbr[b].push_back(a);
      }
  return nbr;
}

}  // namespace

DiscreteAssignment lll_resample(const Net& net, const FrameField& frame,
                                const ExtensionConfig& config) {
  const int n = net.size();
  const int D = frame.D;
  DiscreteAssignment out;
  out.net = &net;
  out.D = D;
  out.vectors.resize(static_cast<std::size_t>(n) * D);
  Rng rng(config.seed);

  const auto nbr = net_neighbors(net, 2.0 * net.delta);

  auto basis_at = [&](int local) {
    std::vector<const double*> basis(frame.m);
    for (int i = 0; i < frame.m; ++i) basis[i] = frame.at(i, net.members[local]);
    return basis;
  };

  for (int i = 0; i < n; ++i) {
    const auto v = sample_orthocomplement_unit(basis_at(i), D, rng);
    std::copy(v.begin(), v.end(), out.vectors.begin() + static_cast<std::size_t>(i) * D);
  }

  auto violated = [&](int i) {
    for (int j : nbr[i])
      if (std::fabs(kernels::dot(out.at(i), out.at(j), D)) > config.eps_cap) return true;
    return false;
  };

  const long budget = config.resample_budget >= 0 ? config.resample_budget : 100L * n;
  long resamples = 0;
  for (;;) {
    int bad = -1;
    for (int i = 0; i < n; ++i)
      if (violated(i)) {
        bad = i;
        break;
      }
    if (bad < 0) {
      out.success = true;
      break;
    }
    if (resamples >= budget) break;
    const auto v = sample_orthocomplement_unit(basis_at(bad), D, rng);
    std::copy(v.begin(), v.end(), out.vectors.begin() + static_cast<std::size_t>(bad) * D);
    ++resamples;
  }
  out.resamples = resamples;
  if (!out.success) {
    long surviving = 0;
    for (int i = 0; i < n; ++i)
      if (violated(i)) ++surviving;
    out.surviving_events = surviving;
  }
  return out;
}

std::vector<std::pair<int, double>> quadratic_partition(const Net& net, double delta,
                                                        int point_index) {
  std::vector<std::pair<int, double>> tents;
  double sumsq = 0.0;
  for (int i = 0; i < net.size(); ++i) {
    const double d = net.cloud->dist(net.members[i], point_index);
    double t = 0.0;
    if (d <= delta)
      t = 1.0;
    else if (d <= 2.0 * delta)
      t = 2.0 - d / delta;
    if (t > 0.0) {
      tents.emplace_back(i, t);
      sumsq += t * t;
    }
  }
  if (tents.empty())
    throw std::runtime_error("quadratic partition: point not covered; net is not maximal");
  const double inv = 1.0 / std::sqrt(sumsq);
  for (auto& [i, t] : tents) t *= inv;
  return tents;
}

ExtensionResult extend_frame(const PointCloud& cloud, const FrameField& frame,
                             ExtensionConfig config) {
  if (frame.cloud != &cloud) throw std::invalid_argument("frame must live on the given cloud");
  if (config.D == 0) config = ExtensionConfig::derive(config.K, frame.m, frame.D, config.seed);
  if (config.D != frame.D || config.m != frame.m)
    throw std::invalid_argument("config does not match the frame shape");

  ExtensionResult result;
  auto& diag = result.diag;
  diag.K = config.K;
  diag.m = config.m;
  diag.D = config.D;
  diag.seed = config.seed;
  diag.gap_ok = config.gap_ok;
  diag.eps_cap = config.eps_cap;

  // Fields with declared constant L > 1 are handled on the rescaled metric
  // L d, which shrinks the net scale by L.
  const double scale = std::max(1.0, frame.lipschitz_bound);
  diag.metric_scale = scale;
  const double delta = config.delta / scale;
  diag.delta = delta;

  const Net net = greedy_maximal_net(cloud, delta);
  diag.net_size = net.size();

  const auto prof = estimate_doubling(net);
  diag.doubling_estimate = prof.K_est;
  diag.doubling_warning = prof.K_est > config.K + 1e-9;

  const auto assignment = lll_resample(net, frame, config);
  diag.resamples = assignment.resamples;
  diag.lll_success = assignment.success;

  // exhaustive recheck of every pair within 2 delta, not a sampled check
  {
    const auto nbr = net_neighbors(net, 2.0 * net.delta);
    long bad = 0;
    for (int i = 0; i < net.size(); ++i)
      for (int j : nbr[i])
        if (j > i &&
            std::fabs(kernels::dot(assignment.at(i), assignment.at(j), frame.D)) >
                config.eps_cap * (1.0 + 1e-12))
          ++bad;
    diag.lll_recheck_violations = bad;
  }

  const int npts = cloud.size();
  const int D = frame.D;
  const int m = frame.m;

  // interpolate and audit bounds (1) and (2)
  FrameField extended;
  extended.cloud = &cloud;
  extended.D = D;
  extended.m = m + 1;
  extended.values.resize(static_cast<std::size_t>(extended.m) * npts * D);
  std::copy(frame.values.begin(), frame.values.end(), extended.values.begin());

  diag.min_interp_sq = std::numeric_limits<double>::infinity();
  diag.max_interp_sq = 0.0;
  diag.max_frame_dot = 0.0;
  diag.ortho_residual = 0.0;

  std::vector<double> interp(D);
  for (int p = 0; p < npts; ++p) {
    const auto weights = quadratic_partition(net, delta, p);
    std::fill(interp.begin(), interp.end(), 0.0);
    for (const auto& [local, w] : weights) kernels::axpy(w, assignment.at(local), interp.data(), D);

    const double nsq = kernels::squared_norm(interp.data(), D);
    if (nsq < diag.min_interp_sq) {
      diag.min_interp_sq = nsq;
      if (nsq < 0.75) diag.w_interp = {p, -1, nsq};
    }
    if (nsq > diag.max_interp_sq) {
      diag.max_interp_sq = nsq;
      if (nsq > 1.25) diag.w_interp = {p, -1, nsq};
    }
    for (int i = 0; i < m; ++i) {
      const double d = std::fabs(kernels::dot(interp.data(), frame.at(i, p), D));
      if (d > diag.max_frame_dot) {
        diag.max_frame_dot = d;
        diag.w_dot = {p, i, d};
      }
    }

    // Gram-Schmidt against the running frame, then normalize
    double* out = extended.at(m, p);
    std::copy(interp.begin(), interp.end(), out);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < m; ++i)
        kernels::axpy(-kernels::dot(out, frame.at(i, p), D), frame.at(i, p), out, D);
    const double rn = std::sqrt(kernels::squared_norm(out, D));
    if (rn > 1e-12) kernels::scale(1.0 / rn, out, D);

    double res = std::fabs(std::sqrt(kernels::squared_norm(out, D)) - 1.0);
    for (int i = 0; i < m; ++i)
      res = std::max(res, std::fabs(kernels::dot(out, frame.at(i, p), D)));
    diag.ortho_residual = std::max(diag.ortho_residual, res);
  }

  diag.bound1_ok = diag.min_interp_sq >= 0.75 - 1e-12 && diag.max_interp_sq <= 1.25 + 1e-12;
  diag.bound2_ok = diag.max_frame_dot <= 1.0 / (4.0 * m) + 1e-12;

  // empirical Lipschitz constant of the new field: all pairs when the cloud
  // is small, otherwise a seeded 1e6-pair sample
  const long all_pairs = static_cast<long>(npts) * (npts - 1) / 2;
  const bool exhaustive = npts <= 5000;
  diag.lipschitz_exhaustive = exhaustive;

  struct ChunkMax {
    double v = 0.0;
    int p = -1, q = -1;
  };
  const std::size_t n_chunks = 256;
  std::vector<ChunkMax> maxes(n_chunks);

  if (exhaustive) {
    diag.lipschitz_pairs = all_pairs;
    parallel_chunks(static_cast<std::size_t>(npts), n_chunks,
                    [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
                      ChunkMax local;
                      for (std::size_t p = lo; p < hi; ++p)
                        for (std::size_t q = p + 1; q < static_cast<std::size_t>(npts); ++q) {
                          const double d = cloud.dist(static_cast<int>(p), static_cast<int>(q));
                          if (d <= 0) continue;
                          const double diff = std::sqrt(kernels::squared_distance(
                              extended.at(m, static_cast<int>(p)),
                              extended.at(m, static_cast<int>(q)), D));
                          const double r = diff / d;
                          if (r > local.v) local = {r, static_cast<int>(p), static_cast<int>(q)};
                        }
                      maxes[chunk] = local;
                    });
  } else {
    const long budget = 1000000;
    diag.lipschitz_pairs = budget;
    std::vector<int> pairs(2 * budget);
    Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    for (long t = 0; t < budget; ++t) {
      pairs[2 * t] = static_cast<int>(rng.below(npts));
      pairs[2 * t + 1] = static_cast<int>(rng.below(npts));
    }
    parallel_chunks(static_cast<std::size_t>(budget), n_chunks,
                    [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
                      ChunkMax local;
                      for (std::size_t t = lo; t < hi; ++t) {
                        const int p = pairs[2 * t], q = pairs[2 * t + 1];
                        if (p == q) continue;
                        const double d = cloud.dist(p, q);
                        if (d <= 0) continue;
                        const double diff = std::sqrt(kernels::squared_distance(
                            extended.at(m, p), extended.at(m, q), D));
                        const double r = diff / d;
                        if (r > local.v) local = {r, p, q};
                      }
                      maxes[chunk] = local;
                    });
  }
  ChunkMax best;
  for (const auto& c : maxes)
    if (c.v > best.v) best = c;
  diag.lipschitz_emp = best.v;
  diag.w_lip = {best.p, best.q, best.v};
  diag.lipschitz_cap = 150.0 * std::pow(config.K, 5) * m * (m + 1) * scale;
  diag.bound3_ok = diag.lipschitz_emp <= diag.lipschitz_cap;

  extended.lipschitz_bound = std::max(frame.lipschitz_bound, diag.lipschitz_emp * 1.05);
  result.extended = std::move(extended);
  return result;
}

RepeatedExtensionResult extend_frame_repeated(const PointCloud& cloud, const FrameField& frame,
                                              int count, double K, std::uint64_t seed) {
  RepeatedExtensionResult out;
  out.frame = frame;
  for (int step = 0; step < count; ++step) {
    auto config = ExtensionConfig::derive(K, out.frame.m, out.frame.D, seed + step);
    auto res = extend_frame(cloud, out.frame, config);
    out.steps.push_back(res.diag);
    out.ok = out.ok && res.diag.ok();
    out.frame = std::move(res.extended);
  }
  return out;
}

void write_frame_csv(const FrameField& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "point,field";
  for (int c = 0; c < frame.D; ++c) out << ",v" << c;
  out << "\n";
  out.precision(17);
  for (int p = 0; p < frame.cloud->size(); ++p)
    for (int i = 0; i < frame.m; ++i) {
      out << p << "," << i;
      const double* v = frame.at(i, p);
      for (int c = 0; c < frame.D; ++c) out << "," << v[c];
      out << "\n";
    }
}

FrameField read_frame_csv(const PointCloud& cloud, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(in, header);
  int ncols = 1;
  for (char ch : header)
    if (ch == ',') ++ncols;
  const int D = ncols - 2;
  if (D <= 0) throw std::runtime_error("frame csv has no coordinate columns");

  std::vector<std::tuple<int, int, std::vector<double>>> rows;
  std::string line;
  int max_field = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    const int p = std::stoi(cell);
    std::getline(ss, cell, ',');
    const int f = std::stoi(cell);
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (static_cast<int>(v.size()) != D) throw std::runtime_error("ragged frame csv");
    max_field = std::max(max_field, f);
    rows.emplace_back(p, f, std::move(v));
  }
  FrameField frame;
  frame.cloud = &cloud;
  frame.D = D;
  frame.m = max_field + 1;
  frame.values.resize(static_cast<std::size_t>(frame.m) * cloud.size() * D);
  for (const auto& [p, f, v] : rows) std::copy(v.begin(), v.end(), frame.at(f, p));
  return frame;
}

}  // namespace carnot
