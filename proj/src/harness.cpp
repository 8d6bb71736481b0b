#include "carnot/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "carnot/kernels.hpp"
#include "carnot/parallel.hpp"
#include "carnot/rng.hpp"

namespace carnot {

PointCloud generate_heisenberg_ball(const GroupOps& ops, double R, long max_points) {
  if (ops.dim() != 3 || ops.step() != 2)
    throw std::invalid_argument("the discrete ball generator expects the h3 lattice");
  if (R < 2.0) throw std::invalid_argument("ball radius must be at least 2");
  // lattice points are (a, b, c/2), a,b,c integers: a cheap volume estimate
  const double est = std::pow(2.0 * R + 1.0, 2.0) * (2.0 * R * R + 1.0);
  if (est > static_cast<double>(max_points))
    throw std::runtime_error("refusing to enumerate ~" + std::to_string(static_cast<long>(est)) +
                             " lattice points (budget " + std::to_string(max_points) + ")");

  struct Key {
    long a, b, c2;  // c2 = 2 * x3
    bool operator<(const Key& o) const {
      if (a != o.a) return a < o.a;
      if (b != o.b) return b < o.b;
      return c2 < o.c2;
    }
  };
  auto key_of = [](const std::vector<double>& p) {
    return Key{std::lround(p[0]), std::lround(p[1]), std::lround(2.0 * p[2])};
  };

  const std::vector<std::vector<double>> gens = {
      {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};

  std::map<Key, std::vector<double>> seen;
  std::deque<std::vector<double>> queue;
  const std::vector<double> id(3, 0.0);
  seen.emplace(key_of(id), id);
  queue.push_back(id);
  while (!queue.empty()) {
    const auto p = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      auto q = ops.product(p, g);
      // snap to the lattice to keep coordinates exact
      q[0] = std::round(q[0]);
      q[1] = std::round(q[1]);
      q[2] = std::round(2.0 * q[2]) / 2.0;
      if (ops.quasinorm(q) >= R) continue;
      const Key k = key_of(q);
      if (seen.count(k)) continue;
      seen.emplace(k, q);
      queue.push_back(q);
      if (static_cast<long>(seen.size()) > max_points)
        throw std::runtime_error("lattice ball exceeded the point budget");
    }
  }

  std::vector<double> coords;
  coords.reserve(seen.size() * 3);
  for (const auto& [k, p] : seen) coords.insert(coords.end(), p.begin(), p.end());
  return make_carnot_cloud(ops, coords);
}

namespace {

struct PairScan {
  double max_ratio = 0.0;
  double min_ratio = std::numeric_limits<double>::infinity();
  int max_p = -1, max_q = -1, min_p = -1, min_q = -1;
  bool collapsed = false;
  int col_p = -1, col_q = -1;

  void feed(int p, int q, double d, double ratio, bool zero_diff) {
    (void)d;
    if (zero_diff) {
      collapsed = true;
      col_p = p;
      col_q = q;
      return;
    }
    if (ratio > max_ratio) {
      max_ratio = ratio;
      max_p = p;
      max_q = q;
    }
    if (ratio < min_ratio) {
      min_ratio = ratio;
      min_p = p;
      min_q = q;
    }
  }

  void merge(const PairScan& o) {
    if (o.collapsed && !collapsed) {
      collapsed = true;
      col_p = o.col_p;
      col_q = o.col_q;
    }
    if (o.max_ratio > max_ratio) {
      max_ratio = o.max_ratio;
      max_p = o.max_p;
      max_q = o.max_q;
    }
    if (o.min_ratio < min_ratio) {
      min_ratio = o.min_ratio;
      min_p = o.min_p;
      min_q = o.min_q;
    }
  }
};

}  // namespace

DistortionReport distortion(const PointCloud& cloud,
                            const std::vector<std::vector<double>>& values, double eps,
                            std::uint64_t seed) {
  if (cloud.size() < 2) throw std::invalid_argument("distortion needs at least two points");
  const auto t0 = std::chrono::steady_clock::now();
  const int npts = cloud.size();
  const double expo = 1.0 - eps;

  auto ratio_of = [&](int p, int q, bool& zero_diff) {
    const double d = cloud.dist(p, q);
    if (d <= 0.0) {
      zero_diff = false;
      return -1.0;
    }
    const double diff = std::sqrt(
        kernels::squared_distance(values[p].data(), values[q].data(), values[p].size()));
    zero_diff = diff == 0.0;
    return diff / std::pow(d, expo);
  };

  const long all_pairs = static_cast<long>(npts) * (npts - 1) / 2;
  const bool exhaustive = npts <= 3000;
  const long budget = exhaustive ? all_pairs : 1000000;

  const std::size_t n_chunks = 128;
  std::vector<PairScan> scans(n_chunks);
  std::vector<int> sampled;
  if (!exhaustive) {
    sampled.resize(2 * budget);
    Rng rng(seed);
    for (long t = 0; t < budget; ++t) {
      sampled[2 * t] = static_cast<int>(rng.below(npts));
      sampled[2 * t + 1] = static_cast<int>(rng.below(npts));
    }
  }
  parallel_chunks(static_cast<std::size_t>(budget), n_chunks,
                  [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
                    PairScan local;
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
                        p = sampled[2 * t];
                        q = sampled[2 * t + 1];
                        if (p == q) continue;
                      }
                      bool zero = false;
                      const double r = ratio_of(p, q, zero);
                      if (r < 0.0 && !zero) continue;
                      local.feed(p, q, 0.0, r, zero);
                    }
                    scans[chunk] = local;
                  });
  PairScan scan;
  for (const auto& s : scans) scan.merge(s);

  if (!exhaustive) {
    // refine both extremes locally: all partners of the witness endpoints
    for (int w : {scan.max_p, scan.max_q, scan.min_p, scan.min_q}) {
      if (w < 0) continue;
      for (int q = 0; q < npts; ++q) {
        if (q == w) continue;
        bool zero = false;
        const double r = ratio_of(w, q, zero);
        if (r < 0.0 && !zero) continue;
        scan.feed(w, q, 0.0, r, zero);
      }
    }
  }

  DistortionReport rep;
  rep.exponent = expo;
  rep.pairs = budget;
  rep.expansion = scan.max_ratio;
  rep.contraction = scan.min_ratio;
  rep.exp_p = scan.max_p;
  rep.exp_q = scan.max_q;
  rep.con_p = scan.min_p;
  rep.con_q = scan.min_q;
  rep.collapsed = scan.collapsed;
  if (scan.collapsed) {
    rep.distortion = std::numeric_limits<double>::infinity();
    rep.con_p = scan.col_p;
    rep.con_q = scan.col_q;
    rep.contraction = 0.0;
  } else {
    rep.distortion = scan.max_ratio / scan.min_ratio;
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<SweepRow> sweep_epsilon(const PointCloud& cloud, const EmbeddingBuilder& builder,
                                    const std::vector<double>& eps_list, std::uint64_t seed) {
  if (eps_list.size() < 3) throw std::invalid_argument("sweep needs at least 3 epsilon values");
  std::vector<SweepRow> rows;
  for (double eps : eps_list) {
    SweepRow row;
    row.eps = eps;
    try {
      const auto map = builder(cloud, eps);
      const auto values = embed_all(cloud, map);
      const auto rep = distortion(cloud, values, eps, seed);
      row.distortion = rep.distortion;
      row.holder_upper = rep.expansion;
      row.holder_lower = rep.contraction;
      row.ok = !rep.collapsed && std::isfinite(rep.distortion);
    } catch (const std::exception& e) {
      row.ok = false;
      row.note = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& xy) {
  SlopeFit fit;
  std::vector<std::pair<double, double>> pts;
  for (const auto& [x, y] : xy)
    if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y))
      pts.emplace_back(std::log(x), std::log(y));
  fit.points = static_cast<int>(pts.size());
  if (pts.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  if (pts.size() > 2) {
    double ss = 0;
    for (const auto& [x, y] : pts) {
      const double r = y - (fit.intercept + fit.slope * x);
      ss += r * r;
    }
    fit.stderr_ = std::sqrt(ss / (n - 2) / (sxx - sx * sx / n));
  }
  return fit;
}

SlopeFit fit_loglog_slope(const std::vector<SweepRow>& rows) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& r : rows)
    if (r.ok) xy.emplace_back(1.0 / r.eps, r.distortion);
  return fit_loglog(xy);
}

nlohmann::ordered_json distortion_to_json(const DistortionReport& rep) {
  nlohmann::ordered_json j;
  j["kind"] = "distortion";
  j["exponent"] = rep.exponent;
  j["distortion"] = rep.collapsed ? -1.0 : rep.distortion;
  j["collapsed"] = rep.collapsed;
  j["expansion"] = rep.expansion;
  j["contraction"] = rep.contraction;
  j["expansion_witness"] = {rep.exp_p, rep.exp_q};
  j["contraction_witness"] = {rep.con_p, rep.con_q};
  j["pairs"] = rep.pairs;
  return j;
}

nlohmann::ordered_json sweep_to_json(const std::vector<SweepRow>& rows, const SlopeFit& fit) {
  nlohmann::ordered_json j;
  j["kind"] = "sweep";
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["eps"] = r.eps;
    row["distortion"] = r.distortion;
    row["holder_upper"] = r.holder_upper;
    row["holder_lower"] = r.holder_lower;
    row["ok"] = r.ok;
    if (!r.note.empty()) row["note"] = r.note;
    table.push_back(row);
  }
  j["rows"] = table;
  j["slope"] = fit.slope;
  j["slope_stderr"] = fit.stderr_;
  j["rows_used"] = fit.points;
  return j;
}

nlohmann::ordered_json run_report(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json" &&
        e.path().filename() != "report.json")
      files.push_back(e.path().filename().string());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error(
        "no artifacts in " + dir +
        "; expected json outputs of: validate | net | color | extend-frame | oscillator | "
        "embed | distortion | sweep");

  nlohmann::ordered_json rep;
  rep["kind"] = "report";
  nlohmann::ordered_json arts = nlohmann::ordered_json::array();
  int pass = 0, fail = 0, neutral = 0;
  for (const auto& f : files) {
    std::ifstream in(fs::path(dir) / f);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    nlohmann::ordered_json item;
    item["file"] = f;
    item["fnv1a64"] = fnv1a64(text);
    try {
      auto j = nlohmann::ordered_json::parse(text);
      item["valid_json"] = true;
      if (j.contains("kind")) item["artifact_kind"] = j["kind"];
      if (j.contains("ok")) {
        const bool ok = j["ok"].get<bool>();
        item["ok"] = ok;
        (ok ? pass : fail) += 1;
      } else {
        ++neutral;
      }
    } catch (...) {
      item["valid_json"] = false;
      ++fail;
    }
    arts.push_back(item);
  }
  rep["artifacts"] = arts;
  rep["pass"] = pass;
  rep["fail"] = fail;
  rep["informational"] = neutral;
  return rep;
}

void write_cloud_csv(const std::string& path, const PointCloud& cloud,
                     const std::vector<std::string>& names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << "\n";
  out.precision(17);
  for (int p = 0; p < cloud.size(); ++p) {
    const double* v = cloud.point(p);
    for (int c = 0; c < cloud.dim(); ++c) out << (c ? "," : "") << v[c];
    out << "\n";
  }
}

std::pair<int, std::vector<double>> read_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(in, header);
  int dim = 1;
  for (char ch : header)
    if (ch == ',') ++dim;
  std::vector<double> coords;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int got = 0;
    while (std::getline(ss, cell, ',')) {
      coords.push_back(std::stod(cell));
      ++got;
    }
    if (got != dim) throw std::runtime_error("ragged cloud csv: " + path);
  }
  return {dim, coords};
}

std::vector<std::string> carnot_coordinate_names(const StratifiedAlgebra& alg) {
  std::vector<std::string> names;
  for (int e = 0; e < alg.dim(); ++e) {
    auto [r, i] = alg.unflat(e);
    names.push_back("x_" + std::to_string(r) + "_" + std::to_string(i));
  }
  return names;
}

}  // namespace carnot
