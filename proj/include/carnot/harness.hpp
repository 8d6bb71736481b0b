#pragma once

#include <functional>
#include <string>
#include <vector>

#include "carnot/embed.hpp"
#include "carnot/nets.hpp"

#include <nlohmann/json.hpp>

namespace carnot {

// Discrete ball of the integer Heisenberg lattice <exp(X_1), exp(X_2)>,
// generated breadth-first with quasimetric pruning. Throws when R < 2 or
// when the projected point count exceeds the budget.
PointCloud generate_heisenberg_ball(const GroupOps& ops, double R, long max_points = 500000);

struct DistortionReport {
  double distortion = 1.0;
  double expansion = 0.0;    // max |f(p)-f(q)| / d^(1-eps), with witness
  double contraction = 0.0;  // min of the same ratio, with witness
  int exp_p = -1, exp_q = -1;
  int con_p = -1, con_q = -1;
  double exponent = 1.0;  // 1 - eps
  long pairs = 0;
  double seconds = 0.0;
  bool collapsed = false;  // some positive-distance pair mapped to one point
};

// Exhaustive over pairs when the cloud has <= 3000 points, otherwise 1e6
// seeded samples with both extremes refined against all partners of their
// endpoints.
DistortionReport distortion(const PointCloud& cloud,
                            const std::vector<std::vector<double>>& values, double eps,
                            std::uint64_t seed = 0);

using EmbeddingBuilder = std::function<EmbeddingMap(const PointCloud&, double eps)>;

struct SweepRow {
  double eps = 0.0;
  double distortion = 0.0;
  double holder_upper = 0.0;
  double holder_lower = 0.0;
  bool ok = false;
  std::string note;
};

std::vector<SweepRow> sweep_epsilon(const PointCloud& cloud, const EmbeddingBuilder& builder,
                                    const std::vector<double>& eps_list, std::uint64_t seed = 0);

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
  int points = 0;
};

// least squares of log(y) against log(x)
SlopeFit fit_loglog(const std::vector<std::pair<double, double>>& xy);
// the harness convention: log(distortion) against log(1/eps)
SlopeFit fit_loglog_slope(const std::vector<SweepRow>& rows);

nlohmann::ordered_json distortion_to_json(const DistortionReport& rep);
nlohmann::ordered_json sweep_to_json(const std::vector<SweepRow>& rows, const SlopeFit& fit);

// Gathers every *.json artifact under dir into one self-contained summary
// (per-file content hash, verdict fields when present). Pure function of the
// directory contents. Throws when no artifacts are found.
nlohmann::ordered_json run_report(const std::string& dir);

// cloud CSV: header row naming the coordinates x_r_i
void write_cloud_csv(const std::string& path, const PointCloud& cloud,
                     const std::vector<std::string>& names);
std::pair<int, std::vector<double>> read_cloud_csv(const std::string& path);

std::vector<std::string> carnot_coordinate_names(const StratifiedAlgebra& alg);

}  // namespace carnot
