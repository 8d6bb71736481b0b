#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "carnot/group.hpp"
#include "carnot/rng.hpp"

namespace carnot {

// A finite point cloud with a pair-distance oracle. Coordinates are stored
// flat; the metric closure captures everything it needs.
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(int dim, std::vector<double> coords,
             std::function<double(const double*, const double*)> metric, bool quasi)
      : dim_(dim), coords_(std::move(coords)), metric_(std::move(metric)), quasi_(quasi) {}

  int size() const { return dim_ == 0 ? 0 : static_cast<int>(coords_.size()) / dim_; }
  int dim() const { return dim_; }
  bool quasi() const { return quasi_; }
  const double* point(int i) const { return coords_.data() + static_cast<std::size_t>(i) * dim_; }
  std::vector<double> point_vec(int i) const {
    return std::vector<double>(point(i), point(i) + dim_);
  }
  const std::vector<double>& raw() const { return coords_; }

  double dist(int i, int j) const { return metric_(point(i), point(j)); }
  double dist_to(int i, const double* q) const { return metric_(point(i), q); }
  const std::function<double(const double*, const double*)>& metric_fn() const { return metric_; }

 private:
  int dim_ = 0;
  std::vector<double> coords_;
  std::function<double(const double*, const double*)> metric_;
  bool quasi_ = false;
};

PointCloud make_euclidean_cloud(int dim, std::vector<double> coords);
// quasimetric N(p^{-1} q); symmetric because inversion negates coordinates
PointCloud make_carnot_cloud(const GroupOps& ops, std::vector<double> coords);
// smooth-gauge variant used by the oscillator pasting
PointCloud make_gauge_cloud(const GroupOps& ops, std::vector<double> coords);

struct Net {
  const PointCloud* cloud = nullptr;
  double delta = 0.0;
  std::vector<int> members;  // cloud indices

  int size() const { return static_cast<int>(members.size()); }
};

// Greedy scan in input order; maximal by construction. Throws on empty cloud.
Net greedy_maximal_net(const PointCloud& cloud, double delta);

struct NetReport {
  std::vector<std::pair<int, int>> separation_violations;  // member pairs too close
  std::vector<int> covering_violations;                    // uncovered cloud points
  bool ok() const { return separation_violations.empty() && covering_violations.empty(); }
};

NetReport verify_net(const Net& net);

// |N_delta cap B_R(center)| <= (2R/delta + 1)^{n_h}
bool ball_count_check(const Net& net, double radius, int center, int hdim);
long net_ball_count(const Net& net, double radius, int center);

struct Coloring {
  const Net* net = nullptr;
  double coarse_sep = 0.0;
  std::vector<int> color_of;  // per net member (local index)
  int n_colors = 0;

  std::vector<std::vector<int>> classes() const;  // cloud indices per color
};

// Greedy in member order; every class is a coarse_sep-net of its members.
Coloring color_net(const Net& net, double coarse_sep);

struct DoublingProfile {
  double K_est = 0.0;
  int hdim = 0;
};

// Empirical doubling constant from net counts |N_delta cap B_{2^m delta}|.
DoublingProfile estimate_doubling(const Net& net, int max_m = 2);

double quasimetric(const GroupOps& ops, const std::vector<double>& p,
                   const std::vector<double>& q);

struct CcResult {
  double length = 0.0;
  bool feasible = false;
  double endpoint_residual = 0.0;  // quasinorm of the endpoint defect
  int iterations_used = 0;
};

struct CcOptions {
  int n_segments = 12;
  int iterations = 400;
  int restarts = 4;
  double endpoint_tol = 1e-6;
  std::uint64_t seed = 0;
};

// Length of a feasible piecewise-horizontal path from p to q: controls are
// integrated exactly as products of horizontal exponentials, so the returned
// value is always an upper bound for the CC distance. Infeasibility at the
// given budget is reported, never silently mis-answered.
CcResult cc_upper_bound(const GroupOps& ops, const std::vector<double>& p,
                        const std::vector<double>& q, const CcOptions& opt = {});

struct CalibrationResult {
  double c_low = 0.0;   // min cc / quasimetric over sampled pairs
  double c_high = 0.0;  // max cc / quasimetric over sampled pairs
  int pairs_used = 0;
};

CalibrationResult calibrate_equivalence(const GroupOps& ops, const PointCloud& cloud,
                                        int samples, const CcOptions& opt, Rng& rng);

}  // namespace carnot
