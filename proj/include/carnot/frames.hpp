#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carnot/nets.hpp"
#include "carnot/rng.hpp"

namespace carnot {

// A tuple of m vector fields over a cloud, orthonormal at every point,
// stored field-major. lipschitz_bound is the declared (verified) constant
// shared by all fields.
struct FrameField {
  const PointCloud* cloud = nullptr;
  int D = 0;
  int m = 0;
  double lipschitz_bound = 1.0;
  std::vector<double> values;  // m * npts * D

  const double* at(int field, int point) const {
    return values.data() + (static_cast<std::size_t>(field) * cloud->size() + point) * D;
  }
  double* at(int field, int point) {
    return values.data() + (static_cast<std::size_t>(field) * cloud->size() + point) * D;
  }

  static FrameField constant(const PointCloud& cloud, const std::vector<std::vector<double>>& vs,
                             double lipschitz_bound = 1.0);
};

struct FrameValidation {
  double max_norm_dev = 0.0;   // | |v| - 1 |
  double max_cross_dot = 0.0;  // |v_i . v_j|, i != j
  double max_lip_ratio = 0.0;  // |v(p)-v(q)| / (L d(p,q))
  bool ok() const {
    return max_norm_dev <= 1e-9 && max_cross_dot <= 1e-9 && max_lip_ratio <= 1.0 + 1e-6;
  }
};

FrameValidation verify_frame(const FrameField& frame, long pair_budget = 200000,
                             std::uint64_t seed = 0);

struct ExtensionConfig {
  double K = 2.0;
  int m = 1;
  int D = 0;
  std::uint64_t seed = 0;
  double delta = 0.0;    // 1 / (8 K m)
  double eps_cap = 0.0;  // 1 / (4 K^2)
  bool gap_ok = false;   // D - m >= 224 K^4 log K
  long resample_budget = -1;  // default 100 * |net|

  static ExtensionConfig derive(double K, int m, int D, std::uint64_t seed = 0);
};

// Uniform sample from the unit sphere of the orthocomplement of the given
// orthonormal rows (a projected Gaussian).
std::vector<double> sample_orthocomplement_unit(const std::vector<const double*>& basis, int D,
                                                Rng& rng);

struct DiscreteAssignment {
  const Net* net = nullptr;
  int D = 0;
  std::vector<double> vectors;  // net.size() * D
  long resamples = 0;
  bool success = false;
  long surviving_events = 0;

  const double* at(int i) const { return vectors.data() + static_cast<std::size_t>(i) * D; }
};

// Moser-Tardos resampling of the bad events A_p = { exists q within 2 delta
// with |v'(p) . v'(q)| > eps_cap }; lowest violated index first, so runs are
// reproducible for a fixed seed.
DiscreteAssignment lll_resample(const Net& net, const FrameField& frame,
                                const ExtensionConfig& config);

// Normalized tent weights (q, phi_q(p)) with sum of squares 1; support of
// each tent is B_{2 delta}(q). Throws if p is not covered (net not maximal).
// Returned indices are local net indices.
std::vector<std::pair<int, double>> quadratic_partition(const Net& net, double delta,
                                                        int point_index);

struct ExtensionWitness {
  int point = -1;
  int other = -1;  // pair partner for Lipschitz / LLL witnesses
  double value = 0.0;
};

struct ExtensionDiagnostics {
  double K = 0.0;
  int m = 0;
  int D = 0;
  std::uint64_t seed = 0;
  double delta = 0.0, eps_cap = 0.0;
  double metric_scale = 1.0;  // > 1 when the input frame is more than 1-Lipschitz
  bool gap_ok = false;
  long net_size = 0;
  long resamples = 0;
  bool lll_success = false;
  long lll_recheck_violations = 0;  // exhaustive, must be 0

  double min_interp_sq = 0.0, max_interp_sq = 0.0;  // bound (1): [3/4, 5/4]
  double max_frame_dot = 0.0;                       // bound (2): <= 1/(4m)
  double lipschitz_emp = 0.0, lipschitz_cap = 0.0;  // bound (3)
  long lipschitz_pairs = 0;
  bool lipschitz_exhaustive = false;
  double ortho_residual = 0.0;  // final field orthonormality defect
  double doubling_estimate = 0.0;
  bool doubling_warning = false;

  ExtensionWitness w_interp, w_dot, w_lip;
  bool bound1_ok = false, bound2_ok = false, bound3_ok = false;
  bool ok() const { return lll_success && lll_recheck_violations == 0 && bound1_ok && bound2_ok && bound3_ok; }
};

struct ExtensionResult {
  FrameField extended;  // m + 1 fields
  ExtensionDiagnostics diag;
};

// The full pipeline: net -> LLL resampling -> quadratic partition
// interpolation -> bounds audit -> Gram-Schmidt. Never throws on a bound
// violation; the diagnostics carry the witnesses.
ExtensionResult extend_frame(const PointCloud& cloud, const FrameField& frame,
                             ExtensionConfig config);

struct RepeatedExtensionResult {
  FrameField frame;
  std::vector<ExtensionDiagnostics> steps;
  bool ok = true;
};

// Adds count new fields one at a time, re-deriving delta and eps_cap at each
// running m.
RepeatedExtensionResult extend_frame_repeated(const PointCloud& cloud, const FrameField& frame,
                                              int count, double K, std::uint64_t seed = 0);

// CSV: one row per (point index, field index, D coordinates)
void write_frame_csv(const FrameField& frame, const std::string& path);
FrameField read_frame_csv(const PointCloud& cloud, const std::string& path);

}  // namespace carnot
