#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "carnot/diffops.hpp"
#include "carnot/frames.hpp"
#include "carnot/group.hpp"
#include "carnot/nets.hpp"

namespace carnot {

// --- bilinear form and the explicit Leibniz solve ------------------------

// B(phi, psi)(p) = Sym((X_i phi . X_j psi)), horizontal derivatives by
// central differences along exp(+-h X_i) flows.
std::vector<std::vector<double>> bilinear_form_B(const GroupOps& ops, const MapFn& phi,
                                                 const MapFn& psi, const std::vector<double>& p,
                                                 double fd_step);

// Rows of T_psi(p): X_i psi (k of them), X_i X_j psi (i <= j), X_{2,i'} psi.
std::vector<std::vector<double>> t_psi_rows(const GroupOps& ops, const MapFn& psi,
                                            const std::vector<double>& p, double fd_step);

struct ExplicitSolveResult {
  std::vector<double> phi;
  double row_wedge = 0.0;  // wedge norm of the T rows (the freeness witness)
};

// phi_explicit(p) = T_psi(p)^{-1}(0, -F(p), 0); throws linalg::SingularityError
// carrying the Gram determinant when the rows are dependent.
ExplicitSolveResult explicit_solve(const GroupOps& ops, const MapFn& psi,
                                   const std::vector<std::vector<double>>& F,
                                   const std::vector<double>& p, double fd_step,
                                   double rank_tol = -1.0);

// --- grids and the dilated-mollifier low pass -----------------------------

struct Grid {
  const GroupOps* ops = nullptr;
  std::vector<int> shape;       // cells per coordinate
  std::vector<double> origin;   // lower corner
  std::vector<double> spacing;  // per coordinate

  long size() const;
  std::vector<double> point(long flat_index) const;
  long index(const std::vector<int>& multi) const;
  double cell_volume() const;
  // metric resolution: max_e spacing_e^{1/w_e}
  double resolution() const;
};

Grid centered_grid(const GroupOps& ops, double radius, int cells_per_axis);

struct GridFn {
  Grid grid;
  int D = 0;
  std::vector<double> values;  // grid.size() * D

  const double* at(long idx) const { return values.data() + static_cast<std::size_t>(idx) * D; }
  double* at(long idx) { return values.data() + static_cast<std::size_t>(idx) * D; }
  // multilinear interpolation in coordinates; clamps to the box
  std::vector<double> interp(const std::vector<double>& p) const;
  MapFn as_fn() const;
};

GridFn sample_on_grid(const Grid& grid, const MapFn& f, int D);

// Group convolution with a product-form bump dilated by delta_{1/N} and
// discretely normalized to unit mass. Kernel: prod_e b(x_e N^{w_e}) with
// b(t) = exp(-1/(1-t^2)) on (-1,1). Throws when the grid is coarser than 1/N.
GridFn mollifier_lowpass(const GridFn& f, double N);

// --- isometry field (rescaled rows + Gram-Schmidt + frame extension) ------

struct IsometryField {
  const PointCloud* cloud = nullptr;
  int D = 0;
  int d0 = 0;
  std::vector<double> columns;  // npts * d0 * D
  double max_perp_residual = 0.0;
  double min_row_wedge = 0.0;
  std::vector<ExtensionDiagnostics> extension_steps;

  const double* column(int point, int j) const {
    return columns.data() + (static_cast<std::size_t>(point) * d0 + j) * D;
  }
  // apply U(p) to s in R^{d0}
  std::vector<double> apply(int point, const std::vector<double>& s) const;
};

struct IsometryOptions {
  double M = 1.0;
  double A = 2.0;
  double fd_step = 1e-4;
  double K = 2.0;  // declared doubling constant for the extension steps
  std::uint64_t seed = 0;
  double wedge_tol = 1e-10;
};

IsometryField build_isometry_field(const GroupOps& ops, const MapFn& psi, const PointCloud& cloud,
                                   int d0, const IsometryOptions& opt);

// --- Weierstrass assembly --------------------------------------------------

struct LacunaryFamily {
  double A = 2.0;
  int M1 = 0, M2 = 0;
  bool shared_block = false;      // all scales write the same coordinates
  std::vector<int> dims;          // block size per scale (one per m)
  std::vector<MapFn> phi;         // indexed m - M1

  int scale_count() const { return M2 - M1 + 1; }
  int total_dim() const;
};

struct EmbeddingMap {
  int dim = 0;
  MapFn eval;
  std::string provenance;
};

double predicted_holder_M(double A, double eps);  // (1 - A^{-2 eps})^{-1/2}

EmbeddingMap assemble_weierstrass(const LacunaryFamily& family, double eps,
                                  const std::vector<double>& base);

struct HolderDiag {
  double constant = 0.0;
  int witness_p = -1, witness_q = -1;
  long pairs = 0;
};

// sup over pairs of |Phi(p) - Phi(q)| / d(p,q)^(1-eps); exhaustive when the
// pair count fits the budget, otherwise seeded sampling.
HolderDiag measure_holder(const PointCloud& cloud, const std::vector<std::vector<double>>& values,
                          double eps, long pair_budget = 2000000, std::uint64_t seed = 0);

std::vector<std::vector<double>> embed_all(const PointCloud& cloud, const EmbeddingMap& map);

// Phi(p) = (2^{(m-1)(1-eps)} Phi1(delta_{2^{-m+1}} p))_{m=1..a}
EmbeddingMap concatenate_scales(const GroupOps& ops, const EmbeddingMap& phi1, double eps, int a);

// --- Assouad-type bump families -------------------------------------------

struct AssouadOptions {
  double A = 2.0;
  int extra_coarse_scales = 160;  // scales appended above the diameter
  double tent_radius_factor = 1.5;
  double color_sep_factor = 5.0;
};

// Net-based truncated-distance bumps at every scale A^m. shared = true sums
// all scales into one block (the epsilon^{-1} comparator), false gives each
// scale its own block (the Pythagorean route).
LacunaryFamily assouad_family(const PointCloud& cloud, bool shared,
                              const AssouadOptions& opt = {});

EmbeddingMap assouad_baseline(const PointCloud& cloud, double eps, const AssouadOptions& opt = {});

// --- bounded-depth Nash-Moser residual ledger ------------------------------

struct NashMoserLevel {
  double N = 0.0;
  double residual_c0 = 0.0;     // |B(phi_{<=N}, P_{<=N} psi) - P_{<=N} F|_C0
  double correction_c0 = 0.0;   // |phi_(N)|_C0
};

// Runs the explicit low-frequency solve and <= `levels` dyadic corrections on
// a grid, reporting the residual ledger. Diagnostic only: no convergence
// claim is asserted or implied at finite depth.
std::vector<NashMoserLevel> nash_moser_diagnostic(const GroupOps& ops, const GridFn& psi,
                                                  const GridFn& F, double N0, int levels,
                                                  double fd_step, double interior_margin);

std::uint64_t fnv1a64(const std::string& s);

}  // namespace carnot
