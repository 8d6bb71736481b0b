#pragma once

#include <string>
#include <utility>
#include <vector>

#include "carnot/rational.hpp"

#include <nlohmann/json_fwd.hpp>

namespace carnot {

// A stratified nilpotent Lie algebra given by structure constants on a fixed
// graded basis X_{r,i}, r = 1..s, i = 1..k_r. Immutable after construction;
// every operation on it is pure.
class StratifiedAlgebra {
 public:
  using SparseVec = std::vector<std::pair<int, Rational>>;  // (flat index, coeff)

  StratifiedAlgebra(std::string name, std::vector<int> strata_dims);

  const std::string& name() const { return name_; }
  int step() const { return static_cast<int>(strata_.size()); }
  int dim() const { return dim_; }
  int hdim() const { return hdim_; }
  const std::vector<int>& strata_dims() const { return strata_; }
  int stratum_dim(int r) const { return strata_[r - 1]; }  // r is 1-based

  // flat index of basis element X_{r,i}; r, i 1-based
  int flat(int r, int i) const { return offset_[r - 1] + (i - 1); }
  std::pair<int, int> unflat(int e) const;
  int weight(int e) const { return weight_[e]; }
  const std::vector<int>& weights() const { return weight_; }

  // Sets [X_a, X_b] = out and the antisymmetric mirror.
  void set_bracket(int a, int b, SparseVec out);
  // Sets only one direction (lets malformed tables be expressed for tests).
  void set_bracket_oneway(int a, int b, SparseVec out);

  const SparseVec& bracket_basis(int a, int b) const { return table_[a][b]; }

  template <class S>
  std::vector<S> bracket(const std::vector<S>& x, const std::vector<S>& y) const {
    if (static_cast<int>(x.size()) != dim_ || static_cast<int>(y.size()) != dim_)
      throw std::invalid_argument("bracket: dimension mismatch");
    std::vector<S> z(dim_, S(0));
    for (int a = 0; a < dim_; ++a) {
      if (x[a] == S(0)) continue;
      for (int b = 0; b < dim_; ++b) {
        if (y[b] == S(0)) continue;
        for (const auto& [c, coeff] : table_[a][b])
          z[c] += x[a] * y[b] * scalar_from_rational<S>(coeff);
      }
    }
    return z;
  }

  static StratifiedAlgebra heisenberg3();
  static StratifiedAlgebra heisenberg5();
  static StratifiedAlgebra engel4();

  static StratifiedAlgebra from_json(const nlohmann::json& j);
  static StratifiedAlgebra from_json_file(const std::string& path);
  nlohmann::json to_json() const;

 private:
  std::string name_;
  std::vector<int> strata_;
  int dim_;
  int hdim_;
  std::vector<int> weight_;
  std::vector<int> offset_;
  std::vector<std::vector<SparseVec>> table_;  // [a][b]
};

struct ValidationIssue {
  std::string axiom;   // "antisymmetry" | "grading" | "jacobi" | "generation" | "shape"
  std::string detail;  // offending basis triple / pair, human readable
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Checks every stratification axiom; never throws, never aborts.
ValidationReport validate_algebra(const StratifiedAlgebra& alg);

}  // namespace carnot
