#include "carnot/algebra.hpp"

#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace carnot {

namespace {

Rational rational_from_json(const nlohmann::json& v) {
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_string()) return Rational(v.get<std::string>());
  if (v.is_number_float()) {
    // floats in specs are expected to be exact small dyadics
    double d = v.get<double>();
    long long den = 1;
    while (d != static_cast<long long>(d) && den < (1LL << 40)) {
      d *= 2;
      den *= 2;
    }
    return Rational(static_cast<long long>(d), den);
  }
  throw std::invalid_argument("bad coefficient in group spec");
}

std::string basis_name(const StratifiedAlgebra& alg, int e) {
  auto [r, i] = alg.unflat(e);
  std::ostringstream os;
  os << "X_{" << r << "," << i << "}";
  return os.str();
}

}  // namespace

StratifiedAlgebra::StratifiedAlgebra(std::string name, std::vector<int> strata_dims)
    : name_(std::move(name)), strata_(std::move(strata_dims)) {
  if (strata_.empty()) throw std::invalid_argument("empty strata list");
  for (int k : strata_)
    if (k <= 0) throw std::invalid_argument("strata dims must be positive");
  dim_ = std::accumulate(strata_.begin(), strata_.end(), 0);
  hdim_ = 0;
  offset_.resize(strata_.size());
  int off = 0;
  for (std::size_t r = 0; r < strata_.size(); ++r) {
    offset_[r] = off;
    off += strata_[r];
    hdim_ += static_cast<int>(r + 1) * strata_[r];
    for (int i = 0; i < strata_[r]; ++i) weight_.push_back(static_cast<int>(r + 1));
  }
  table_.assign(dim_, std::vector<SparseVec>(dim_));
}

std::pair<int, int> StratifiedAlgebra::unflat(int e) const {
  for (std::size_t r = 0; r < strata_.size(); ++r)
    if (e < offset_[r] + strata_[r]) return {static_cast<int>(r + 1), e - offset_[r] + 1};
  throw std::out_of_range("basis index out of range");
}

void StratifiedAlgebra::set_bracket(int a, int b, SparseVec out) {
  SparseVec neg;
  neg.reserve(out.size());
  for (const auto& [c, coeff] : out) neg.emplace_back(c, -coeff);
  table_[a][b] = std::move(out);
  table_[b][a] = std::move(neg);
}

void StratifiedAlgebra::set_bracket_oneway(int a, int b, SparseVec out) {
  table_[a][b] = std::move(out);
}

StratifiedAlgebra StratifiedAlgebra::heisenberg3() {
  StratifiedAlgebra alg("h3", {2, 1});
  alg.set_bracket(alg.flat(1, 1), alg.flat(1, 2), {{alg.flat(2, 1), Rational(1)}});
  return alg;
}

StratifiedAlgebra StratifiedAlgebra::heisenberg5() {
  StratifiedAlgebra alg("h5", {4, 1});
  alg.set_bracket(alg.flat(1, 1), alg.flat(1, 2), {{alg.flat(2, 1), Rational(1)}});
  alg.set_bracket(alg.flat(1, 3), alg.flat(1, 4), {{alg.flat(2, 1), Rational(1)}});
  return alg;
}

StratifiedAlgebra StratifiedAlgebra::engel4() {
  StratifiedAlgebra alg("engel4", {2, 1, 1});
  alg.set_bracket(alg.flat(1, 1), alg.flat(1, 2), {{alg.flat(2, 1), Rational(1)}});
  alg.set_bracket(alg.flat(1, 1), alg.flat(2, 1), {{alg.flat(3, 1), Rational(1)}});
  return alg;
}

StratifiedAlgebra StratifiedAlgebra::from_json(const nlohmann::json& j) {
  const int step = j.at("step").get<int>();
  std::vector<int> dims = j.at("strata_dims").get<std::vector<int>>();
  if (static_cast<int>(dims.size()) != step)
    throw std::invalid_argument("strata_dims length != step");
  StratifiedAlgebra alg(j.value("name", std::string("group")), dims);

  std::vector<std::vector<bool>> given(alg.dim(), std::vector<bool>(alg.dim(), false));
  if (j.contains("brackets")) {
    for (const auto& e : j.at("brackets")) {
      const auto a_ri = e.at("a").get<std::vector<int>>();
      const auto b_ri = e.at("b").get<std::vector<int>>();
      const int a = alg.flat(a_ri.at(0), a_ri.at(1));
      const int b = alg.flat(b_ri.at(0), b_ri.at(1));
      SparseVec out;
      for (const auto& term : e.at("out")) {
        const auto target = term.at(1).get<std::vector<int>>();
        out.emplace_back(alg.flat(target.at(0), target.at(1)), rational_from_json(term.at(0)));
      }
      alg.set_bracket_oneway(a, b, out);
      given[a][b] = true;
    }
  }
  // mirror entries the spec file left implicit
  for (int a = 0; a < alg.dim(); ++a)
    for (int b = 0; b < alg.dim(); ++b)
      if (given[a][b] && !given[b][a]) {
        SparseVec neg;
        for (const auto& [c, coeff] : alg.bracket_basis(a, b)) neg.emplace_back(c, -coeff);
        alg.set_bracket_oneway(b, a, neg);
      }
  return alg;
}

StratifiedAlgebra StratifiedAlgebra::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open group spec: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

nlohmann::json StratifiedAlgebra::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["step"] = step();
  j["strata_dims"] = strata_;
  nlohmann::json brackets = nlohmann::json::array();
  for (int a = 0; a < dim_; ++a)
    for (int b = a + 1; b < dim_; ++b) {
      if (table_[a][b].empty()) continue;
      nlohmann::json e;
      auto [ar, ai] = unflat(a);
      auto [br, bi] = unflat(b);
      e["a"] = {ar, ai};
      e["b"] = {br, bi};
      nlohmann::json out = nlohmann::json::array();
      for (const auto& [c, coeff] : table_[a][b]) {
        auto [cr, ci] = unflat(c);
        out.push_back({coeff.str(), {cr, ci}});
      }
      e["out"] = out;
      brackets.push_back(e);
    }
  j["brackets"] = brackets;
  return j;
}

namespace {

// exact rank of a list of rational vectors
int rational_rank(std::vector<std::vector<Rational>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows[0].size();
  int rank = 0;
  std::size_t lead = 0;
  for (std::size_t r = 0; r < rows.size() && lead < cols; ++lead) {
    std::size_t piv = r;
    while (piv < rows.size() && rows[piv][lead] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[r], rows[piv]);
    for (std::size_t q = 0; q < rows.size(); ++q) {
      if (q == r || rows[q][lead] == 0) continue;
      const Rational f = rows[q][lead] / rows[r][lead];
      for (std::size_t c = lead; c < cols; ++c) rows[q][c] -= f * rows[r][c];
    }
    ++r;
    ++rank;
  }
  return rank;
}

}  // namespace

ValidationReport validate_algebra(const StratifiedAlgebra& alg) {
  ValidationReport rep;
  const int n = alg.dim();
  const int s = alg.step();

  auto dense = [&](int a, int b) {
    std::vector<Rational> v(n, Rational(0));
    for (const auto& [c, coeff] : alg.bracket_basis(a, b)) v[c] += coeff;
    return v;
  };

  // shape constraints derived in the construction of the paper's groups
  if (s >= 2) {
    if (alg.stratum_dim(1) < 2)
      rep.issues.push_back({"shape", "k_1 >= 2 required when step >= 2"});
    if (alg.stratum_dim(2) < 1) rep.issues.push_back({"shape", "k_2 >= 1 required"});
    if (alg.hdim() < 4) rep.issues.push_back({"shape", "homogeneous dimension must be >= 4"});
  }

  // antisymmetry
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      auto ab = dense(a, b);
      auto ba = dense(b, a);
      bool bad = false;
      for (int c = 0; c < n; ++c)
        if (ab[c] != -ba[c]) bad = true;
      if (bad)
        rep.issues.push_back(
            {"antisymmetry", "[" + basis_name(alg, a) + "," + basis_name(alg, b) + "]"});
    }

  // grading: [V_r, V_r'] subset V_{r+r'}, zero above step s
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int target = alg.weight(a) + alg.weight(b);
      for (const auto& [c, coeff] : alg.bracket_basis(a, b)) {
        if (coeff == 0) continue;
        if (target > s || alg.weight(c) != target) {
          rep.issues.push_back(
              {"grading", "[" + basis_name(alg, a) + "," + basis_name(alg, b) + "] -> " +
                              basis_name(alg, c)});
        }
      }
    }

  // Jacobi on all basis triples
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c) {
        std::vector<Rational> ea(n, Rational(0)), eb(n, Rational(0)), ec(n, Rational(0));
        ea[a] = 1;
        eb[b] = 1;
        ec[c] = 1;
        auto j1 = alg.bracket(alg.bracket(ea, eb), ec);
        auto j2 = alg.bracket(alg.bracket(eb, ec), ea);
        auto j3 = alg.bracket(alg.bracket(ec, ea), eb);
        bool bad = false;
        for (int e = 0; e < n; ++e)
          if (j1[e] + j2[e] + j3[e] != 0) bad = true;
        if (bad)
          rep.issues.push_back({"jacobi", "(" + basis_name(alg, a) + "," + basis_name(alg, b) +
                                              "," + basis_name(alg, c) + ")"});
      }

  // generation: span[V_1, V_r] = V_{r+1}
  for (int r = 1; r < s; ++r) {
    std::vector<std::vector<Rational>> rows;
    for (int i = 1; i <= alg.stratum_dim(1); ++i)
      for (int j = 1; j <= alg.stratum_dim(r); ++j) {
        const int a = alg.flat(1, i);
        const int b = alg.flat(r, j);
        std::vector<Rational> row(alg.stratum_dim(r + 1), Rational(0));
        for (const auto& [c, coeff] : alg.bracket_basis(a, b)) {
          auto [cr, ci] = alg.unflat(c);
          if (cr == r + 1) row[ci - 1] += coeff;
        }
        rows.push_back(std::move(row));
      }
    if (rational_rank(rows) != alg.stratum_dim(r + 1)) {
      rep.issues.push_back(
          {"generation", "[V_1,V_" + std::to_string(r) + "] does not span V_" +
                             std::to_string(r + 1)});
    }
  }

  return rep;
}

}  // namespace carnot
