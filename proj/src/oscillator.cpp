#include "carnot/oscillator.hpp"

#include <cmath>

#include "carnot/linalg.hpp"

namespace carnot {

namespace {

long factorial(int n) {
  long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void gen_monomials(int nvars, int degree, int start, std::vector<std::uint8_t>& cur,
                   std::vector<std::vector<std::uint8_t>>& out) {
  if (degree == 0) {
    out.push_back(cur);
    return;
  }
  for (int v = start; v < nvars; ++v) {
    cur[v] += 1;
    gen_monomials(nvars, degree - 1, v, cur, out);
    cur[v] -= 1;
  }
}

}  // namespace

VeroneseMap veronese_map(const GroupOps& ops) {
  const int n = ops.dim();
  const int s = ops.step();
  VeroneseMap vm;
  vm.map.nvars = n;
  for (int r = 1; r <= s; ++r) {
    std::vector<std::vector<std::uint8_t>> monos;
    std::vector<std::uint8_t> cur(n, 0);
    gen_monomials(n, r, 0, cur, monos);
    for (auto& m : monos) {
      long mufact = 1;
      for (int v = 0; v < n; ++v) mufact *= factorial(m[v]);
      vm.map.comps.push_back(
          Polynomial<Rational>::monomial(n, m, Rational(1, mufact)));
      vm.powers.push_back(m);
    }
  }
  return vm;
}

Rational veronese_wedge_exact(const GroupOps& ops, const VeroneseMap& vm,
                              const std::vector<Rational>& p) {
  const auto words = ordered_words(ops.algebra());
  const std::size_t V = vm.map.comps.size();
  if (words.size() != V) throw std::logic_error("word/component count mismatch");
  std::vector<std::vector<Rational>> mat(words.size(), std::vector<Rational>(V));
  for (std::size_t w = 0; w < words.size(); ++w)
    for (std::size_t c = 0; c < V; ++c)
      mat[w][c] = apply_word(ops, words[w], vm.map.comps[c]).eval(p);
  Rational det = linalg::det_rational(std::move(mat));
  if (det < 0) det = -det;
  return det;
}

double cutoff_profile(double t) {
  // smooth step built from exp(-1/u), 1 on [0, 1.1], 0 on [1.45, inf)
  constexpr double lo = 1.1, hi = 1.45;
  if (t <= lo) return 1.0;
  if (t >= hi) return 0.0;
  const double u = (hi - t) / (hi - lo);
  const auto bump = [](double v) { return v > 0.0 ? std::exp(-1.0 / v) : 0.0; };
  return bump(u) / (bump(u) + bump(1.0 - u));
}

double cutoff_eta(const GroupOps& ops, const std::vector<double>& p) {
  return cutoff_profile(ops.smooth_gauge(p));
}

OscillatorMap::OscillatorMap(const GroupOps& ops, VeroneseMap vm,
                             std::vector<std::vector<std::vector<double>>> translates_per_color)
    : ops_(&ops),
      veronese_d_(vm.map.convert<double>()),
      comps_(static_cast<int>(vm.map.comps.size())),
      n_colors_(static_cast<int>(translates_per_color.size())),
      translates_(std::move(translates_per_color)) {}

std::vector<double> OscillatorMap::operator()(const std::vector<double>& p) const {
  std::vector<double> out(static_cast<std::size_t>(n_colors_) * comps_, 0.0);
  for (int a = 0; a < n_colors_; ++a) {
    double* block = out.data() + static_cast<std::size_t>(a) * comps_;
    for (const auto& g : translates_[a]) {
      const auto rel = ops_->product(ops_->inverse(g), p);
      const double eta = cutoff_eta(*ops_, rel);
      if (eta == 0.0) continue;
      const auto val = veronese_d_.eval(rel);
      for (int c = 0; c < comps_; ++c) block[c] += eta * val[c];
    }
  }
  return out;
}

OscillatorMap paste_oscillator(const GroupOps& ops, const Net& unit_net,
                               const Coloring& coloring) {
  if (coloring.net != &unit_net) throw std::invalid_argument("coloring is not for this net");
  const auto classes = coloring.classes();
  std::vector<std::vector<std::vector<double>>> translates(classes.size());
  for (std::size_t a = 0; a < classes.size(); ++a)
    for (int idx : classes[a]) translates[a].push_back(unit_net.cloud->point_vec(idx));
  return OscillatorMap(ops, veronese_map(ops), std::move(translates));
}

double wedge_lower_bound_numeric(const GroupOps& ops, const MapFn& f,
                                 const std::vector<double>& p, double h, bool richardson) {
  const auto words = ordered_words(ops.algebra());
  std::vector<std::vector<double>> rows;
  rows.reserve(words.size());
  for (const auto& w : words)
    rows.push_back(richardson ? fd_word_derivative_rich(ops, f, w.letters, p, h)
                              : fd_word_derivative(ops, f, w.letters, p, h));
  return linalg::wedge_norm(rows);
}

}  // namespace carnot
