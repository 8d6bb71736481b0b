// carnot: Carnot-group snowflake embedding toolkit.
//
// Subcommands: validate, net, color, extend-frame, oscillator, embed,
// distortion, sweep, report. All outputs are UTF-8 JSON/CSV; every randomized
// path is seeded and reruns are bitwise identical.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "carnot/embed.hpp"
#include "carnot/frames.hpp"
#include "carnot/harness.hpp"
#include "carnot/oscillator.hpp"

#include <nlohmann/json.hpp>

using namespace carnot;
namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::string group_file;
  std::string builtin = "h3";
  std::string cloud_file;
  double ball_radius = 0.0;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::string scalar = "f64";
  double tol = 1e-9;
};

StratifiedAlgebra load_algebra(const CommonOpts& o) {
  if (!o.group_file.empty()) return StratifiedAlgebra::from_json_file(o.group_file);
  if (o.builtin == "h3") return StratifiedAlgebra::heisenberg3();
  if (o.builtin == "h5") return StratifiedAlgebra::heisenberg5();
  if (o.builtin == "engel4") return StratifiedAlgebra::engel4();
  throw std::runtime_error("unknown builtin group: " + o.builtin);
}

PointCloud load_cloud(const CommonOpts& o, const GroupOps& ops, bool gauge_metric = false) {
  if (o.ball_radius > 0.0) {
    auto ball = generate_heisenberg_ball(ops, o.ball_radius);
    if (!gauge_metric) return ball;
    return make_gauge_cloud(ops, ball.raw());
  }
  if (o.cloud_file.empty()) throw std::runtime_error("need --cloud or --ball");
  auto [dim, coords] = read_cloud_csv(o.cloud_file);
  if (dim != ops.dim())
    throw std::runtime_error("cloud dimension does not match the group");
  return gauge_metric ? make_gauge_cloud(ops, coords) : make_carnot_cloud(ops, coords);
}

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_cloud) {
  cmd->add_option("--group", o.group_file, "group spec json");
  cmd->add_option("--builtin", o.builtin, "builtin group: h3|h5|engel4");
  if (needs_cloud) {
    cmd->add_option("--cloud", o.cloud_file, "point cloud csv");
    cmd->add_option("--ball", o.ball_radius, "generate the h3 lattice ball of this radius");
  }
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "rng seed (default 0)");
  cmd->add_option("--scalar", o.scalar, "rational|f64");
  cmd->add_option("--tol", o.tol, "tolerance knob");
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

void write_embedding_csv(const fs::path& path, const std::vector<std::vector<double>>& values) {
  std::ofstream out(path);
  out.precision(17);
  out << "point";
  if (!values.empty())
    for (std::size_t c = 0; c < values[0].size(); ++c) out << ",e" << c;
  out << "\n";
  for (std::size_t p = 0; p < values.size(); ++p) {
    out << p;
    for (double v : values[p]) out << "," << v;
    out << "\n";
  }
}

std::vector<std::vector<double>> read_embedding_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // point index
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    values.push_back(std::move(row));
  }
  return values;
}

nlohmann::ordered_json frame_diag_json(const ExtensionDiagnostics& d) {
  nlohmann::ordered_json j;
  j["kind"] = "extend-frame";
  j["K"] = d.K;
  j["m"] = d.m;
  j["D"] = d.D;
  j["seed"] = d.seed;
  j["delta"] = d.delta;
  j["eps_cap"] = d.eps_cap;
  j["metric_scale"] = d.metric_scale;
  j["gap_ok"] = d.gap_ok;
  j["net_size"] = d.net_size;
  j["resamples"] = d.resamples;
  j["lll_success"] = d.lll_success;
  j["lll_recheck_violations"] = d.lll_recheck_violations;
  j["min_interp_sq"] = d.min_interp_sq;
  j["max_interp_sq"] = d.max_interp_sq;
  j["max_frame_dot"] = d.max_frame_dot;
  j["frame_dot_cap"] = 1.0 / (4.0 * d.m);
  j["lipschitz_emp"] = d.lipschitz_emp;
  j["lipschitz_cap"] = d.lipschitz_cap;
  j["lipschitz_pairs"] = d.lipschitz_pairs;
  j["lipschitz_exhaustive"] = d.lipschitz_exhaustive;
  j["ortho_residual"] = d.ortho_residual;
  j["doubling_estimate"] = d.doubling_estimate;
  j["doubling_warning"] = d.doubling_warning;
  j["witness_interp_point"] = d.w_interp.point;
  j["witness_dot"] = {d.w_dot.point, d.w_dot.other};
  j["witness_lip"] = {d.w_lip.point, d.w_lip.other};
  j["bounds_ok"] = {d.bound1_ok, d.bound2_ok, d.bound3_ok};
  j["ok"] = d.ok();
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carnot group snowflake-embedding toolkit"};
  app.require_subcommand(1);

  // validate ---------------------------------------------------------------
  auto* validate = app.add_subcommand("validate", "check the stratification axioms of a group spec");
  std::string validate_file;
  CommonOpts vopts;
  validate->add_option("spec", validate_file, "group spec json (omit to use --builtin)");
  add_common(validate, vopts, false);

  // net --------------------------------------------------------------------
  auto* net_cmd = app.add_subcommand("net", "greedy maximal delta-net of a cloud");
  CommonOpts nopts;
  double net_delta = 1.0;
  add_common(net_cmd, nopts, true);
  net_cmd->add_option("--delta", net_delta, "net separation")->required();

  // color ------------------------------------------------------------------
  auto* color_cmd = app.add_subcommand("color", "greedy coloring of a net into coarse nets");
  CommonOpts copts;
  std::string color_net_file;
  double coarse_sep = 3.0;
  add_common(color_cmd, copts, true);
  color_cmd->add_option("--net", color_net_file, "net json from `carnot net`")->required();
  color_cmd->add_option("--coarse-sep", coarse_sep, "coarse separation (default 3)");

  // extend-frame -------------------------------------------------------------
  auto* ext_cmd = app.add_subcommand("extend-frame", "orthonormal frame extension (LLL pipeline)");
  CommonOpts eopts;
  std::string frame_file;
  double ext_K = 2.0;
  long ext_budget = -1;
  bool euclidean_cloud = false;
  add_common(ext_cmd, eopts, true);
  ext_cmd->add_option("--frame", frame_file, "frame csv")->required();
  ext_cmd->add_option("--K", ext_K, "declared doubling constant (default 2)");
  ext_cmd->add_option("--budget", ext_budget, "resample budget (default 100*net)");
  ext_cmd->add_flag("--euclidean", euclidean_cloud, "treat the cloud columns as Euclidean");

  // oscillator -----------------------------------------------------------------
  auto* osc_cmd = app.add_subcommand("oscillator", "pasted Veronese oscillator evaluation");
  CommonOpts oopts;
  bool osc_wedge = false;
  add_common(osc_cmd, oopts, true);
  osc_cmd->add_flag("--wedge", osc_wedge, "also report finite-difference wedge values");

  // embed ---------------------------------------------------------------------
  auto* embed_cmd = app.add_subcommand("embed", "build a snowflake embedding of a cloud");
  CommonOpts bopts;
  std::string embed_kind;
  double embed_eps = 0.25;
  double embed_A = 2.0;
  add_common(embed_cmd, bopts, true);
  embed_cmd->add_option("kind", embed_kind, "assouad|weierstrass")->required();
  embed_cmd->add_option("--epsilon", embed_eps, "snowflake parameter in (0, 1/4]");
  embed_cmd->add_option("--A", embed_A, "base scale (power of two)");

  // distortion ------------------------------------------------------------------
  auto* dist_cmd = app.add_subcommand("distortion", "bi-Lipschitz distortion of an embedding");
  CommonOpts dopts;
  std::string dist_embedding;
  double dist_eps = 0.25;
  add_common(dist_cmd, dopts, true);
  dist_cmd->add_option("--embedding", dist_embedding, "embedding csv")->required();
  dist_cmd->add_option("--epsilon", dist_eps, "snowflake parameter");

  // sweep -------------------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "epsilon sweep with log-log slope fit");
  CommonOpts sopts;
  std::string sweep_builder = "weierstrass";
  std::string sweep_eps_csv = "0.25,0.125,0.0625,0.03125,0.015625";
  add_common(sweep_cmd, sopts, true);
  sweep_cmd->add_option("--builder", sweep_builder, "assouad|weierstrass");
  sweep_cmd->add_option("--epsilons", sweep_eps_csv, "comma list of epsilon values");

  // report --------------------------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "summarize the artifacts of a run directory");
  std::string report_dir = ".";
  report_cmd->add_option("--dir", report_dir, "run directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      StratifiedAlgebra alg = validate_file.empty()
                                  ? load_algebra(vopts)
                                  : StratifiedAlgebra::from_json_file(validate_file);
      const auto rep = validate_algebra(alg);
      nlohmann::ordered_json j;
      j["kind"] = "validate";
      j["group"] = alg.name();
      j["dim"] = alg.dim();
      j["hdim"] = alg.hdim();
      nlohmann::ordered_json issues = nlohmann::ordered_json::array();
      for (const auto& issue : rep.issues) issues.push_back({{"axiom", issue.axiom}, {"detail", issue.detail}});
      j["issues"] = issues;
      j["ok"] = rep.ok();
      std::cout << j.dump(2) << "\n";
      return rep.ok() ? 0 : 2;
    }

    if (*net_cmd) {
      GroupOps ops(load_algebra(nopts));
      auto cloud = load_cloud(nopts, ops);
      auto net = greedy_maximal_net(cloud, net_delta);
      auto rep = verify_net(net);
      bool volumetric_ok = true;
      for (int m : net.members)
        volumetric_ok = volumetric_ok && ball_count_check(net, 2.0 * net_delta, m, ops.hdim());
      nlohmann::ordered_json j;
      j["kind"] = "net";
      j["delta"] = net_delta;
      j["members"] = net.members;
      j["separation_violations"] = rep.separation_violations.size();
      j["covering_violations"] = rep.covering_violations.size();
      j["volumetric_ok"] = volumetric_ok;
      j["ok"] = rep.ok() && volumetric_ok;
      write_json(fs::path(nopts.out_dir) / "net.json", j);
      if (nopts.ball_radius > 0)
        write_cloud_csv((fs::path(nopts.out_dir) / "cloud.csv").string(), cloud,
                        carnot_coordinate_names(ops.algebra()));
      std::cout << "net of " << net.size() << " members written to " << nopts.out_dir << "\n";
      return j["ok"].get<bool>() ? 0 : 2;
    }

    if (*color_cmd) {
      GroupOps ops(load_algebra(copts));
      auto cloud = load_cloud(copts, ops);
      std::ifstream in(color_net_file);
      if (!in) throw std::runtime_error("cannot open " + color_net_file);
      nlohmann::json nj;
      in >> nj;
      Net net{&cloud, nj.at("delta").get<double>(), nj.at("members").get<std::vector<int>>()};
      auto col = color_net(net, coarse_sep);
      // every class must itself verify at the coarse separation
      bool classes_ok = true;
      for (const auto& cls : col.classes()) {
        Net sub{&cloud, coarse_sep, cls};
        classes_ok = classes_ok && verify_net(sub).separation_violations.empty();
      }
      const double cap = std::pow(7.0, ops.hdim());
      nlohmann::ordered_json j;
      j["kind"] = "color";
      j["coarse_sep"] = coarse_sep;
      j["colors"] = col.n_colors;
      j["color_cap"] = cap;
      j["color_of"] = col.color_of;
      j["classes_are_nets"] = classes_ok;
      j["ok"] = classes_ok && col.n_colors <= cap;
      write_json(fs::path(copts.out_dir) / "coloring.json", j);
      std::cout << col.n_colors << " colors written to " << copts.out_dir << "\n";
      return j["ok"].get<bool>() ? 0 : 2;
    }

    if (*ext_cmd) {
      GroupOps ops(load_algebra(eopts));
      PointCloud cloud;
      if (euclidean_cloud) {
        auto [dim, coords] = read_cloud_csv(eopts.cloud_file);
        cloud = make_euclidean_cloud(dim, coords);
      } else {
        cloud = load_cloud(eopts, ops);
      }
      auto frame = read_frame_csv(cloud, frame_file);
      auto config = ExtensionConfig::derive(ext_K, frame.m, frame.D, eopts.seed);
      config.resample_budget = ext_budget;
      auto res = extend_frame(cloud, frame, config);
      write_frame_csv(res.extended, (fs::path(eopts.out_dir) / "frame_extended.csv").string());
      write_json(fs::path(eopts.out_dir) / "extend_frame.json", frame_diag_json(res.diag));
      std::cout << (res.diag.ok() ? "extension ok" : "extension FAILED (see diagnostics)")
                << ", resamples " << res.diag.resamples << "\n";
      return res.diag.ok() ? 0 : 2;
    }

    if (*osc_cmd) {
      GroupOps ops(load_algebra(oopts));
      auto cloud = load_cloud(oopts, ops, /*gauge=*/true);
      auto net = greedy_maximal_net(cloud, 1.0);
      auto coloring = color_net(net, 3.0);
      auto osc = paste_oscillator(ops, net, coloring);
      std::vector<std::vector<double>> values(cloud.size());
      for (int p = 0; p < cloud.size(); ++p) values[p] = osc(cloud.point_vec(p));
      write_embedding_csv(fs::path(oopts.out_dir) / "oscillator.csv", values);
      nlohmann::ordered_json j;
      j["kind"] = "oscillator";
      j["colors"] = osc.colors();
      j["components_per_color"] = osc.components_per_color();
      j["dim"] = osc.dim();
      if (osc_wedge) {
        double min_wedge = std::numeric_limits<double>::infinity();
        auto f = osc.as_fn();
        for (int p = 0; p < cloud.size(); ++p)
          min_wedge = std::min(min_wedge, wedge_lower_bound_numeric(ops, f, cloud.point_vec(p),
                                                                    4e-3));
        j["min_wedge"] = min_wedge;
        j["ok"] = min_wedge >= 1.0 - 10 * oopts.tol - 0.1;
      }
      if (oopts.scalar == "rational") {
        // certify the unpasted Veronese wedge exactly at random rational points
        auto vm = veronese_map(ops);
        Rng rrng(oopts.seed);
        bool exact_ok = true;
        for (int t = 0; t < 100 && exact_ok; ++t) {
          std::vector<Rational> p(ops.dim());
          for (auto& c : p) c = Rational(rrng.rational_int(-4, 4), rrng.rational_int(1, 3));
          exact_ok = veronese_wedge_exact(ops, vm, p) == Rational(1);
        }
        j["veronese_exact_wedge_ok"] = exact_ok;
      }
      write_json(fs::path(oopts.out_dir) / "oscillator.json", j);
      std::cout << "oscillator with " << osc.colors() << " colors, dim " << osc.dim() << "\n";
      return 0;
    }

    if (*embed_cmd) {
      GroupOps ops(load_algebra(bopts));
      auto cloud = load_cloud(bopts, ops);
      AssouadOptions aopt;
      aopt.A = embed_A;
      EmbeddingMap map;
      if (embed_kind == "assouad") {
        map = assouad_baseline(cloud, embed_eps, aopt);
      } else if (embed_kind == "weierstrass") {
        auto fam = assouad_family(cloud, false, aopt);
        map = assemble_weierstrass(fam, embed_eps, cloud.point_vec(0));
      } else {
        throw std::runtime_error("embed kind must be assouad or weierstrass");
      }
      auto values = embed_all(cloud, map);
      write_embedding_csv(fs::path(bopts.out_dir) / "embedding.csv", values);
      nlohmann::ordered_json j;
      j["kind"] = "embed";
      j["variant"] = embed_kind;
      j["epsilon"] = embed_eps;
      j["A"] = embed_A;
      j["dim"] = map.dim;
      j["provenance"] = map.provenance;
      j["predicted_holder_M"] = predicted_holder_M(embed_A, embed_eps);
      write_json(fs::path(bopts.out_dir) / "embed.json", j);
      std::cout << embed_kind << " embedding into R^" << map.dim << " written\n";
      return 0;
    }

    if (*dist_cmd) {
      GroupOps ops(load_algebra(dopts));
      auto cloud = load_cloud(dopts, ops);
      auto values = read_embedding_csv(dist_embedding);
      if (static_cast<int>(values.size()) != cloud.size())
        throw std::runtime_error("embedding rows do not match the cloud");
      auto rep = distortion(cloud, values, dist_eps, dopts.seed);
      auto j = distortion_to_json(rep);
      j["seed"] = dopts.seed;
      write_json(fs::path(dopts.out_dir) / "distortion.json", j);
      std::cout << "distortion " << rep.distortion << " over " << rep.pairs << " pairs\n";
      return 0;
    }

    if (*sweep_cmd) {
      GroupOps ops(load_algebra(sopts));
      auto cloud = load_cloud(sopts, ops);
      std::vector<double> eps_list;
      std::stringstream ss(sweep_eps_csv);
      std::string cell;
      while (std::getline(ss, cell, ',')) eps_list.push_back(std::stod(cell));
      const bool shared = sweep_builder == "assouad";
      EmbeddingBuilder builder = [shared](const PointCloud& c, double e) {
        AssouadOptions aopt;
        auto fam = assouad_family(c, shared, aopt);
        return assemble_weierstrass(fam, e, c.point_vec(0));
      };
      auto rows = sweep_epsilon(cloud, builder, eps_list, sopts.seed);
      auto fit = fit_loglog_slope(rows);
      auto j = sweep_to_json(rows, fit);
      j["builder"] = sweep_builder;
      j["seed"] = sopts.seed;
      write_json(fs::path(sopts.out_dir) / "sweep.json", j);
      // CSV table for plotting
      std::ofstream csv(fs::path(sopts.out_dir) / "sweep.csv");
      csv << "eps,distortion,holder_upper,holder_lower,ok\n";
      csv.precision(17);
      for (const auto& r : rows)
        csv << r.eps << "," << r.distortion << "," << r.holder_upper << "," << r.holder_lower
            << "," << r.ok << "\n";
      std::cout << "slope " << fit.slope << " over " << fit.points << " rows\n";
      return 0;
    }

    if (*report_cmd) {
      auto j = run_report(report_dir);
      write_json(fs::path(report_dir) / "report.json", j);
      std::cout << "artifacts: " << j["artifacts"].size() << ", pass " << j["pass"] << ", fail "
                << j["fail"] << ", informational " << j["informational"] << "\n";
      return j["fail"].get<int>() == 0 ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
