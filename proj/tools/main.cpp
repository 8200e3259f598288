// polylayer: command-line runner for the bent-strip, voxel and inequality experiments.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "polylayer/assembly.hpp"
#include "polylayer/errors.hpp"
#include "polylayer/report.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace polylayer;
using cli::RunConfig;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_not_converged = 3, exit_inconclusive = 4 };

// Files produced by one run; written only after the computation finished.
struct Outputs {
  Json result;
  std::string status = "ok";
  std::vector<std::pair<std::string, std::string>> files;  // suffix, content
  void add(const std::string& suffix, std::string content) { files.emplace_back(suffix, std::move(content)); }
};

Json geometry_plan(const LayerGeometry& layer) {
  const auto& a = layer.angle();
  return Json{{"faces", a.faces()},
              {"vertex_angles", a.vertex_angles},
              {"dihedral_angles", a.dihedral_angles},
              {"beta_min", layer.beta_min()},
              {"beta_min_edge", layer.beta_min_edge()},
              {"inscribed_ball_residual", layer.inscribed_ball_residual()}};
}

std::vector<double> default_thetas() {
  std::vector<double> t;
  for (int i = 0; i < 12; ++i) t.push_back(0.3 + 2.7 * i / 11);
  return t;
}

std::string csv_line(std::initializer_list<double> values) {
  std::string out;
  char buf[40];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!out.empty()) out += ',';
    out += buf;
  }
  return out + '\n';
}

void mark_inconclusive(Outputs& out, Verdict v) {
  if (v == Verdict::inconclusive) out.status = "inconclusive";
}

Outputs run_angle(const RunConfig& c) {
  Outputs out;
  LayerGeometry layer = c.layer();
  out.result = to_json(layer);
  if (c.wants("csv")) {
    std::string s = "edge,vertex_angle,dihedral_angle\n";
    const auto& a = layer.angle();
    for (int j = 0; j < a.faces(); ++j) s += std::to_string(j) + ',' + csv_line({a.vertex_angles[j], a.dihedral_angles[j]});
    out.add("csv", s);
  }
  return out;
}

Outputs run_waveguide(const RunConfig& c) {
  Outputs out;
  WaveguideMode mode;
  ThresholdResult r = lambda1_waveguide(c.theta, c.waveguide(), &mode);
  out.result = to_json(r);
  if (c.wants("csv")) {
    std::string s = "h,dofs,iterations,lambda1,max_residual\n";
    for (const auto& l : r.levels)
      s += csv_line({l.h, double(l.dofs), double(l.iterations), l.eigenvalues[0], l.max_residual});
    out.add("csv", s);
  }
  if (c.wants("svg")) {
    Series s{"lambda_1(h)", {}, {}};
    for (const auto& l : r.levels) {
      s.x.push_back(l.h);
      s.y.push_back(l.eigenvalues[0]);
    }
    out.add("svg", svg_plot({s}, "first eigenvalue under refinement", "h", "lambda_1"));
  }
  if (c.wants("pgm")) out.add("pgm", pgm_heatmap(mode.mesh, mode.values, 400));
  if (c.dumps) out.add("mesh.txt", mesh_dump(mode.mesh));
  if (c.dumps) out.add("matrix.txt", matrix_dump(assemble_p1(mode.mesh).K));
  return out;
}

Outputs run_scan_theta(const RunConfig& c) {
  Outputs out;
  ThetaScan s = scan_theta(c.thetas.empty() ? default_thetas() : c.thetas, c.waveguide());
  out.result = to_json(s);
  if (c.wants("csv")) out.add("csv", theta_scan_csv(s));
  if (c.wants("svg")) {
    Series lam{"lambda_1", {}, {}}, lo{"pi^2/4", {}, {}}, hi{"pi^2", {}, {}};
    for (const auto& r : s.records) {
      lam.x.push_back(r.parameter);
      lam.y.push_back(r.eigenvalues[0]);
      lo.x.push_back(r.parameter);
      lo.y.push_back(kPi2 / 4);
      hi.x.push_back(r.parameter);
      hi.y.push_back(kPi2);
    }
    out.add("svg", svg_plot({lam, lo, hi}, "first eigenvalue of the bent strip", "theta", "lambda_1"));
  }
  return out;
}

Outputs run_scan_R(const RunConfig& c) {
  Outputs out;
  TruncationScan s = scan_truncation(c.theta, c.R_list, c.waveguide());
  out.result = to_json(s);
  if (c.wants("csv")) out.add("csv", truncation_scan_csv(s));
  if (c.wants("svg")) {
    Series g{"gap", {}, {}};
    for (std::size_t i = 0; i < s.records.size(); ++i)
      if (s.gaps[i] > 0) {
        g.x.push_back(s.records[i].R);
        g.y.push_back(s.gaps[i]);
      }
    out.add("svg", svg_plot({g}, "distance to the long-outlet eigenvalue", "R", "gap", true));
  }
  return out;
}

Outputs run_count(const RunConfig& c) {
  Outputs out;
  CountResult r = count_below_threshold(c.theta, c.waveguide());
  out.result = to_json(r);
  if (c.wants("csv")) {
    std::string s = "index,dirichlet_value,dirichlet_error,neumann_value,neumann_error\n";
    for (std::size_t k = 0; k < r.values.size(); ++k)
      s += std::to_string(k) + ',' + csv_line({r.values[k], r.errors[k], r.neumann_values[k], r.neumann_errors[k]});
    out.add("csv", s);
  }
  return out;
}

Outputs run_layer(const RunConfig& c) {
  Outputs out;
  LayerGeometry layer = c.layer();
  VoxelGrid g = voxelize(layer, c.voxel_R, c.voxel_h, CutCondition::dirichlet);
  out.result = Json{{"geometry", geometry_plan(layer)}, {"grid", grid_summary(g)}};
  if (c.dumps) out.add("cells.txt", active_cells_rle(g));
  return out;
}

Outputs run_certify(const RunConfig& c) {
  Outputs out;
  Certificate cert = certify_discrete(c.layer(), c.voxel(), c.waveguide());
  out.result = to_json(cert);
  mark_inconclusive(out, cert.verdict);
  if (c.wants("csv")) out.add("csv", levels_csv(cert));
  if (c.wants("svg")) {
    Series ub{"upper bound", {}, {}}, thr{"threshold", {}, {}};
    for (const auto& l : cert.levels) {
      ub.x.push_back(l.h);
      ub.y.push_back(l.upper_bound);
      thr.x.push_back(l.h);
      thr.y.push_back(cert.threshold);
    }
    out.add("svg", svg_plot({ub, thr}, "voxel upper bounds", "h", "lambda"));
  }
  return out;
}

Outputs run_certify_veps(const RunConfig& c) {
  Outputs out;
  VepsNumerics vn;
  vn.eps = c.eps;
  vn.mode = c.waveguide();
  Certificate cert = veps_certificate(c.layer(), vn);
  out.result = to_json(cert);
  mark_inconclusive(out, cert.verdict);
  if (c.wants("csv")) out.add("csv", veps_csv(cert));
  if (c.wants("svg")) {
    Series v{"value", {}, {}};
    for (const auto& t : cert.terms) {
      v.x.push_back(std::log10(t.eps));
      v.y.push_back(t.value());
    }
    out.add("svg", svg_plot({v}, "trial functional", "log10 eps", "value"));
  }
  return out;
}

Outputs run_absence(const RunConfig& c) {
  Outputs out;
  Certificate cert = absence_experiment(c.alpha, c.voxel(), c.waveguide(), c.alpha_star);
  out.result = to_json(cert);
  mark_inconclusive(out, cert.verdict);
  if (c.wants("csv")) out.add("csv", levels_csv(cert));
  return out;
}

double exp_decay(double z) { return std::exp(1 - z); }
double inverse(double z) { return 1 / z; }
double zero(double) { return 0; }

Outputs run_hardy(const RunConfig& c) {
  Outputs out;
  if (c.hardy_case != "random") {
    auto f = c.hardy_case == "exp" ? exp_decay : c.hardy_case == "inv" ? inverse : zero;
    HardySample s = sample_function(f, c.hardy_case == "inv" ? 1e4 : 60, 200000, c.hardy_R0);
    HardyReport r = hardy_check(s);
    out.result = Json{{"case", c.hardy_case}, {"report", to_json(r)}};
    if (!r.lemma_holds || !r.corollary_holds) out.status = "violated";
    return out;
  }
  std::string csv = "seed,lemma_lhs,lemma_rhs,corollary_lhs,corollary_rhs\n";
  int lemma_fail = 0, cor_fail = 0;
  double worst = 0;
  for (int i = 0; i < c.hardy_samples; ++i) {
    std::uint64_t seed = c.seed + static_cast<std::uint64_t>(i);
    HardyReport r = hardy_check(random_hardy_sample(seed));
    lemma_fail += !r.lemma_holds;
    cor_fail += !r.corollary_holds;
    if (r.lemma_rhs > 0) worst = std::max(worst, r.lemma_lhs / r.lemma_rhs);
    csv += std::to_string(seed) + ',' + csv_line({r.lemma_lhs, r.lemma_rhs, r.corollary_lhs, r.corollary_rhs});
  }
  out.result = Json{{"case", "random"},
                    {"samples", c.hardy_samples},
                    {"first_seed", c.seed},
                    {"lemma_failures", lemma_fail},
                    {"corollary_failures", cor_fail},
                    {"max_lemma_ratio", worst}};
  if (lemma_fail || cor_fail) out.status = "violated";
  if (c.wants("csv")) out.add("csv", csv);
  return out;
}

Outputs run_weyl(const RunConfig& c) {
  Outputs out;
  WeylDemo demo(c.layer(), c.weyl_h, c.waveguide(), c.weyl_n_max);
  Json rows = Json::array(), overlaps = Json::array();
  std::string csv = "n,kappa,residual,residual_abs,norm,cutoff_radius\n";
  std::vector<Series> series;
  for (double k : c.kappa) {
    Series s{"kappa " + std::to_string(k).substr(0, 4), {}, {}};
    for (int n = c.weyl_n_min; n <= c.weyl_n_max; ++n) {
      WeylResult r = demo.residual(n, k);
      rows.push_back(to_json(r));
      csv += std::to_string(n) + ',' + csv_line({k, r.residual, r.residual_abs, r.norm, r.cutoff_radius});
      s.x.push_back(n);
      s.y.push_back(r.residual);
    }
    series.push_back(s);
  }
  for (int n = c.weyl_n_min; n < c.weyl_n_max; ++n)
    overlaps.push_back({{"n", n}, {"m", n + 1}, {"overlap", demo.overlap(n, n + 1)}});
  out.result = Json{{"lambda", demo.lambda()}, {"residuals", rows}, {"overlaps", overlaps}};
  if (c.wants("csv")) out.add("csv", csv);
  if (c.wants("svg")) out.add("svg", svg_plot(series, "relative residual", "n", "residual", true));
  return out;
}

Outputs run_alpha_star(const RunConfig& c) {
  Outputs out;
  AlphaStar a = alpha_star(c.alpha_tol, c.waveguide());
  out.result = to_json(a);
  if (c.wants("csv")) {
    std::string s = "alpha,lambda1\n";
    for (const auto& [al, v] : a.samples) s += csv_line({al, v});
    out.add("csv", s);
  }
  return out;
}

Outputs dispatch(const RunConfig& c) {
  const std::string& s = c.subcommand;
  if (s == "angle") return run_angle(c);
  if (s == "waveguide") return run_waveguide(c);
  if (s == "scan-theta") return run_scan_theta(c);
  if (s == "scan-R") return run_scan_R(c);
  if (s == "count") return run_count(c);
  if (s == "layer") return run_layer(c);
  if (s == "certify") return run_certify(c);
  if (s == "certify-veps") return run_certify_veps(c);
  if (s == "absence") return run_absence(c);
  if (s == "hardy") return run_hardy(c);
  if (s == "weyl") return run_weyl(c);
  return run_alpha_star(c);
}

Json dry_run_plan(const RunConfig& c) {
  LayerGeometry layer = c.layer();
  Json plan{{"subcommand", c.subcommand}, {"geometry", geometry_plan(layer)}};
  plan["threshold_plan"] = {{"strip_angle", layer.beta_min()},
                            {"h", c.h},
                            {"levels", c.levels},
                            {"R", c.R == 0 ? Json("auto") : Json(c.R)},
                            {"richardson_order", richardson_order(layer.beta_min())}};
  return plan;
}

// Reads --config before CLI11 runs so that command-line flags override file values.
std::string find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

void add_angle(CLI::App* app, const std::string& name, double& target, const std::string& help) {
  app->add_option_function<std::string>(name, [&target](const std::string& s) { target = cli::parse_angle(s); }, help);
}

void add_angle_list(CLI::App* app, const std::string& name, std::vector<double>& target, const std::string& help) {
  app->add_option_function<std::vector<std::string>>(
         name,
         [&target](const std::vector<std::string>& v) {
           target.clear();
           for (const auto& s : v) target.push_back(cli::parse_angle(s));
         },
         help)
      ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string config_path;
  try {
    config_path = find_config_path(argc, argv);
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw InvalidInput("cannot read config file " + config_path);
      cfg = cli::from_json(nlohmann::json::parse(f, nullptr, true, true));
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  }
  if (cfg.out_dir.empty()) {
    const char* env = std::getenv("POLYLAYER_OUT_DIR");
    cfg.out_dir = env && *env ? env : "polylayer_out";
  }

  CLI::App app{"Spectral experiments on polyhedral layers and bent strips"};
  app.set_help_flag("--help", "print this help and exit");
  app.set_version_flag("--version", kVersion);
  bool dry_run = false, echo = false;
  int threads = 0;
  app.add_option("--config", config_path, "JSON run configuration (unknown keys are rejected)");
  app.add_option("--out", cfg.out_dir, "output directory (default: $POLYLAYER_OUT_DIR or ./polylayer_out)");
  app.add_option("--format", cfg.formats, "output formats: json, csv, svg, pgm")->delimiter(',');
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default); results are reproducible for a fixed count");
  app.add_flag("--dry-run", dry_run, "validate and print the plan without solving");
  app.add_flag("--echo-config", echo, "print the effective configuration as JSON and exit");
  app.add_flag("--dumps", cfg.dumps, "also write mesh, matrix and active-cell text dumps");

  app.add_option("--kind", cfg.geometry.kind, "geometry: fichera, regular, trihedral");
  app.add_option("--n", cfg.geometry.n, "number of faces for a regular layer");
  app.add_option_function<std::string>(
      "--alpha", [&](const std::string& s) { cfg.geometry.angles = {cli::parse_angle(s)}; },
      "vertex angle of a regular layer, e.g. 60deg");
  add_angle_list(&app, "--alphas", cfg.geometry.angles, "three vertex angles of a trihedral layer");

  app.add_option("--h", cfg.h, "coarsest strip mesh size");
  app.add_option("--R", cfg.R, "outlet length (0: automatic)");
  app.add_option("--R-max", cfg.R_max, "largest automatic outlet length");
  app.add_option("--levels", cfg.levels, "nested strip mesh levels");
  app.add_option("--m", cfg.m, "number of eigenpairs");
  app.add_option("--tolerance", cfg.tolerance, "eigensolver relative residual tolerance");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--voxel-h", cfg.voxel_h, "coarsest voxel size");
  app.add_option("--voxel-R", cfg.voxel_R, "voxel truncation radius");
  app.add_option("--voxel-levels", cfg.voxel_levels, "voxel refinement levels");
  app.add_option("--voxel-tolerance", cfg.voxel_tolerance, "voxel eigensolver tolerance");

  add_angle(&app, "--theta", cfg.theta, "strip opening angle, e.g. 90deg");
  add_angle_list(&app, "--thetas", cfg.thetas, "ascending opening angles for scan-theta");
  app.add_option("--R-list", cfg.R_list, "ascending outlet lengths for scan-R")->delimiter(',');
  app.add_option("--eps", cfg.eps, "eps grid for certify-veps")->delimiter(',');
  add_angle(&app, "--absence-alpha", cfg.alpha, "third vertex angle for the absence experiment");
  add_angle(&app, "--alpha-star", cfg.alpha_star, "precomputed alpha* (0rad computes it)");
  app.add_option("--alpha-tol", cfg.alpha_tol, "bracket width for alpha-star");
  app.add_option("--case", cfg.hardy_case, "hardy sample: exp, inv, zero, random");
  app.add_option("--samples", cfg.hardy_samples, "number of random hardy samples");
  app.add_option("--R0", cfg.hardy_R0, "corollary cut point R0");
  app.add_option("--n-min", cfg.weyl_n_min, "first Weyl index");
  app.add_option("--n-max", cfg.weyl_n_max, "last Weyl index");
  app.add_option("--kappa", cfg.kappa, "longitudinal wave numbers")->delimiter(',');
  app.add_option("--weyl-h", cfg.weyl_h, "finite-difference grid spacing");

  const std::map<std::string, std::string> descriptions{
      {"angle", "polyhedral angle and layer geometry"},
      {"waveguide", "first eigenvalue of the bent strip with Richardson extrapolation"},
      {"scan-theta", "eigenvalue against opening angle"},
      {"scan-R", "eigenvalue against outlet length, with exponential fit"},
      {"count", "number of eigenvalues below pi^2"},
      {"layer", "voxel grid of the truncated layer"},
      {"certify", "voxel upper bound against the threshold"},
      {"certify-veps", "sign of the trial functional for regular layers"},
      {"absence", "voxel scan for the thin trihedral layer"},
      {"hardy", "weighted inequality on piecewise-linear samples"},
      {"weyl", "residuals of the cut-off sequence"},
      {"alpha-star", "angle where the strip eigenvalue equals pi^2/2"}};
  for (const auto& name : cli::subcommands()) app.add_subcommand(name, descriptions.at(name))->fallthrough();
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  }
  if (!app.get_subcommands().empty()) {
    // The command line wins over a subcommand named in the config file.
    cfg.subcommand = app.get_subcommands().front()->get_name();
  }
  if (cfg.subcommand.empty()) {
    std::cerr << "config error: no subcommand given\n" << app.help();
    return exit_config;
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  }
  if (echo) {
    std::cout << cli::to_json(cfg).dump(2) << '\n';
    return exit_ok;
  }
  if (dry_run) {
    try {
      std::cout << dry_run_plan(cfg).dump(2) << '\n';
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return exit_config;
    }
    return exit_ok;
  }
  if (threads < 0) {
    std::cerr << "config error: --threads must be nonnegative\n";
    return exit_config;
  }
  if (threads > 0) omp_set_num_threads(threads);

  const fs::path dir = cfg.out_dir;
  const std::string stem = cfg.subcommand;
  Json meta{{"program", "polylayer"},
            {"version", kVersion},
            {"subcommand", cfg.subcommand},
            {"config", cli::to_json(cfg)},
            {"threads", omp_get_max_threads()}};
  const auto t0 = std::chrono::steady_clock::now();
  int code = exit_ok;
  Outputs out;
  std::string failure;
  try {
    out = dispatch(cfg);
    if (out.status == "inconclusive") code = exit_inconclusive;
    if (out.status == "violated") code = exit_failure;
  } catch (const InvalidInput& e) {
    failure = e.what();
    code = exit_config;
  } catch (const NotConverged& e) {
    failure = e.what();
    code = exit_not_converged;
  } catch (const std::exception& e) {
    failure = e.what();
    code = exit_failure;
  }
  meta["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  try {
    if (!failure.empty()) {
      std::cerr << "error: " << failure << '\n';
      Json bundle{{"meta", meta}, {"status", "error"}, {"error", failure}, {"exit_code", code}};
      write_atomic(dir / (stem + ".error.json"), bundle.dump(2) + '\n');
      return code;
    }
    std::error_code ec;
    fs::remove(dir / (stem + ".error.json"), ec);
    Json bundle{{"meta", meta}, {"status", out.status}, {"result", out.result}};
    if (cfg.wants("json")) write_atomic(dir / (stem + ".json"), bundle.dump(2) + '\n');
    for (const auto& [suffix, content] : out.files) write_atomic(dir / (stem + "." + suffix), content);
    std::cout << stem << ": " << out.status << " (" << dir.string() << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "error writing outputs: " << e.what() << '\n';
    return exit_failure;
  }
  return code;
}
