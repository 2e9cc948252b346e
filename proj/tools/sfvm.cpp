// sfvm: run, check and classify space-time finite volume experiments.
//
// Exit codes: 0 success, 1 unexpected error, 2 configuration error,
// 3 scheme abort, 4 verification failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sfvm/io.hpp"
#include "sfvm/sfvm.hpp"

namespace fs = std::filesystem;
using namespace sfvm;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kAbort = 3, kVerify = 4 };

struct Common {
  std::string config;
  std::string run;
  std::string out;
  std::optional<double> tol;
  std::optional<int> threads;
};

Config load(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required");
  Config cfg = load_config(c.config);
  if (c.threads) {
    if (*c.threads < 0) throw ConfigError("--threads must be non-negative");
    cfg.run.threads = cfg.entropy.threads = *c.threads;
  }
  if (c.tol) {
    if (!(*c.tol > 0.0)) throw ConfigError("--tol must be positive");
    cfg.entropy.tol_scale = *c.tol;
  }
  return cfg;
}

fs::path out_dir(const Common& c, const Config& cfg) { return c.out.empty() ? fs::path(cfg.output.directory) : fs::path(c.out); }

std::string stem_of(const std::string& path) {
  std::string s = fs::path(path).stem().string();
  if (s.size() > 4 && s.ends_with(".run")) s.resize(s.size() - 4);
  return s.empty() ? "run" : s;
}

RunResult execute(const Config& cfg) {
  return run_to(cfg.flux, cfg.partition(), cfg.spec, cfg.boundary, cfg.T, cfg.run);
}

int cmd_run(const Common& c) {
  const Config cfg = load(c);
  const RunResult res = execute(cfg);
  const fs::path dir = out_dir(c, cfg);
  const std::string stem = stem_of(c.config);
  if (cfg.output.csv) write_text(dir / (stem + ".csv"), slices_csv(res));
  if (cfg.output.json) write_text(dir / (stem + ".run.json"), run_to_json(res, cfg).dump(1));
  std::printf("run %s: %d cells, %d slabs, T = %.6g, flux %s, max|u| = %.6g\n", stem.c_str(), res.partition.cells(),
              res.foliation.slabs(), res.foliation.horizon(), to_string(cfg.spec.kind), res.max_abs());
  return kOk;
}

int cmd_entropy_check(const Common& c) {
  RunArtifact art;
  std::string stem;
  if (!c.run.empty()) {
    art = run_from_json(read_json(c.run), c.run);
    stem = stem_of(c.run);
    if (c.threads) art.config.entropy.threads = *c.threads;
    if (c.tol) art.config.entropy.tol_scale = *c.tol;
  } else {
    art.config = load(c);
    art.run = execute(art.config);
    stem = stem_of(c.config);
  }
  const Config& cfg = art.config;
  EntropyCheckOptions opt = cfg.entropy;
  opt.convex_pairs = convex_pairs(cfg, art.run.u_range);
  const EntropyReport rep = entropy_check(cfg.flux, cfg.spec, art.run, opt);
  // the discrete inequalities presuppose d(omega(u)) = 0
  const auto pts = grid_points({0.0, cfg.domain.a}, {cfg.T, cfg.domain.b}, 9);
  const GeometryReport geo = check_geometry_compatible(cfg.flux, pts, u_samples(art.run.u_range, 5), 1e-8);
  Json j = entropy_report_json(rep);
  j["geometry_compatible"] = geo.pass;
  j["geometry_residual"] = geo.max_residual;
  const fs::path dir = out_dir(c, cfg);
  write_text(dir / (stem + ".entropy.json"), j.dump(1));
  write_text(dir / (stem + ".entropy_cells.csv"), entropy_cells_csv(rep));
  auto line = [](const char* name, const ResidualStat& s) {
    std::printf("  %-26s max %.3e  failures %lld/%lld\n", name, s.max, s.failures, s.count);
  };
  std::printf("entropy-check %s: %s\n", stem.c_str(), rep.pass() ? "PASS" : "FAIL");
  line("convex decomposition", rep.convdec);
  line("bracketing", rep.bracketing);
  line("face inequality", rep.face);
  line("face boundary inequality", rep.face_boundary);
  line("cell inequality", rep.cell);
  line("convex combination", rep.convex);
  line("boundary condition", rep.boundary_condition);
  if (!rep.dissipation.empty()) std::printf("  %-26s min slack %.3e\n", "dissipation", rep.min_dissipation_slack);
  if (!geo.pass)
    std::printf("  note: flux is not geometry compatible (residual %.3e); the inequalities need not hold\n",
                geo.max_residual);
  return rep.pass() ? kOk : kVerify;
}

Json classify_config(const Config& cfg, bool& ok) {
  const Observer obs{CoordinateForm::basis(2, {kT})};
  const auto us = u_samples(cfg.flux_range);
  const double a = cfg.domain.a, b = cfg.domain.b;
  const auto pts = grid_points({0.0, a}, {cfg.T, b}, 17);
  const auto hyp = check_hyperbolicity(cfg.flux, obs, pts, us);
  const auto geo = check_geometry_compatible(cfg.flux, pts, us, 1e-8);
  Json faces = Json::array();
  auto add = [&](const std::string& label, const FaceChart& f, CoordinateForm n) {
    const FaceClass fc = classify_face(f, n, cfg.flux, us);
    faces.push_back({{"label", label}, {"kind", to_string(fc.kind)}, {"min", fc.min}, {"max", fc.max}});
  };
  add("initial slice t=0", FaceChart::segment({0.0, a}, {0.0, b}), -CoordinateForm::basis(2, {kT}));
  add("final slice t=T", FaceChart::segment({cfg.T, a}, {cfg.T, b}), CoordinateForm::basis(2, {kT}));
  if (!cfg.domain.periodic()) {
    add("left boundary x=a", FaceChart::segment({0.0, a}, {cfg.T, a}), -CoordinateForm::basis(2, {kX}));
    add("right boundary x=b", FaceChart::segment({0.0, b}, {cfg.T, b}), CoordinateForm::basis(2, {kX}));
  }
  ok = hyp.pass;
  return {{"flux", cfg.flux.name},
          {"observer", "dt"},
          {"hyperbolic", hyp.pass},
          {"min_coefficient", hyp.min_coefficient},
          {"geometry_compatible", geo.pass},
          {"geometry_residual", geo.max_residual},
          {"boundary", faces}};
}

int cmd_classify(const Common& c) {
  const Config cfg = load(c);
  Json rep;
  bool ok = true;
  if (cfg.geometry) {
    const AppendixReport ap = appendix_examples();
    const Json full = appendix_json(ap);
    rep = *cfg.geometry == "annulus" ? full["annulus"] : full["square_with_hole"];
    ok = *cfg.geometry == "annulus" ? ap.annulus_pass() : ap.square_pass();
  } else {
    rep = classify_config(cfg, ok);
  }
  const std::string stem = stem_of(c.config);
  write_text(out_dir(c, cfg) / (stem + ".classify.json"), rep.dump(1));
  std::printf("classify %s: hyperbolic %s\n", stem.c_str(), rep.value("hyperbolic", false) ? "yes" : "no");
  for (const auto& f : rep["boundary"])
    std::printf("  %-28s %s\n", f["label"].get<std::string>().c_str(), f["kind"].get<std::string>().c_str());
  return ok ? kOk : kVerify;
}

int cmd_convergence(const Common& c) {
  const Config cfg = load(c);
  if (cfg.experiment.empty()) throw ConfigError(cfg.source + ": [convergence] experiment is required");
  const std::vector<double> hs = cfg.hs.empty() ? std::vector<double>{1.0 / 40, 1.0 / 80, 1.0 / 160} : cfg.hs;
  RunConfig rc = cfg.run;
  rc.u_range.reset();
  rc.fixed_dt.reset();
  const ConvergenceStudy st = convergence_study(experiment_by_name(cfg.experiment), hs, cfg.spec, rc);
  const fs::path dir = out_dir(c, cfg);
  write_text(dir / (cfg.experiment + ".convergence.json"), convergence_json(st).dump(1));
  write_text(dir / (cfg.experiment + ".convergence.csv"), convergence_csv(st));
  std::printf("convergence %s (%s): order %.3f\n", st.experiment.c_str(), st.flux_kind.c_str(), st.order);
  for (std::size_t i = 0; i < st.h.size(); ++i)
    std::printf("  h = %.6g  E = %.6e  (%.2fs)\n", st.h[i], st.errors[i], st.seconds[i]);
  std::printf("  oracle defect %.3e\n", st.oracle_defect);
  return st.strictly_decreasing() && st.oracle_resolved() ? kOk : kVerify;
}

int cmd_mesh_report(const Common& c) {
  const Config cfg = load(c);
  const SpatialPartition part = cfg.partition();
  const Interval range = run_data_range(part, cfg.boundary, cfg.T, cfg.run);
  Foliation fol;
  if (cfg.run.fixed_dt) {
    fol = {{0.0}, part.domain};
    while (fol.times.back() < cfg.T) fol.times.push_back(slab_end(fol.times.back(), *cfg.run.fixed_dt, cfg.T));
  } else {
    const SchemeContext ctx = make_context(cfg.flux, part, cfg.spec, range, cfg.run.threads);
    fol = plan_foliation(ctx, cfg.run.cfl_target, cfg.T);
  }
  const Triangulation tri(fol, part);
  RegularityOptions opt;
  opt.u_range = range;
  opt.alpha_B = cfg.boundary.alpha_B;
  opt.spec = cfg.spec;
  opt.threads = cfg.run.threads;
  const double a = cfg.domain.a, L = cfg.domain.length(), T = cfg.T;
  opt.psi = [a, L, T](double t, double x) {
    const double s = 2.0 * (x - a) / L - 1.0, r = 2.0 * t / T - 1.0;
    const double q = s * s + r * r;
    return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
  };
  const MeshRegularityReport rep = mesh_regularity_report(tri, cfg.flux, opt);
  const std::string stem = stem_of(c.config);
  Json j = regularity_json(rep);
  j["admissible"] = tri.admissibility().all();
  write_text(out_dir(c, cfg) / (stem + ".mesh.json"), j.dump(1));
  std::printf("mesh-report %s: %d cells x %d slabs, h = %.4g, h_bar = %.4g, admissible %s\n", stem.c_str(),
              part.cells(), fol.slabs(), rep.h, rep.h_bar, tri.admissibility().all() ? "yes" : "no");
  std::printf("  dq_inf/h %.4g  dq_max/h %.4g  flux ratio %.4g  density oscillation %.3g\n", rep.dq_inf_scaled,
              rep.dq_max_scaled, rep.flux_ratio, rep.density_oscillation);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time finite volume solver for d(omega(u)) = 0"};
  app.require_subcommand(1);
  Common c;
  auto common = [&c](CLI::App* sub, bool run_artifact = false) {
    sub->add_option("--config", c.config, "Experiment config file");
    if (run_artifact) sub->add_option("--run", c.run, "Run artifact (JSON) written by 'run'");
    sub->add_option("--out", c.out, "Output directory (default: [output] directory)");
    sub->add_option("--tol", c.tol, "Tolerance scale of the entropy checks");
    sub->add_option("--threads", c.threads, "Worker threads (default: SPACETIME_FVM_THREADS or 1)");
  };
  CLI::App* run = app.add_subcommand("run", "Run the scheme and write slice CSV and run JSON");
  CLI::App* classify = app.add_subcommand("classify", "Hyperbolicity and boundary classification");
  CLI::App* entropy = app.add_subcommand("entropy-check", "Discrete entropy inequality checks");
  CLI::App* conv = app.add_subcommand("convergence", "Refinement study against an exact solution");
  CLI::App* mesh = app.add_subcommand("mesh-report", "Mesh regularity diagnostics");
  common(run);
  common(classify);
  common(entropy, true);
  common(conv);
  common(mesh);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(c);
    if (*classify) return cmd_classify(c);
    if (*entropy) return cmd_entropy_check(c);
    if (*conv) return cmd_convergence(c);
    if (*mesh) return cmd_mesh_report(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const SchemeAbort& e) {
    std::cerr << "scheme abort: " << e.what() << "\n";
    return kAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
