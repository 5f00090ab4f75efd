#include "bdsde/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "bdsde/bdsde_infinite.hpp"
#include "bdsde/io.hpp"
#include "bdsde/spde_bridge.hpp"
#include "bdsde/stationarity.hpp"

namespace bdsde {

namespace {

double problem_param(const ExperimentConfig& cfg, const std::string& name, double fallback) {
  const auto it = cfg.problem.find(name);
  return it == cfg.problem.end() ? fallback : it->second;
}

}  // namespace

Benchmark build_benchmark(const ExperimentConfig& cfg) {
  Benchmark bench;
  const double mu = problem_param(cfg, "mu", 0.5);
  if (cfg.driver == "ou") {
    bench = make_ou(mu, problem_param(cfg, "sigma0", 1.0), problem_param(cfg, "offset", 0.0));
  } else if (cfg.driver == "ou_space") {
    bench = make_ou_space(mu, problem_param(cfg, "sigma0", 0.5), problem_param(cfg, "amp", 1.0),
                          problem_param(cfg, "freq", 1.0), problem_param(cfg, "s_f", 0.5), 0.2,
                          cfg.dim);
  } else if (cfg.driver == "picard_bench") {
    bench = make_picard_bench(mu, problem_param(cfg, "sigma0", 0.4));
  } else if (cfg.driver == "mode_bench") {
    bench = make_mode_bench(cfg.modes > 0 ? cfg.modes : 16, mu, problem_param(cfg, "c0", 1.0),
                            problem_param(cfg, "cy", 0.3));
  } else {
    throw std::invalid_argument("unknown driver: " + cfg.driver);
  }
  if (cfg.K > 0.0) bench.constants.K = cfg.K;
  if (cfg.p > 0.0) bench.constants.p = cfg.p;
  if (cfg.q > 0.0) bench.constants.q = cfg.q;
  if (cfg.C >= 0.0) bench.constants.C = cfg.C;
  if (cfg.mu > 0.0) bench.constants.mu = cfg.mu;
  if (cfg.L >= 0.0) bench.constants.L = cfg.L;
  if (!cfg.Cj.empty()) bench.constants.Cj = cfg.Cj;
  if (!cfg.alphaj.empty()) bench.constants.alphaj = cfg.alphaj;
  return bench;
}

namespace {

struct StudyContext {
  const ExperimentConfig& cfg;
  Benchmark bench;
  SpatialGrid grid;
  std::string dir;
  RunManifest* manifest;

  void verdict(const std::string& name, const std::string& value) {
    manifest->verdicts.emplace_back(name, value);
  }
  void add_file(const std::string& path) {
    manifest->files.emplace_back(path, fnv1a(read_text_file(path)));
  }
};

PicardOptions picard_options(const ExperimentConfig& cfg) {
  PicardOptions opt;
  opt.inner_samples = cfg.inner_samples;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  return opt;
}

NoiseGrid study_noise(const StudyContext& ctx, std::uint64_t seed, double horizon) {
  const int steps = static_cast<int>(std::llround(horizon / ctx.cfg.dt));
  return sample_noise_at(seed, 0, 0.0, ctx.cfg.dt, steps, ctx.bench.coeffs.dim,
                         ctx.bench.driver.modes);
}

bool study_validate(StudyContext& ctx) {
  const ConditionReport report = validate_conditions(ctx.bench.constants);
  std::vector<std::vector<double>> rows;
  std::ostringstream csv;
  csv << "name,slack,pass,required_infinite\n";
  for (const auto& item : report.items)
    csv << item.name << ',' << format_double(item.slack) << ',' << (item.pass ? 1 : 0) << ','
        << (item.required_infinite ? 1 : 0) << '\n';
  const std::string path = ctx.dir + "/conditions.csv";
  write_text_file(path, csv.str());
  ctx.add_file(path);
  ctx.verdict("conditions-all-pass", report.all_pass ? "pass" : "fail");
  ctx.verdict("conditions-infinite-ok", report.infinite_ok ? "pass" : "fail");
  return report.all_pass;
}

bool study_ou_oracle(StudyContext& ctx) {
  const double mu = problem_param(ctx.cfg, "mu", 0.5);
  const double sigma0 = problem_param(ctx.cfg, "sigma0", 1.0);
  const OUOracleReport report =
      ou_stationary_oracle(mu, sigma0, ctx.bench.constants.K, ctx.cfg.dt, ctx.cfg.horizon,
                           ctx.cfg.seed_count, ctx.cfg.master_seed);
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < report.times.size(); ++j)
    rows.push_back({report.times[j], report.variances[j]});
  const std::string path = ctx.dir + "/ou_oracle.csv";
  write_csv(path, {"time", "variance"}, rows);
  ctx.add_file(path);
  ctx.verdict("target-variance", format_double(report.target_variance));
  ctx.verdict("pooled-variance", format_double(report.pooled_variance));
  ctx.verdict("variance-within-3se", report.variance_ok ? "pass" : "fail");
  ctx.verdict("time-invariance-4se", report.invariance_ok ? "pass" : "fail");
  ctx.verdict("gaussian-shape", report.gaussian_ok ? "pass" : "fail");
  return report.variance_ok && report.invariance_ok && report.gaussian_ok;
}

bool study_stationarity(StudyContext& ctx) {
  StationarityOptions opt;
  opt.dt = ctx.cfg.dt;
  opt.relax = ctx.cfg.relax;
  opt.inner_samples = ctx.cfg.inner_samples;
  opt.picard_tol = ctx.cfg.tol;
  opt.max_iter = ctx.cfg.max_iter;

  const std::vector<double> offsets = {0.0, 0.25, 1.0};
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  const int seeds = std::min(ctx.cfg.seed_count, 3);
  for (int s = 0; s < seeds; ++s)
    for (double t : offsets)
      for (double r : offsets) {
        const double gap =
            shift_compare(ctx.bench.driver, ctx.bench.constants, ctx.bench.coeffs, ctx.grid,
                          ctx.cfg.master_seed + static_cast<std::uint64_t>(s), t, r, opt);
        rows.push_back({t, r, gap, static_cast<double>(s)});
        worst = std::max(worst, gap);
      }
  const std::string path = ctx.dir + "/shift_compare.csv";
  write_csv(path, {"t", "r", "discrepancy", "seed"}, rows);
  ctx.add_file(path);

  const SpdeStationarityResult spde = spde_stationarity_check(
      ctx.bench.driver, ctx.bench.constants, ctx.bench.coeffs, ctx.grid, ctx.cfg.master_seed,
      /*T=*/2.0, /*t=*/0.5, /*r=*/0.5, /*tolerance=*/1e-10, opt);
  ctx.verdict("max-shift-discrepancy", format_double(worst));
  ctx.verdict("forward-shift-discrepancy", format_double(spde.discrepancy));
  ctx.verdict("shift-exact", worst <= 1e-12 ? "pass" : "fail");
  ctx.verdict("forward-shift-exact", spde.pass ? "pass" : "fail");
  return worst <= 1e-12 && spde.pass;
}

bool study_picard(StudyContext& ctx) {
  const NoiseGrid noise = study_noise(ctx, ctx.cfg.master_seed, ctx.cfg.horizon);
  auto [path, report] =
      picard_solve(ctx.bench.driver, ctx.bench.constants, ctx.bench.coeffs, ctx.grid, noise,
                   picard_options(ctx.cfg));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < report.picard_residuals.size(); ++i)
    rows.push_back({static_cast<double>(i + 1), report.picard_residuals[i],
                    i > 0 ? report.contraction_ratios[i - 1] : 0.0});
  const std::string csv_path = ctx.dir + "/picard_residuals.csv";
  write_csv(csv_path, {"iteration", "residual", "ratio"}, rows);
  ctx.add_file(csv_path);

  const double bound = 0.5 + ctx.bench.constants.sum_alphaj();
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i + 1 < report.picard_residuals.size(); ++i) {
    if (report.picard_residuals[i] < 1e-24) break;  // at the replay noise floor
    worst_ratio = std::max(worst_ratio, report.contraction_ratios[i]);
  }
  ctx.verdict("iterations", std::to_string(report.iterations));
  ctx.verdict("max-contraction-ratio", format_double(worst_ratio));
  ctx.verdict("contraction-bound", format_double(bound));
  const bool ratios_ok = worst_ratio <= bound + 0.15;
  ctx.verdict("contraction", ratios_ok ? "pass" : "fail");
  return report.converged && ratios_ok;
}

bool study_mode(StudyContext& ctx) {
  const double horizon = ctx.cfg.horizon;
  const NoiseGrid noise = study_noise(ctx, ctx.cfg.master_seed, horizon);
  std::vector<int> n_list;
  for (int n : {2, 4, 8, 16})
    if (n <= ctx.bench.driver.modes) n_list.push_back(n);
  if (n_list.size() < 2) n_list = {1, ctx.bench.driver.modes};
  const ModeStudy study =
      mode_convergence_study(ctx.bench.driver, ctx.bench.constants, ctx.bench.coeffs, ctx.grid,
                             noise, n_list, picard_options(ctx.cfg));
  std::vector<std::vector<double>> rows;
  bool ratios_ok = true;
  for (const auto& row : study.rows) {
    rows.push_back({static_cast<double>(row.n), static_cast<double>(row.m), row.measured,
                    row.bound, row.ratio});
    if (row.ratio > 5.0) ratios_ok = false;
  }
  const std::string path = ctx.dir + "/mode_study.csv";
  write_csv(path, {"n", "m", "measured_diff", "tail_bound", "ratio"}, rows);
  ctx.add_file(path);
  ctx.verdict("mode-monotone", study.monotone ? "pass" : "fail");
  ctx.verdict("mode-within-5x-tail", ratios_ok ? "pass" : "fail");
  return study.monotone && ratios_ok;
}

bool study_horizon(StudyContext& ctx, bool export_solution) {
  std::vector<double> horizons = ctx.cfg.horizons;
  if (horizons.empty()) horizons = {4.0, 8.0, 16.0};

  InfiniteSolveOptions opt;
  opt.inner_samples = ctx.cfg.inner_samples;
  opt.tol = ctx.cfg.tol * 1e6;  // Cauchy tolerance is far looser than the solver tolerance
  opt.picard_tol = ctx.cfg.tol;
  opt.max_iter = ctx.cfg.max_iter;
  opt.override_conditions = ctx.cfg.override_conditions;

  const int seeds = export_solution ? 1 : ctx.cfg.seed_count;
  std::vector<double> measured(horizons.size() - 1, 0.0);
  std::vector<double> bounds(horizons.size() - 1, 0.0);
  std::vector<double> decay(horizons.size(), 0.0);
  bool all_cauchy = true;
  InfiniteSolve last;
  for (int s = 0; s < seeds; ++s) {
    InfiniteSolve solve =
        solve_infinite(ctx.bench.driver, ctx.bench.constants, ctx.bench.coeffs, ctx.grid,
                       ctx.cfg.master_seed + static_cast<std::uint64_t>(s), ctx.cfg.dt, horizons, opt);
    all_cauchy = all_cauchy && solve.cauchy_converged;
    for (std::size_t i = 0; i < solve.rows.size(); ++i) {
      measured[i] += solve.rows[i].measured / seeds;
      bounds[i] = solve.rows[i].bound;
    }
    for (std::size_t i = 0; i < solve.decay.size(); ++i) decay[i] += solve.decay[i].second / seeds;
    if (s + 1 == seeds) last = std::move(solve);
  }

  std::vector<std::vector<double>> rows;
  bool ratios_ok = true;
  for (std::size_t i = 0; i + 1 < horizons.size(); ++i) {
    const double ratio = bounds[i] > 0.0 ? measured[i] / bounds[i] : 0.0;
    rows.push_back({horizons[i], horizons[i + 1], measured[i], bounds[i], ratio});
    if (ratio > 5.0) ratios_ok = false;
  }
  const std::string path = ctx.dir + "/horizon_study.csv";
  write_csv(path, {"n", "m", "measured_diff", "tail_bound", "ratio"}, rows);
  ctx.add_file(path);

  std::vector<std::vector<double>> decay_rows;
  bool decay_ok = true;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    decay_rows.push_back({horizons[i], decay[i]});
    if (i > 0 && decay[i] > decay[i - 1] + 1e-15) decay_ok = false;
  }
  const std::string decay_path = ctx.dir + "/horizon_decay.csv";
  write_csv(decay_path, {"horizon", "discounted_norm"}, decay_rows);
  ctx.add_file(decay_path);

  if (export_solution) {
    for (const std::string& f :
         export_field_path(last.solution, ctx.grid, ctx.dir, "solution", ctx.cfg.export_stride))
      ctx.add_file(f);
  }
  ctx.verdict("horizon-cauchy", all_cauchy ? "pass" : "fail");
  ctx.verdict("horizon-within-5x-tail", ratios_ok ? "pass" : "fail");
  ctx.verdict("horizon-decay-monotone", decay_ok ? "pass" : "fail");
  return all_cauchy && ratios_ok && decay_ok;
}

bool study_solve_finite(StudyContext& ctx) {
  const NoiseGrid noise = study_noise(ctx, ctx.cfg.master_seed, ctx.cfg.horizon);
  auto [path, report] =
      picard_solve(ctx.bench.driver, ctx.bench.constants, ctx.bench.coeffs, ctx.grid, noise,
                   picard_options(ctx.cfg));
  for (const std::string& f :
       export_field_path(path, ctx.grid, ctx.dir, "solution", ctx.cfg.export_stride))
    ctx.add_file(f);
  nlohmann::json j;
  j["iterations"] = report.iterations;
  j["converged"] = report.converged;
  j["picard_discount"] = report.picard_discount;
  j["residuals"] = report.picard_residuals;
  j["contraction_ratios"] = report.contraction_ratios;
  j["wall_seconds"] = report.wall_seconds;
  j["seed"] = report.seed;
  const std::string report_path = ctx.dir + "/solve_report.json";
  write_text_file(report_path, j.dump(2) + "\n");
  ctx.add_file(report_path);
  ctx.verdict("converged", report.converged ? "pass" : "fail");
  return report.converged;
}

bool study_weakform(StudyContext& ctx) {
  const double T = ctx.cfg.horizon;
  const NoiseGrid noise = study_noise(ctx, ctx.cfg.master_seed, T);
  auto [solution, report] =
      picard_solve(ctx.bench.driver, ctx.bench.constants, ctx.bench.coeffs, ctx.grid, noise,
                   picard_options(ctx.cfg));

  // battery of bumps across the interior of the domain
  const double h = ctx.grid.spacing();
  std::vector<TestFunction> battery;
  const double span = 0.5 * ctx.grid.radius;
  for (int b = 0; b < 5; ++b) {
    const double c = -span + b * (2.0 * span / 4.0);
    battery.push_back(
        TestFunction::bump(ctx.grid.dim, make_vec(c), 0.45 * ctx.grid.radius, 1.0, 0.25));
  }

  std::vector<std::vector<double>> rows;
  double sum_sq = 0.0;
  bool finite = true;
  for (std::size_t b = 0; b < battery.size(); ++b) {
    const double residual =
        weak_form_residual(solution, battery[b], ctx.bench.driver, ctx.bench.coeffs, ctx.grid,
                           noise, 0.0, T);
    if (!std::isfinite(residual)) finite = false;
    sum_sq += residual * residual;
    rows.push_back({static_cast<double>(b), static_cast<double>(ctx.cfg.master_seed), residual,
                    ctx.cfg.dt, h, static_cast<double>(ctx.cfg.inner_samples)});
  }
  const std::string path = ctx.dir + "/weakform_battery.csv";
  write_csv(path, {"psi_id", "seed", "residual", "dt", "h", "M"}, rows);
  ctx.add_file(path);
  const double rms = std::sqrt(sum_sq / battery.size());
  ctx.verdict("battery-rms", format_double(rms));
  ctx.verdict("residuals-finite", finite ? "pass" : "fail");
  return finite;
}

bool study_continuity(StudyContext& ctx) {
  ContinuityOptions opt;
  opt.master_seed = ctx.cfg.master_seed;
  opt.n_seeds = ctx.cfg.seed_count;
  opt.inner_samples = ctx.cfg.inner_samples;
  opt.dt = ctx.cfg.dt;
  opt.relax = ctx.cfg.relax;
  opt.sup_window = 1.0;
  opt.picard_tol = ctx.cfg.tol;
  opt.max_iter = ctx.cfg.max_iter;
  const std::vector<double> t_values = {0.0, 0.25, 0.5, 1.0};
  const ContinuityStudy study = time_continuity_study(
      ctx.bench.driver, ctx.bench.constants, ctx.bench.coeffs, ctx.grid, t_values, opt);
  std::vector<std::vector<double>> rows;
  for (const auto& [gap, moment] : study.points) rows.push_back({gap, moment});
  const std::string path = ctx.dir + "/continuity_study.csv";
  write_csv(path, {"gap", "p_moment"}, rows);
  ctx.add_file(path);
  const double target = ctx.bench.constants.p / 2.0 - 0.3;
  ctx.verdict("holder-slope", format_double(study.slope));
  ctx.verdict("exact-invariance", study.exact_invariance ? "yes" : "no");
  const bool pass = study.exact_invariance || study.slope >= target;
  ctx.verdict("holder-slope-ok", pass ? "pass" : "fail");
  return pass;
}

}  // namespace

RunManifest run(const ExperimentConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  set_max_threads(cfg.threads);

  RunManifest manifest;
  manifest.config_hash = fnv1a(cfg.canonical());

  StudyContext ctx{cfg, build_benchmark(cfg),
                   SpatialGrid::tensor(cfg.dim, cfg.radius, cfg.nodes,
                                       WeightSpec{cfg.q > 0.0 ? cfg.q : 4.0}),
                   cfg.output_dir, &manifest};
  std::filesystem::create_directories(ctx.dir);
  write_text_file(ctx.dir + "/config.txt", cfg.canonical());
  ctx.add_file(ctx.dir + "/config.txt");

  bool passed = false;
  try {
    if (cfg.study == "validate")
      passed = study_validate(ctx);
    else if (cfg.study == "ou-oracle")
      passed = study_ou_oracle(ctx);
    else if (cfg.study == "stationarity")
      passed = study_stationarity(ctx);
    else if (cfg.study == "picard-study")
      passed = study_picard(ctx);
    else if (cfg.study == "mode-study")
      passed = study_mode(ctx);
    else if (cfg.study == "horizon-study")
      passed = study_horizon(ctx, /*export_solution=*/false);
    else if (cfg.study == "solve-infinite")
      passed = study_horizon(ctx, /*export_solution=*/true);
    else if (cfg.study == "solve-finite")
      passed = study_solve_finite(ctx);
    else if (cfg.study == "weakform")
      passed = study_weakform(ctx);
    else if (cfg.study == "continuity-study")
      passed = study_continuity(ctx);
    else
      throw std::invalid_argument("unknown study: " + cfg.study);
  } catch (const NonConvergenceError& err) {
    // Persist the residual trace before propagating.
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < err.residuals.size(); ++i)
      rows.push_back({static_cast<double>(i + 1), err.residuals[i]});
    write_csv(ctx.dir + "/residual_trace.csv", {"index", "residual"}, rows);
    throw;
  }

  manifest.passed = passed;
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  nlohmann::json j;
  {
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(manifest.config_hash));
    j["config_hash"] = hash_hex;
  }
  j["version"] = manifest.version;
  j["study"] = cfg.study;
  j["passed"] = manifest.passed;
  j["wall_seconds"] = manifest.wall_seconds;
  for (const auto& [name, value] : manifest.verdicts) j["verdicts"][name] = value;
  for (const auto& [path, hash] : manifest.files) {
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx", static_cast<unsigned long long>(hash));
    j["files"][path] = hash_hex;
  }
  write_text_file(ctx.dir + "/manifest.json", j.dump(2) + "\n");
  return manifest;
}

int run_cli(const ExperimentConfig& cfg) {
  try {
    const RunManifest manifest = run(cfg);
    for (const auto& [name, value] : manifest.verdicts)
      std::cout << name << ": " << value << '\n';
    std::cout << (manifest.passed ? "PASS" : "FAIL") << " (" << cfg.study << ", "
              << manifest.wall_seconds << " s)\n";
    return manifest.passed ? 0 : 1;
  } catch (const NonConvergenceError& err) {
    std::cerr << "error: " << err.what() << " (residual trace persisted, " << err.residuals.size()
              << " entries)\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
}

}  // namespace bdsde
