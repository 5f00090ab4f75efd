#include "bdsde/bdsde_infinite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bdsde/noise.hpp"

namespace bdsde {

const ConditionReport::Item& ConditionReport::find(const std::string& name) const {
  for (const auto& item : items)
    if (item.name == name) return item;
  throw std::invalid_argument("ConditionReport: unknown item " + name);
}

ConditionReport validate_conditions(const ProblemConstants& c) {
  ConditionReport report;
  auto push = [&](const std::string& name, double slack, bool required) {
    ConditionReport::Item item;
    item.name = name;
    item.slack = slack;
    item.pass = slack > 0.0;
    item.required_infinite = required;
    report.items.push_back(item);
    report.all_pass = report.all_pass && item.pass;
    if (required) report.infinite_ok = report.infinite_ok && item.pass;
  };
  // Mode z-couplings must sum strictly below 1/2.
  push("mode-z-coupling", 0.5 - c.sum_alphaj(), true);
  // Dissipativity must beat the discount and the y-couplings.
  push("dissipativity", 2.0 * c.mu - c.K - 2.0 * c.C - c.sum_Cj(), true);
  // Moment exponent window for the weight.
  push("moment-window-low", c.p - 2.0, false);
  push("moment-window-high", c.q - 1.0 - c.p, false);
  // Discount versus the forward Lipschitz constant at exponent p.
  push("forward-moment", c.K - c.p * c.L - 0.5 * c.p * (c.p - 1.0) * c.L * c.L, false);
  // p-th moment dissipativity.
  push("p-dissipativity", 2.0 * c.mu - c.p * c.K - c.p * c.C - 0.5 * c.p * (c.p - 1.0) * c.sum_Cj(),
       false);
  return report;
}

namespace {

double discounted_pair_distance(const FieldPath& longer, const FieldPath& shorter,
                                const SpatialGrid& grid, double discount) {
  // Squared discounted integral norm of the difference on [0, horizon of the
  // longer solve]; the shorter solution is extended by zero.
  const double dt = longer.dt();
  const int n = longer.steps();
  const int n_short = shorter.steps();
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    double dy = 0.0, dz = 0.0;
    for (int i = 0; i < grid.node_count(); ++i) {
      const double ys = k <= n_short ? shorter.Y[k].at(i) : 0.0;
      const double ey = longer.Y[k].at(i) - ys;
      dy += ey * ey * grid.w_rho[i];
      for (int c = 0; c < grid.dim; ++c) {
        const double zs = k <= n_short ? shorter.Z[k].at(i, c) : 0.0;
        const double ez = longer.Z[k].at(i, c) - zs;
        dz += ez * ez * grid.w_rho[i];
      }
    }
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    acc += w * std::exp(-discount * longer.times[k]) * (dy + dz) * dt;
  }
  return acc;
}

}  // namespace

double horizon_tail_estimate(const DriverSpec& driver, const ProblemConstants& constants,
                             const SpatialGrid& grid, double n, double m, double dt) {
  if (!(n < m)) throw std::invalid_argument("horizon_tail_estimate: need n < m");
  const int steps = static_cast<int>(std::llround((m - n) / dt));
  auto mass = [&](double t) {
    double acc = 0.0;
    for (int i = 0; i < grid.node_count(); ++i) {
      const double fv = driver.eval_f(t, grid.nodes[i], 0.0, zero_vec());
      double gv = fv * fv;
      for (int j = 0; j < driver.modes; ++j) {
        const double g = driver.eval_g(j, t, grid.nodes[i], 0.0, zero_vec());
        gv += g * g;
      }
      acc += gv * grid.w_rho[i];
    }
    return acc;
  };
  const double K = constants.K;
  double acc = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double a = n + k * dt;
    const double b = n + (k + 1) * dt;
    const double weight = K > 0.0 ? (std::exp(-K * a) - std::exp(-K * b)) / K : (b - a);
    acc += weight * 0.5 * (mass(a) + mass(b));
  }
  return acc;
}

InfiniteSolve solve_infinite(const DriverSpec& driver, const ProblemConstants& constants,
                             const ForwardCoefficients& coeffs, const SpatialGrid& grid,
                             std::uint64_t base_seed, double dt, std::span<const double> horizons,
                             const InfiniteSolveOptions& options) {
  if (horizons.size() < 2) throw std::invalid_argument("solve_infinite: need at least two horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const double h = horizons[i];
    if (i > 0 && h <= horizons[i - 1])
      throw std::invalid_argument("solve_infinite: horizons must be increasing");
    if (std::abs(std::llround(h / dt) * dt - h) > 1e-9)
      throw std::invalid_argument("solve_infinite: horizons must be multiples of dt");
  }
  const ConditionReport conditions = validate_conditions(constants);
  if (!conditions.infinite_ok && !options.override_conditions)
    throw std::invalid_argument(
        "solve_infinite: standing conditions fail (set the override to run anyway)");

  const double h_max = horizons.back();
  const int n_max = static_cast<int>(std::llround(h_max / dt));
  const NoiseGrid master = sample_noise_at(base_seed, 0, 0.0, dt, n_max, coeffs.dim, driver.modes);

  DriverSpec zero_terminal = driver;
  zero_terminal.h = nullptr;
  zero_terminal.h_noise = nullptr;

  PicardOptions popt;
  popt.inner_samples = options.inner_samples;
  popt.tol = options.picard_tol;
  popt.max_iter = options.max_iter;

  InfiniteSolve out;
  std::vector<FieldPath> solves;
  solves.reserve(horizons.size());
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const int n_h = static_cast<int>(std::llround(horizons[i] / dt));
    auto [path, rep] = picard_solve(zero_terminal, constants, coeffs, grid, first_steps(master, n_h), popt);
    if (i + 1 == horizons.size()) out.report = rep;
    solves.push_back(std::move(path));
  }

  std::vector<double> diffs;
  for (std::size_t i = 0; i + 1 < horizons.size(); ++i) {
    HorizonRow row;
    row.n = horizons[i];
    row.m = horizons[i + 1];
    row.measured = discounted_pair_distance(solves[i + 1], solves[i], grid, constants.K);
    row.bound = horizon_tail_estimate(driver, constants, grid, row.n, row.m, dt);
    row.ratio = row.bound > 0.0 ? row.measured / row.bound : (row.measured > 0.0 ? HUGE_VAL : 0.0);
    out.rows.push_back(row);
    diffs.push_back(row.measured);
  }

  const FieldPath& last = solves.back();
  for (double h : horizons) {
    const int k = last.time_index(h);
    out.decay.emplace_back(h, std::exp(-constants.K * h) * weighted_norm_sq(last.Y[k], grid));
  }
  out.report.tail_estimates.clear();
  for (const auto& row : out.rows) out.report.tail_estimates.push_back(row.bound);

  out.cauchy_converged = diffs.back() <= options.tol;
  out.solution = solves.back();
  if (!out.cauchy_converged)
    throw NonConvergenceError("solve_infinite: horizon differences not Cauchy at the largest horizon",
                              diffs);
  return out;
}

double p_norm_bound_check(const FieldPath& path, const ProblemConstants& constants,
                          const SpatialGrid& grid) {
  double best = 0.0;
  for (int k = 0; k <= path.steps(); ++k) {
    double mass = 0.0;
    for (int i = 0; i < grid.node_count(); ++i)
      mass += std::pow(std::abs(path.Y[k].at(i)), constants.p) * grid.w_rho[i];
    best = std::max(best, std::exp(-constants.p * constants.K * path.times[k]) * mass);
  }
  return best;
}

ContinuityStudy time_continuity_study(const DriverSpec& driver, const ProblemConstants& constants,
                                      const ForwardCoefficients& coeffs, const SpatialGrid& grid,
                                      std::span<const double> t_values,
                                      const ContinuityOptions& options) {
  if (t_values.size() < 4)
    throw std::invalid_argument("time_continuity_study: need at least four start times");
  std::vector<double> ts(t_values.begin(), t_values.end());
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] - ts[i - 1] < 1e-12)
      throw std::invalid_argument("time_continuity_study: start times must be distinct");

  const double dt = options.dt;
  const double t_max = ts.back() + options.sup_window;
  const double horizon = t_max + options.relax;
  const int n_steps = static_cast<int>(std::llround(horizon / dt));
  const double p = constants.p;

  PicardOptions popt;
  popt.inner_samples = options.inner_samples;
  popt.tol = options.picard_tol;
  popt.max_iter = options.max_iter;

  DriverSpec zero_terminal = driver;
  zero_terminal.h = nullptr;
  zero_terminal.h_noise = nullptr;

  // moment accumulator per ordered pair (i < j)
  std::vector<std::vector<double>> pair_moment(ts.size(), std::vector<double>(ts.size(), 0.0));
  for (int s = 0; s < options.n_seeds; ++s) {
    const std::uint64_t seed = options.master_seed + static_cast<std::uint64_t>(s);
    const NoiseGrid noise = sample_noise_at(seed, 0, 0.0, dt, n_steps, coeffs.dim, driver.modes);
    auto [field, rep] = picard_solve(zero_terminal, constants, coeffs, grid, noise, popt);

    // One coupled flow per start time, all driven by the grid's forward path
    // and all reaching the same end time.
    std::vector<FlowEnsemble> flows;
    flows.reserve(ts.size());
    for (double tv : ts) flows.push_back(simulate_flow(grid.nodes, tv, t_max, coeffs, noise));

    for (std::size_t a = 0; a < ts.size(); ++a)
      for (std::size_t b = a + 1; b < ts.size(); ++b) {
        // sup over the window behind the later start.
        const int window_steps = static_cast<int>(std::llround(options.sup_window / dt));
        double sup = 0.0;
        for (int k = 0; k <= window_steps; ++k) {
          const double s_time = flows[b].times[k];
          const int field_k = field.time_index(s_time);
          // the earlier flow reaches s_time at a later local index
          const int offset = static_cast<int>(std::llround((ts[b] - ts[a]) / dt));
          double mass = 0.0;
          for (int i = 0; i < grid.node_count(); ++i) {
            const Vec& xa = flows[a].state(i, 0, k + offset);
            const Vec& xb = flows[b].state(i, 0, k);
            const double ua = interpolate(field.Y[field_k], grid, xa);
            const double ub = interpolate(field.Y[field_k], grid, xb);
            mass += std::pow(std::abs(ua - ub), p) * grid.w_rho[i];
          }
          sup = std::max(sup, std::exp(-p * constants.K * s_time) * mass);
        }
        pair_moment[a][b] += sup / options.n_seeds;
      }
  }

  ContinuityStudy study;
  for (std::size_t a = 0; a < ts.size(); ++a)
    for (std::size_t b = a + 1; b < ts.size(); ++b)
      study.points.emplace_back(ts[b] - ts[a], pair_moment[a][b]);

  double max_moment = 0.0;
  for (const auto& pt : study.points) max_moment = std::max(max_moment, pt.second);
  if (max_moment < 1e-28) {
    study.exact_invariance = true;
    return study;
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const auto& [gap, moment] : study.points) {
    if (moment <= 0.0) continue;
    const double lx = std::log(gap);
    const double ly = std::log(moment);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("time_continuity_study: degenerate regression");
  study.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return study;
}

}  // namespace bdsde
