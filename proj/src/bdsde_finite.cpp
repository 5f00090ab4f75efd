#include "bdsde/bdsde_finite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bdsde {

double ProblemConstants::sum_Cj() const {
  double s = 0.0;
  for (double v : Cj) s += v;
  return s;
}

double ProblemConstants::sum_alphaj() const {
  double s = 0.0;
  for (double v : alphaj) s += v;
  return s;
}

double ProblemConstants::sum_M2j() const {
  double s = 0.0;
  for (double v : M2j) s += v;
  return s;
}

int FieldPath::time_index(double t) const {
  const double step = dt();
  const int k = static_cast<int>(std::llround((t - t0()) / step));
  if (k < 0 || k > steps() || std::abs(t0() + k * step - t) > 1e-9 * std::max(1.0, std::abs(t)))
    throw std::invalid_argument("FieldPath: time off the grid");
  return k;
}

FieldPath solve_linear_bdsde(const FrozenDriver& frozen, const FieldSnapshot& terminal,
                             const ForwardCoefficients& coeffs, const SpatialGrid& grid,
                             const NoiseGrid& noise, int inner_samples) {
  if (inner_samples < 1) throw std::invalid_argument("solve_linear_bdsde: need at least one inner sample");
  if (coeffs.dim != grid.dim) throw std::invalid_argument("solve_linear_bdsde: dimension mismatch");
  if (frozen.modes > noise.modes)
    throw std::invalid_argument("solve_linear_bdsde: more driver modes than noise modes");
  const int n_nodes = grid.node_count();
  if (static_cast<int>(terminal.values.size()) != n_nodes)
    throw std::invalid_argument("solve_linear_bdsde: terminal does not match the grid");

  const int n_steps = noise.steps;
  const double dt = noise.dt;
  const int dim = grid.dim;
  const int modes = frozen.modes;

  FieldPath path;
  path.times.resize(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k) path.times[k] = noise.t0 + k * dt;
  path.Y.assign(n_steps + 1, FieldSnapshot::zeros(n_nodes, 1));
  path.Z.assign(n_steps + 1, FieldSnapshot::zeros(n_nodes, dim));
  path.Y[n_steps] = terminal;

  const bool frozen_flow = !coeffs.diffusion && !coeffs.drift;
  for (int k = n_steps - 1; k >= 0; --k) {
    const FieldSnapshot& next = path.Y[k + 1];
    FieldSnapshot& y_here = path.Y[k];
    FieldSnapshot& z_here = path.Z[k];
    const std::int64_t stream_step = noise.global_step(k);
    parallel_for(n_nodes, [&](int lo, int hi) {
      for (int node = lo; node < hi; ++node) {
        const Vec& x = grid.nodes[node];
        const CounterStream stream(noise.master_seed, StreamTag::kInnerCloud,
                                   static_cast<std::uint64_t>(node));
        double v_bar = 0.0;
        std::vector<double> v(inner_samples);
        std::vector<Vec> pts(inner_samples);
        std::vector<Vec> incs(inner_samples);
        if (frozen_flow) {
          // Degenerate diffusion: the cloud collapses onto the node itself.
          const double val = next.at(node);
          for (int m = 0; m < inner_samples; ++m) {
            v[m] = val;
            pts[m] = x;
            incs[m] = zero_vec();
          }
          v_bar = val;
        } else {
          const OneStepCloud cloud = one_step_cloud(x, coeffs, dt, inner_samples, stream, stream_step);
          for (int m = 0; m < inner_samples; ++m) {
            pts[m] = cloud.states[m];
            incs[m] = cloud.increments[m];
            v[m] = interpolate(next, grid, pts[m]);
            v_bar += v[m];
          }
          v_bar /= inner_samples;
        }

        // Centred conditional-covariance estimate of Z.
        if (inner_samples > 1 && !frozen_flow) {
          Vec z = zero_vec();
          for (int m = 0; m < inner_samples; ++m)
            for (int i = 0; i < dim; ++i) z[i] += (v[m] - v_bar) * incs[m][i];
          const double scale_z =
              static_cast<double>(inner_samples) / ((inner_samples - 1.0) * inner_samples * dt);
          for (int i = 0; i < dim; ++i) z_here.at(node, i) = z[i] * scale_z;
        }

        double y = v_bar + frozen.f(k, x) * dt;
        for (int j = 0; j < modes; ++j) {
          double g_bar = 0.0;
          for (int m = 0; m < inner_samples; ++m) g_bar += frozen.g(j, k + 1, pts[m]);
          g_bar /= inner_samples;
          y -= g_bar * noise.dBhat(k, j);
        }
        if (!std::isfinite(y)) {
          char msg[160];
          std::snprintf(msg, sizeof msg,
                        "solve_linear_bdsde: non-finite value at step %d node %d (x=(%g,%g))", k,
                        node, x[0], x[1]);
          throw std::runtime_error(msg);
        }
        y_here.at(node) = y;
      }
    });
  }
  return path;
}

namespace {

FieldSnapshot terminal_snapshot(const DriverSpec& driver, const SpatialGrid& grid,
                                const PicardOptions& options) {
  FieldSnapshot h = FieldSnapshot::zeros(grid.node_count(), 1);
  if (driver.h_noise) {
    if (!options.terminal_tail)
      throw std::invalid_argument("picard_solve: driver terminal needs a noise tail segment");
    for (int i = 0; i < grid.node_count(); ++i)
      h.at(i) = driver.h_noise(grid.nodes[i], *options.terminal_tail);
  } else if (driver.h) {
    for (int i = 0; i < grid.node_count(); ++i) h.at(i) = driver.h(grid.nodes[i]);
  }
  return h;
}

// Combined squared discounted norm of the difference of two iterates:
// trapezoid_k exp(+K (t_k - t0)) [ (1 + 2 sum Cj) |dY_k|^2 + |dZ_k|^2 ] dt.
double iterate_distance(const FieldPath& a, const FieldPath& b, const SpatialGrid& grid,
                        double discount, double y_weight) {
  double acc = 0.0;
  const double dt = a.dt();
  const int n = a.steps();
  for (int k = 0; k <= n; ++k) {
    double dy = 0.0, dz = 0.0;
    for (int i = 0; i < grid.node_count(); ++i) {
      const double ey = a.Y[k].at(i) - b.Y[k].at(i);
      dy += ey * ey * grid.w_rho[i];
      for (int c = 0; c < grid.dim; ++c) {
        const double ez = a.Z[k].at(i, c) - b.Z[k].at(i, c);
        dz += ez * ez * grid.w_rho[i];
      }
    }
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    acc += w * std::exp(discount * (a.times[k] - a.times[0])) * (y_weight * dy + dz) * dt;
  }
  return acc;
}

}  // namespace

std::pair<FieldPath, SolveReport> picard_solve(const DriverSpec& driver,
                                               const ProblemConstants& constants,
                                               const ForwardCoefficients& coeffs,
                                               const SpatialGrid& grid, const NoiseGrid& noise,
                                               const PicardOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");
  if (driver.modes > noise.modes)
    throw std::invalid_argument("picard_solve: more driver modes than noise modes");
  if (constants.sum_alphaj() >= 0.5)
    throw std::invalid_argument("picard_solve: mode z-couplings must sum below 1/2");

  const auto t_start = std::chrono::steady_clock::now();
  const double discount =
      options.discount_override > 0.0 ? options.discount_override
                                      : 1.0 + 2.0 * constants.C + 2.0 * constants.sum_Cj();
  const double y_weight = 1.0 + 2.0 * constants.sum_Cj();

  SolveReport report;
  report.picard_discount = discount;
  report.seed = noise.master_seed;

  const FieldSnapshot terminal = terminal_snapshot(driver, grid, options);
  const int n_nodes = grid.node_count();
  FieldPath prev;
  prev.times.resize(noise.steps + 1);
  for (int k = 0; k <= noise.steps; ++k) prev.times[k] = noise.t0 + k * noise.dt;
  prev.Y.assign(noise.steps + 1, FieldSnapshot::zeros(n_nodes, 1));
  prev.Z.assign(noise.steps + 1, FieldSnapshot::zeros(n_nodes, grid.dim));

  FieldPath current;
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    FrozenDriver frozen;
    frozen.modes = driver.modes;
    frozen.f = [&](int k, const Vec& x) {
      const double y = interpolate(prev.Y[k], grid, x);
      const Vec z = interpolate_vec(prev.Z[k], grid, x);
      return driver.eval_f(prev.times[k], x, y, z);
    };
    frozen.g = [&](int mode, int k, const Vec& x) {
      const double y = interpolate(prev.Y[k], grid, x);
      const Vec z = interpolate_vec(prev.Z[k], grid, x);
      return driver.eval_g(mode, prev.times[k], x, y, z);
    };
    current = solve_linear_bdsde(frozen, terminal, coeffs, grid, noise, options.inner_samples);
    report.iterations = iter;

    const double residual = iterate_distance(current, prev, grid, discount, y_weight);
    report.picard_residuals.push_back(residual);
    if (report.picard_residuals.size() >= 2) {
      const double prev_res = report.picard_residuals[report.picard_residuals.size() - 2];
      report.contraction_ratios.push_back(prev_res > 0.0 ? residual / prev_res : 0.0);
    }
    if (residual <= options.tol) {
      report.converged = true;
      break;
    }
    prev = current;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (!report.converged) {
    throw NonConvergenceError("picard_solve: iteration budget exhausted", report.picard_residuals);
  }
  return {std::move(current), std::move(report)};
}

DriverSpec truncate_modes(const DriverSpec& driver, int keep) {
  if (keep < 1 || keep > driver.modes) throw std::invalid_argument("truncate_modes: count out of range");
  DriverSpec out = driver;
  out.modes = keep;
  out.g.resize(keep);
  return out;
}

ModeStudy mode_convergence_study(const DriverSpec& driver, const ProblemConstants& constants,
                                 const ForwardCoefficients& coeffs, const SpatialGrid& grid,
                                 const NoiseGrid& noise, std::span<const int> n_list,
                                 const PicardOptions& options) {
  if (n_list.size() < 2) throw std::invalid_argument("mode_convergence_study: need at least two counts");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("mode_convergence_study: counts must be increasing");

  std::vector<FieldPath> solutions;
  solutions.reserve(n_list.size());
  double uniform = 0.0;
  for (int n : n_list) {
    auto [path, rep] = picard_solve(truncate_modes(driver, n), constants, coeffs, grid, noise, options);
    double plain = 0.0;
    const double dt = path.dt();
    for (int k = 0; k <= path.steps(); ++k) {
      const double w = (k == 0 || k == path.steps()) ? 0.5 : 1.0;
      plain += w * (weighted_norm_sq(path.Y[k], grid) + weighted_norm_sq(path.Z[k], grid)) * dt;
    }
    uniform = std::max(uniform, plain);
    solutions.push_back(std::move(path));
  }

  // Time-integrated mass of the mode coefficients at the zero solution.
  auto g_zero_mass = [&](int mode) {
    const FieldPath& ref = solutions.front();
    double acc = 0.0;
    for (int k = 0; k <= ref.steps(); ++k) {
      double sp = 0.0;
      for (int i = 0; i < grid.node_count(); ++i) {
        const double v = driver.eval_g(mode, ref.times[k], grid.nodes[i], 0.0, zero_vec());
        sp += v * v * grid.w_rho[i];
      }
      acc += ((k == 0 || k == ref.steps()) ? 0.5 : 1.0) * sp * ref.dt();
    }
    return acc;
  };

  ModeStudy study;
  study.uniform_bound = uniform;
  double prev_measured = -1.0;
  for (std::size_t i = 0; i + 1 < n_list.size(); ++i) {
    ModeStudyRow row;
    row.n = n_list[i];
    row.m = n_list[i + 1];
    row.measured = iterate_distance(solutions[i + 1], solutions[i], grid, 0.0, 1.0);
    row.bound = 0.0;
    for (int j = row.n; j < row.m; ++j) {
      const double cj = j < static_cast<int>(constants.Cj.size()) ? constants.Cj[j] : 0.0;
      const double aj = j < static_cast<int>(constants.alphaj.size()) ? constants.alphaj[j] : 0.0;
      row.bound += (cj + aj) * uniform + g_zero_mass(j);
    }
    row.ratio = row.bound > 0.0 ? row.measured / row.bound : (row.measured > 0.0 ? HUGE_VAL : 0.0);
    if (prev_measured >= 0.0 && row.measured > prev_measured) study.monotone = false;
    prev_measured = row.measured;
    study.rows.push_back(row);
  }
  return study;
}

double flow_consistency_check(const FieldPath& solution, double t, double s,
                              const DriverSpec& driver, const ForwardCoefficients& coeffs,
                              const SpatialGrid& grid, const NoiseGrid& noise, int path_samples) {
  if (path_samples < 1) throw std::invalid_argument("flow_consistency_check: need path samples");
  const int kt = solution.time_index(t);
  const int ks = solution.time_index(s);
  if (ks < kt) throw std::invalid_argument("flow_consistency_check: s before t");
  const int dim = grid.dim;
  const double dt = solution.dt();
  const double root_dt = std::sqrt(dt);

  FieldSnapshot estimate = FieldSnapshot::zeros(grid.node_count(), 1);
  parallel_for(grid.node_count(), [&](int lo, int hi) {
    for (int node = lo; node < hi; ++node) {
      const CounterStream stream(noise.master_seed, StreamTag::kScratch,
                                 static_cast<std::uint64_t>(node));
      double avg = 0.0;
      for (int p = 0; p < path_samples; ++p) {
        Vec x = grid.nodes[node];
        double acc = 0.0;
        for (int k = kt; k < ks; ++k) {
          Vec dW = zero_vec();
          for (int i = 0; i < dim; ++i)
            dW[i] = root_dt * stream.normal(noise.global_step(k),
                                            static_cast<std::uint32_t>(p * dim + i));
          const double y_here = interpolate(solution.Y[k], grid, x);
          const Vec z_here = interpolate_vec(solution.Z[k], grid, x);
          acc += driver.eval_f(solution.times[k], x, y_here, z_here) * dt;
          acc -= dot(z_here, dW, dim);
          const Vec x_next = euler_step(x, coeffs, dt, dW);
          const double y_next = interpolate(solution.Y[k + 1], grid, x_next);
          const Vec z_next = interpolate_vec(solution.Z[k + 1], grid, x_next);
          for (int j = 0; j < driver.modes; ++j)
            acc -= driver.eval_g(j, solution.times[k + 1], x_next, y_next, z_next) * noise.dBhat(k, j);
          x = x_next;
        }
        avg += interpolate(solution.Y[ks], grid, x) + acc;
      }
      estimate.at(node) = avg / path_samples;
    }
  });

  double diff = 0.0;
  for (int i = 0; i < grid.node_count(); ++i) {
    const double e = estimate.at(i) - solution.Y[kt].at(i);
    diff += e * e * grid.w_rho[i];
  }
  return std::sqrt(diff);
}

}  // namespace bdsde
