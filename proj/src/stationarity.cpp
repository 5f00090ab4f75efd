#include "bdsde/stationarity.hpp"

#include <cmath>
#include <stdexcept>

#include "bdsde/noise.hpp"

namespace bdsde {

NoiseGrid stream_window(const NoiseGrid& grid, std::int64_t start, int steps, double new_t0) {
  // Every grid is stream-backed, so a window is just a fresh sample anchored
  // at the advanced offset; cells match copies of the source bitwise.
  const std::int64_t origin = grid.origin_offset + start;
  if (grid.direction > 0)
    return sample_noise_at(grid.master_seed, origin, new_t0, grid.dt, steps, grid.dim, grid.modes);
  return sample_noise_reversed(grid.master_seed, -origin, new_t0, grid.dt, steps, grid.dim,
                               grid.modes);
}

namespace {

int lattice_index(double value, double dt, const char* what) {
  const auto idx = std::llround(value / dt);
  if (std::abs(idx * dt - value) > 1e-9 * std::max(1.0, std::abs(value)))
    throw std::invalid_argument(std::string(what) + " must be a multiple of dt");
  return static_cast<int>(idx);
}

double relative_path_gap(const FieldPath& a, const FieldPath& b, const SpatialGrid& grid) {
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= a.steps(); ++k) {
    for (int i = 0; i < grid.node_count(); ++i) {
      const double ey = a.Y[k].at(i) - b.Y[k].at(i);
      num += ey * ey * grid.w_rho[i];
      den += b.Y[k].at(i) * b.Y[k].at(i) * grid.w_rho[i];
      for (int c = 0; c < grid.dim; ++c) {
        const double ez = a.Z[k].at(i, c) - b.Z[k].at(i, c);
        num += ez * ez * grid.w_rho[i];
        den += b.Z[k].at(i, c) * b.Z[k].at(i, c) * grid.w_rho[i];
      }
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

double shift_compare(const DriverSpec& driver, const ProblemConstants& constants,
                     const ForwardCoefficients& coeffs, const SpatialGrid& grid,
                     std::uint64_t master_seed, double t, double r,
                     const StationarityOptions& options) {
  if (driver.time_dependent)
    throw std::invalid_argument("shift_compare: driver must be time-homogeneous");
  const int idx_t = lattice_index(t, options.dt, "shift_compare: t");
  const int idx_r = lattice_index(r, options.dt, "shift_compare: r");
  if (idx_t < 0 || idx_r < 0) throw std::invalid_argument("shift_compare: t and r must be nonnegative");
  const int relax_steps = lattice_index(options.relax, options.dt, "shift_compare: relax");

  PicardOptions popt;
  popt.inner_samples = options.inner_samples;
  popt.tol = options.picard_tol;
  popt.max_iter = options.max_iter;

  const NoiseGrid base =
      sample_noise_at(master_seed, idx_t, t, options.dt, relax_steps, coeffs.dim, driver.modes);

  // Anchored r later on the same stream.
  const NoiseGrid later = sample_noise_at(master_seed, idx_t + idx_r, t + r, options.dt, relax_steps,
                                          coeffs.dim, driver.modes);
  auto [path_later, rep_later] = picard_solve(driver, constants, coeffs, grid, later, popt);

  // Same solve on the shifted stream, labels kept at t.
  const NoiseGrid shifted = shift(base, idx_r);
  auto [path_shifted, rep_shifted] = picard_solve(driver, constants, coeffs, grid, shifted, popt);

  return relative_path_gap(path_shifted, path_later, grid);
}

OUOracleReport ou_stationary_oracle(double mu, double sigma0, double K, double dt, double horizon,
                                    int n_seeds, std::uint64_t master_seed) {
  if (n_seeds < 8) throw std::invalid_argument("ou_stationary_oracle: need at least 8 seeds");
  if (!(mu > 0.0)) throw std::invalid_argument("ou_stationary_oracle: mu must be positive");
  if (horizon * mu < 8.0)
    throw std::invalid_argument("ou_stationary_oracle: horizon too short for relaxation");

  DriverSpec driver;
  driver.modes = 1;
  driver.f = [mu](double, const Vec&, double y, const Vec&) { return -mu * y; };
  driver.g.push_back([sigma0](double, const Vec&, double, const Vec&) { return sigma0; });

  ProblemConstants constants;
  constants.K = K;
  constants.mu = mu;
  constants.C = mu * mu;
  constants.Cj = {0.0};
  constants.alphaj = {0.0};

  const ForwardCoefficients coeffs = ForwardCoefficients::frozen(1);
  const SpatialGrid grid = SpatialGrid::tensor(1, 1.0, 5, WeightSpec{4.0});
  const int node0 = grid.node_count() / 2;

  PicardOptions popt;
  popt.inner_samples = 1;
  popt.tol = 1e-12;
  popt.max_iter = 60;

  OUOracleReport report;
  report.target_variance = sigma0 * sigma0 / (2.0 * mu);
  const int n_times = 5;
  const int n_steps = static_cast<int>(std::llround(horizon / dt));
  // interior diagonal times in the first quarter of the horizon, so every one
  // of them keeps at least three quarters of the horizon for relaxation
  std::vector<int> time_idx(n_times);
  for (int j = 0; j < n_times; ++j)
    time_idx[j] = static_cast<int>(std::llround((j + 1) * 0.05 * n_steps));
  report.times.resize(n_times);

  std::vector<std::vector<double>> samples(n_times, std::vector<double>(n_seeds));
  for (int s = 0; s < n_seeds; ++s) {
    const NoiseGrid noise =
        sample_noise_at(master_seed + static_cast<std::uint64_t>(s), 0, 0.0, dt, n_steps, 1, 1);
    auto [path, rep] = picard_solve(driver, constants, coeffs, grid, noise, popt);
    for (int j = 0; j < n_times; ++j) {
      report.times[j] = path.times[time_idx[j]];
      samples[j][s] = path.Y[time_idx[j]].at(node0);
    }
  }

  report.variances.resize(n_times);
  double pooled = 0.0;
  for (int j = 0; j < n_times; ++j) {
    double mean = 0.0;
    for (double v : samples[j]) mean += v;
    mean /= n_seeds;
    double var = 0.0;
    for (double v : samples[j]) var += (v - mean) * (v - mean);
    report.variances[j] = var / (n_seeds - 1);
    pooled += report.variances[j] / n_times;
  }
  report.pooled_variance = pooled;
  report.variance_se = report.target_variance * std::sqrt(2.0 / (n_seeds - 1));

  // shape of the middle-time sample
  {
    const auto& xs = samples[n_times / 2];
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= n_seeds;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : xs) {
      const double d = v - mean;
      m2 += d * d;
      m3 += d * d * d;
      m4 += d * d * d * d;
    }
    m2 /= n_seeds;
    m3 /= n_seeds;
    m4 /= n_seeds;
    report.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    report.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  }

  const double se = report.variance_se;
  report.variance_ok = std::abs(report.pooled_variance - report.target_variance) <= 3.0 * se;
  report.invariance_ok = true;
  for (double v : report.variances)
    if (std::abs(v - report.pooled_variance) > 4.0 * se) report.invariance_ok = false;
  report.gaussian_ok = std::abs(report.skewness) <= 4.0 * std::sqrt(6.0 / n_seeds) &&
                       std::abs(report.excess_kurtosis) <= 4.0 * std::sqrt(24.0 / n_seeds);
  return report;
}

SpdeStationarityResult spde_stationarity_check(const DriverSpec& driver,
                                               const ProblemConstants& constants,
                                               const ForwardCoefficients& coeffs,
                                               const SpatialGrid& grid, std::uint64_t master_seed,
                                               double T, double t, double r, double tolerance,
                                               const StationarityOptions& options) {
  if (driver.time_dependent)
    throw std::invalid_argument("spde_stationarity_check: driver must be time-homogeneous");
  const double dt = options.dt;
  const int idx_T = lattice_index(T, dt, "spde_stationarity_check: T");
  const int idx_t = lattice_index(t, dt, "spde_stationarity_check: t");
  const int idx_r = lattice_index(r, dt, "spde_stationarity_check: r");
  if (idx_t + idx_r > idx_T)
    throw std::invalid_argument("spde_stationarity_check: t + r must not exceed the reversal horizon");
  const int relax_steps = lattice_index(options.relax, dt, "spde_stationarity_check: relax");

  PicardOptions popt;
  popt.inner_samples = options.inner_samples;
  popt.tol = options.picard_tol;
  popt.max_iter = options.max_iter;

  DriverSpec stationary = driver;
  stationary.h = nullptr;
  stationary.h_noise = nullptr;

  // v(t + r) on the base stream: diagonal at T - t - r under reversal at T.
  const int diag1 = idx_T - idx_t - idx_r;
  const NoiseGrid rev_base = sample_noise_reversed(master_seed, idx_T, 0.0, dt, diag1 + relax_steps,
                                                   coeffs.dim, driver.modes);
  const NoiseGrid window1 = stream_window(rev_base, diag1, relax_steps, diag1 * dt);
  auto [path1, rep1] = picard_solve(stationary, constants, coeffs, grid, window1, popt);

  // v(t) on the r-shifted stream: diagonal at T - t under reversal at T + r.
  const int diag2 = idx_T - idx_t;
  const NoiseGrid rev_shifted = sample_noise_reversed(master_seed, idx_T + idx_r, 0.0, dt,
                                                      diag2 + relax_steps, coeffs.dim, driver.modes);
  const NoiseGrid window2 = stream_window(rev_shifted, diag2, relax_steps, diag2 * dt);
  auto [path2, rep2] = picard_solve(stationary, constants, coeffs, grid, window2, popt);

  SpdeStationarityResult result;
  result.discrepancy = relative_path_gap(path1, path2, grid);
  result.pass = result.discrepancy <= tolerance;
  return result;
}

}  // namespace bdsde
