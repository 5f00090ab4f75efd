#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bdsde/counter_rng.hpp"

namespace bdsde {

/// Eigenvalues of the trace-class covariance of the backward noise, in
/// non-increasing order. Mode j (1-based) carries weight sqrt(lambda_j);
/// the increments themselves are stored unscaled, the weight lives in the
/// mode coefficients of the driver.
struct NoiseSpectrum {
  std::vector<double> lambdas;

  int modes() const { return static_cast<int>(lambdas.size()); }
  double trace() const;  // partial sum of the retained eigenvalues
  void validate() const;

  /// lambda_j = j^(-exponent), j = 1..count.
  static NoiseSpectrum power_law(int count, double exponent);
  static NoiseSpectrum flat(int count, double value = 1.0);
};

/// Discrete increments of the d-dimensional forward Brownian motion and of
/// the retained backward modes over a uniform grid.
///
/// Step k of the grid covers [t0 + k*dt, t0 + (k+1)*dt) and is backed by the
/// master stream cell at index origin_offset + k. direction = -1 marks a
/// time-reversed grid: its cell at stream index g holds the negated forward
/// cell at index -g - 1, which keeps reversal, shift and regeneration
/// mutually consistent (shifting a reversed grid walks the two-sided stream).
struct NoiseGrid {
  double t0 = 0.0;
  double dt = 0.0;
  int steps = 0;  // N
  int dim = 0;    // d
  int modes = 0;  // J
  std::uint64_t master_seed = 0;
  std::int64_t origin_offset = 0;
  int direction = +1;
  std::vector<double> forward;   // steps x dim, row-major
  std::vector<double> backward;  // steps x modes, row-major

  double dW(int k, int i) const { return forward[static_cast<std::size_t>(k) * dim + i]; }
  double dBhat(int k, int j) const { return backward[static_cast<std::size_t>(k) * modes + j]; }

  /// Master-stream index backing step k; inner Monte-Carlo substreams key on
  /// this so that shifted reruns reuse identical draws.
  std::int64_t global_step(int k) const { return origin_offset + k; }

  double t_end() const { return t0 + steps * dt; }
};

NoiseGrid sample_noise(std::uint64_t seed, double t0, double dt, int steps, int dim,
                       const NoiseSpectrum& spectrum);

/// Same grid shape but anchored at an arbitrary stream offset (negative
/// offsets reach the two-sided extension of the stream).
NoiseGrid sample_noise_at(std::uint64_t seed, std::int64_t origin_offset, double t0, double dt,
                          int steps, int dim, int modes);

/// Reversal of the master stream at stream index reversal_index: step k holds
/// the negated forward increment at index reversal_index - 1 - k.
NoiseGrid sample_noise_reversed(std::uint64_t seed, std::int64_t reversal_index, double t0,
                                double dt, int steps, int dim, int modes);

/// Drops the increments to step index r_steps and beyond; increments past the
/// stored range are regenerated from the master stream. Time labels are kept.
NoiseGrid shift(const NoiseGrid& grid, std::int64_t r_steps);

/// Time reversal at the right end of the grid: step k of the result is the
/// negated step steps-1-k of the input. Requires T = t0 + steps*dt.
NoiseGrid reverse(const NoiseGrid& grid, double T);

/// First `steps` steps of the grid, unchanged otherwise.
NoiseGrid first_steps(const NoiseGrid& grid, int steps);

/// Right-endpoint sum  sum_k values[k] * dBhat(k, mode)  with values[k]
/// attached to t_{k+1}; `mode` is 1-based.
double backward_integral(std::span<const double> values, const NoiseGrid& grid, int mode);

/// Left-endpoint sum  sum_k values[k] * dBhat(k, mode)  with values[k]
/// attached to t_k; counterpart of backward_integral under reversal.
double forward_integral(std::span<const double> values, const NoiseGrid& grid, int mode);

// Flat CSV replay format: one header line, then one row per step.
void save_noise_csv(const NoiseGrid& grid, const std::string& path);
NoiseGrid load_noise_csv(const std::string& path);

}  // namespace bdsde
