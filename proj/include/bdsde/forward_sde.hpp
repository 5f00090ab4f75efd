#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bdsde/common.hpp"
#include "bdsde/counter_rng.hpp"
#include "bdsde/noise.hpp"

namespace bdsde {

/// Drift and diffusion of the forward diffusion, plus an optional analytic
/// column-divergence of a = sigma sigma^T. When a_div is absent the drift
/// correction falls back to central finite differences.
struct ForwardCoefficients {
  int dim = 1;
  std::function<Vec(const Vec&)> drift;                 // b
  std::function<Mat(const Vec&)> diffusion;             // sigma
  std::function<Vec(const Vec&)> a_div;                 // optional: ( sum_i d a_ij / d x_i )_j
  double lipschitz = 0.0;                               // user-asserted global constant

  Vec b(const Vec& x) const { return drift ? drift(x) : zero_vec(); }
  Mat sigma(const Vec& x) const { return diffusion ? diffusion(x) : zero_mat(); }

  static ForwardCoefficients frozen(int dim);                       // b = 0, sigma = 0
  static ForwardCoefficients linear_drift(int dim, double rate, double noise_scale);
};

/// x + b(x) dt + sigma(x) dW. Throws on a non-finite result, naming the point.
Vec euler_step(const Vec& x, const ForwardCoefficients& coeffs, double dt, const Vec& dW);

/// Paths of the diffusion from a cloud of starting points. Sample index 0 of
/// a grid-driven ensemble uses the grid's shared forward increments; bundles
/// hold independent samples drawn from a counter substream.
struct FlowEnsemble {
  int dim = 1;
  int samples = 1;
  std::vector<Vec> starts;
  std::vector<double> times;  // steps+1 entries
  std::vector<Vec> states;    // (point, sample, step) -> state

  int steps() const { return static_cast<int>(times.size()) - 1; }
  const Vec& state(int point, int sample, int step) const {
    return states[(static_cast<std::size_t>(point) * samples + sample) * (steps() + 1) + step];
  }
  Vec& state(int point, int sample, int step) {
    return states[(static_cast<std::size_t>(point) * samples + sample) * (steps() + 1) + step];
  }
};

/// One realization shared across all starting points, driven by the grid's
/// forward increments on [t, horizon].
FlowEnsemble simulate_flow(std::span<const Vec> starts, double t, double horizon,
                           const ForwardCoefficients& coeffs, const NoiseGrid& grid);

/// Independent realizations per (point, sample) from the master stream; used
/// by the statistical estimators. Steps are keyed by the absolute stream
/// index so that flows started at different times share one W realization.
FlowEnsemble simulate_flow_bundle(std::span<const Vec> starts, double t, double horizon, double dt,
                                  const ForwardCoefficients& coeffs, std::uint64_t seed,
                                  int samples, std::int64_t stream_origin = 0);

struct OneStepCloud {
  std::vector<Vec> states;      // M Euler steps from x
  std::vector<Vec> increments;  // their generating dW
};

/// M independent one-step transitions from x, reproducible from the stream.
OneStepCloud one_step_cloud(const Vec& x, const ForwardCoefficients& coeffs, double dt, int samples,
                            const CounterStream& stream, std::int64_t step_index = 0);

/// Drift correction vector with components (1/2) sum_i d a_ij / d x_i.
Vec tilde_A(const ForwardCoefficients& coeffs, const Vec& x);

}  // namespace bdsde
