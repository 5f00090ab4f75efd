#include "bdsde/forward_sde.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bdsde {

ForwardCoefficients ForwardCoefficients::frozen(int dim) {
  ForwardCoefficients c;
  c.dim = dim;
  c.lipschitz = 0.0;
  return c;
}

ForwardCoefficients ForwardCoefficients::linear_drift(int dim, double rate, double noise_scale) {
  ForwardCoefficients c;
  c.dim = dim;
  c.drift = [rate, dim](const Vec& x) { return scale(x, -rate, dim); };
  c.diffusion = [noise_scale, dim](const Vec&) {
    Mat m = zero_mat();
    for (int i = 0; i < dim; ++i) m[i][i] = noise_scale;
    return m;
  };
  c.a_div = [](const Vec&) { return zero_vec(); };
  c.lipschitz = std::abs(rate);
  return c;
}

Vec euler_step(const Vec& x, const ForwardCoefficients& coeffs, double dt, const Vec& dW) {
  if (!(dt > 0.0)) throw std::invalid_argument("euler_step: dt must be positive");
  const int d = coeffs.dim;
  Vec out = add(x, scale(coeffs.b(x), dt, d), d);
  out = add(out, mat_vec(coeffs.sigma(x), dW, d), d);
  if (!all_finite(out, d)) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "euler_step: non-finite state from x=(%g,%g)", x[0], x[1]);
    throw std::runtime_error(msg);
  }
  return out;
}

FlowEnsemble simulate_flow(std::span<const Vec> starts, double t, double horizon,
                           const ForwardCoefficients& coeffs, const NoiseGrid& grid) {
  if (horizon < t) throw std::invalid_argument("simulate_flow: horizon before start");
  if (grid.dim != coeffs.dim) throw std::invalid_argument("simulate_flow: dimension mismatch");
  const double eps = 1e-9 * std::max(1.0, grid.dt);
  if (t < grid.t0 - eps || horizon > grid.t_end() + eps)
    throw std::invalid_argument("simulate_flow: grid does not cover [t, horizon]");
  const int k0 = static_cast<int>(std::llround((t - grid.t0) / grid.dt));
  const int k1 = static_cast<int>(std::llround((horizon - grid.t0) / grid.dt));
  if (k1 > grid.steps) throw std::invalid_argument("simulate_flow: insufficient grid steps");

  FlowEnsemble flow;
  flow.dim = coeffs.dim;
  flow.samples = 1;
  flow.starts.assign(starts.begin(), starts.end());
  flow.times.resize(k1 - k0 + 1);
  for (int k = 0; k <= k1 - k0; ++k) flow.times[k] = grid.t0 + (k0 + k) * grid.dt;
  flow.states.resize(flow.starts.size() * flow.times.size());

  const int n_pts = static_cast<int>(flow.starts.size());
  parallel_for(n_pts, [&](int lo, int hi) {
    for (int p = lo; p < hi; ++p) {
      Vec x = flow.starts[p];
      flow.state(p, 0, 0) = x;
      for (int k = k0; k < k1; ++k) {
        Vec dW = zero_vec();
        for (int i = 0; i < coeffs.dim; ++i) dW[i] = grid.dW(k, i);
        x = euler_step(x, coeffs, grid.dt, dW);
        flow.state(p, 0, k - k0 + 1) = x;
      }
    }
  });
  return flow;
}

FlowEnsemble simulate_flow_bundle(std::span<const Vec> starts, double t, double horizon, double dt,
                                  const ForwardCoefficients& coeffs, std::uint64_t seed,
                                  int samples, std::int64_t stream_origin) {
  if (samples < 1) throw std::invalid_argument("simulate_flow_bundle: need at least one sample");
  if (horizon < t) throw std::invalid_argument("simulate_flow_bundle: horizon before start");
  const int steps = static_cast<int>(std::llround((horizon - t) / dt));
  const std::int64_t k0 = stream_origin + std::llround(t / dt);

  FlowEnsemble flow;
  flow.dim = coeffs.dim;
  flow.samples = samples;
  flow.starts.assign(starts.begin(), starts.end());
  flow.times.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) flow.times[k] = t + k * dt;
  flow.states.resize(flow.starts.size() * static_cast<std::size_t>(samples) * (steps + 1));

  const double root_dt = std::sqrt(dt);
  const int n_pts = static_cast<int>(flow.starts.size());
  parallel_for(n_pts, [&](int lo, int hi) {
    for (int p = lo; p < hi; ++p) {
      const CounterStream stream(seed, StreamTag::kFlowBundle, static_cast<std::uint64_t>(p));
      for (int s = 0; s < samples; ++s) {
        Vec x = flow.starts[p];
        flow.state(p, s, 0) = x;
        for (int k = 0; k < steps; ++k) {
          Vec dW = zero_vec();
          for (int i = 0; i < coeffs.dim; ++i)
            dW[i] = root_dt * stream.normal(k0 + k, static_cast<std::uint32_t>(s * coeffs.dim + i));
          x = euler_step(x, coeffs, dt, dW);
          flow.state(p, s, k + 1) = x;
        }
      }
    }
  });
  return flow;
}

OneStepCloud one_step_cloud(const Vec& x, const ForwardCoefficients& coeffs, double dt, int samples,
                            const CounterStream& stream, std::int64_t step_index) {
  if (samples < 1) throw std::invalid_argument("one_step_cloud: need at least one sample");
  OneStepCloud cloud;
  cloud.states.resize(samples);
  cloud.increments.resize(samples);
  const double root_dt = std::sqrt(dt);
  for (int m = 0; m < samples; ++m) {
    Vec dW = zero_vec();
    for (int i = 0; i < coeffs.dim; ++i)
      dW[i] = root_dt * stream.normal(step_index, static_cast<std::uint32_t>(m * coeffs.dim + i));
    cloud.increments[m] = dW;
    cloud.states[m] = euler_step(x, coeffs, dt, dW);
  }
  return cloud;
}

Vec tilde_A(const ForwardCoefficients& coeffs, const Vec& x) {
  const int d = coeffs.dim;
  if (coeffs.a_div) return scale(coeffs.a_div(x), 0.5, d);
  if (!coeffs.diffusion) return zero_vec();
  // Central differences of a = sigma sigma^T, step scaled by the point size.
  const double h = 1e-5 * (1.0 + norm(x, d));
  Vec out = zero_vec();
  for (int i = 0; i < d; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const Mat ap = sigma_sq(coeffs.sigma(xp), d);
    const Mat am = sigma_sq(coeffs.sigma(xm), d);
    for (int j = 0; j < d; ++j) out[j] += (ap[i][j] - am[i][j]) / (2.0 * h);
  }
  return scale(out, 0.5, d);
}

}  // namespace bdsde
