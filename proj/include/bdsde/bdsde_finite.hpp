#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bdsde/common.hpp"
#include "bdsde/forward_sde.hpp"
#include "bdsde/noise.hpp"
#include "bdsde/weighted_space.hpp"

namespace bdsde {

/// Coefficient functions of the backward equation: the drift f, one
/// coefficient per retained backward mode, and the terminal condition. The
/// optional h_noise variant may consume a noise segment beyond the horizon;
/// when both are absent the terminal is zero.
struct DriverSpec {
  int modes = 1;
  bool time_dependent = false;
  std::function<double(double t, const Vec& x, double y, const Vec& z)> f;
  std::vector<std::function<double(double t, const Vec& x, double y, const Vec& z)>> g;
  std::function<double(const Vec& x)> h;
  std::function<double(const Vec& x, const NoiseGrid& tail)> h_noise;

  double eval_f(double t, const Vec& x, double y, const Vec& z) const {
    return f ? f(t, x, y, z) : 0.0;
  }
  double eval_g(int mode, double t, const Vec& x, double y, const Vec& z) const {
    const auto& fn = g[static_cast<std::size_t>(mode)];
    return fn ? fn(t, x, y, z) : 0.0;
  }
};

/// Scalar hypotheses of the problem in one validated record. Cj/alphaj/M2j
/// are per-mode Lipschitz coefficients; sums over the retained modes stand in
/// for the series.
struct ProblemConstants {
  double K = 0.2;    // discount
  double p = 2.5;    // moment exponent, in (2, q-1)
  double q = 4.0;    // weight exponent, > 3
  double mu = 0.5;   // monotonicity constant of f in y
  double C = 0.25;   // squared-difference Lipschitz coefficient of f
  double L = 0.0;    // forward-coefficient Lipschitz constant
  double M2 = 0.0;   // x-coupling coefficient of f
  std::vector<double> Cj;      // y-coupling per mode
  std::vector<double> alphaj;  // z-coupling per mode
  std::vector<double> M2j;     // x-coupling per mode

  double sum_Cj() const;
  double sum_alphaj() const;
  double sum_M2j() const;
};

/// Nodal representation of the solution pair over a uniform time grid: Y is
/// scalar per node, Z carries d components. Slice k holds the solution field
/// at time times[k]; the terminal slice equals the terminal data exactly and
/// carries Z = 0.
struct FieldPath {
  std::vector<double> times;
  std::vector<FieldSnapshot> Y;
  std::vector<FieldSnapshot> Z;

  int steps() const { return static_cast<int>(times.size()) - 1; }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  double t0() const { return times.front(); }
  double horizon() const { return times.back(); }
  int time_index(double t) const;
};

struct SolveReport {
  std::vector<double> picard_residuals;    // squared discounted norms of iterate differences
  std::vector<double> contraction_ratios;  // successive residual ratios
  int iterations = 0;                      // linear solves performed
  bool converged = false;
  double picard_discount = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> tail_estimates;
};

/// Drivers of the frozen (linear) backward equation: f at a time index and a
/// point, and one coefficient per mode evaluated at the right endpoint.
struct FrozenDriver {
  int modes = 1;
  std::function<double(int k, const Vec& x)> f;
  std::function<double(int mode, int k, const Vec& x)> g;
};

/// Backward sweep for the frozen-driver equation. Per node and step the
/// conditional expectations over the forward increments are estimated from a
/// cloud of inner_samples one-step transitions whose substream is keyed by
/// (stream index of the step, node), so shifted reruns replay identical
/// draws. Z uses the centred estimator M/((M-1) dt) avg[(v - vbar) dW], which
/// is unbiased and vanishes identically for degenerate diffusions; a single
/// inner sample carries no gradient information and yields Z = 0.
FieldPath solve_linear_bdsde(const FrozenDriver& frozen, const FieldSnapshot& terminal,
                             const ForwardCoefficients& coeffs, const SpatialGrid& grid,
                             const NoiseGrid& noise, int inner_samples);

struct PicardOptions {
  int inner_samples = 16;
  double tol = 1e-10;
  int max_iter = 50;
  double discount_override = 0.0;        // 0 = use 1 + 2C + 2 sum Cj
  const NoiseGrid* terminal_tail = nullptr;  // consumed by DriverSpec::h_noise
};

/// Fixed-point iteration over frozen-driver sweeps, starting from (0,0).
/// Stops when the combined discounted norm of the iterate difference falls
/// below tol; throws NonConvergenceError with the residual history otherwise.
std::pair<FieldPath, SolveReport> picard_solve(const DriverSpec& driver,
                                               const ProblemConstants& constants,
                                               const ForwardCoefficients& coeffs,
                                               const SpatialGrid& grid, const NoiseGrid& noise,
                                               const PicardOptions& options);

/// Driver with the modes above `keep` removed.
DriverSpec truncate_modes(const DriverSpec& driver, int keep);

struct ModeStudyRow {
  int n = 0;
  int m = 0;
  double measured = 0.0;  // squared integral norm of the solution difference
  double bound = 0.0;     // per-mode tail coefficients times the uniform bound, plus the g(.,0,0) mass
  double ratio = 0.0;
};

struct ModeStudy {
  std::vector<ModeStudyRow> rows;
  double uniform_bound = 0.0;  // max over n of the squared integral norm of (Y,Z)
  bool monotone = true;
};

/// Solves the truncated equation for every count in n_list (increasing) and
/// compares consecutive solution differences against the analytic tail.
ModeStudy mode_convergence_study(const DriverSpec& driver, const ProblemConstants& constants,
                                 const ForwardCoefficients& coeffs, const SpatialGrid& grid,
                                 const NoiseGrid& noise, std::span<const int> n_list,
                                 const PicardOptions& options);

/// Statistical consistency of the nodal field with the pathwise equation:
/// rolls the solved field along `path_samples` fresh flow paths from every
/// node over [t, s], accumulating the drift, mode and martingale terms, and
/// returns the weighted-norm gap between the rollout estimate and the stored
/// field at t. Exact when the flow is frozen or s = t; otherwise
/// O(dt^(1/2) + path_samples^(-1/2)).
double flow_consistency_check(const FieldPath& solution, double t, double s,
                              const DriverSpec& driver, const ForwardCoefficients& coeffs,
                              const SpatialGrid& grid, const NoiseGrid& noise, int path_samples);

}  // namespace bdsde
