#pragma once

#include <string>

#include "bdsde/bdsde_finite.hpp"
#include "bdsde/noise.hpp"

namespace bdsde {

/// One named problem instance: driver, hypothesis constants, forward
/// coefficients and noise spectrum, with the Lipschitz bookkeeping derived by
/// hand from the coefficient definitions below.
struct Benchmark {
  std::string name;
  DriverSpec driver;
  ProblemConstants constants;
  ForwardCoefficients coeffs;
  NoiseSpectrum spectrum;
};

/// Dissipative scalar benchmark: f = -mu y + offset, one constant mode
/// g1 = sigma0, frozen forward flow. Closed form: the diagonal marginal is
/// centered Gaussian with variance sigma0^2 / (2 mu) shifted by offset / mu.
Benchmark make_ou(double mu = 0.5, double sigma0 = 1.0, double offset = 0.0, double K = 0.2);

/// Space-coupled variant: f = -mu y + amp sin(freq x1), b = -x,
/// sigma = s_f I, g1 = sigma0. The diagonal field is smooth and non-flat, so
/// gradients and start-time differences are nontrivial.
Benchmark make_ou_space(double mu = 0.5, double sigma0 = 0.5, double amp = 1.0, double freq = 1.0,
                        double s_f = 0.5, double K = 0.2, int dim = 1);

/// Contraction benchmark with z-coupled modes:
///   f  = -mu y + 0.2 sin(z1)
///   g1 = sigma0 + a1 z1,  g2 = c2 + a2 z1
/// with a1^2 + a2^2 = alpha_sum (0.16 + 0.09 = 0.25 by default).
Benchmark make_picard_bench(double mu = 0.5, double sigma0 = 0.4, double K = 0.2);

/// Mode-truncation benchmark: lambda_j = j^-2, g_j = sqrt(lambda_j) *
/// (c0 + cy sin y), frozen forward flow; Cj = lambda_j cy^2, alpha_j = 0.
Benchmark make_mode_bench(int modes = 16, double mu = 0.5, double c0 = 1.0, double cy = 0.3,
                          double K = 0.2);

Benchmark make_benchmark(const std::string& name);

}  // namespace bdsde
