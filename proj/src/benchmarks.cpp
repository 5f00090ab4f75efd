#include "bdsde/benchmarks.hpp"

#include <cmath>
#include <stdexcept>

namespace bdsde {

Benchmark make_ou(double mu, double sigma0, double offset, double K) {
  Benchmark b;
  b.name = "ou";
  b.driver.modes = 1;
  b.driver.f = [mu, offset](double, const Vec&, double y, const Vec&) { return -mu * y + offset; };
  b.driver.g.push_back([sigma0](double, const Vec&, double, const Vec&) { return sigma0; });
  b.constants.K = K;
  b.constants.mu = mu;
  b.constants.C = mu * mu;
  b.constants.L = 0.0;
  b.constants.Cj = {0.0};
  b.constants.alphaj = {0.0};
  b.constants.M2j = {0.0};
  b.coeffs = ForwardCoefficients::frozen(1);
  b.spectrum = NoiseSpectrum::flat(1);
  return b;
}

Benchmark make_ou_space(double mu, double sigma0, double amp, double freq, double s_f, double K,
                        int dim) {
  Benchmark b;
  b.name = "ou_space";
  b.driver.modes = 1;
  b.driver.f = [mu, amp, freq](double, const Vec& x, double y, const Vec&) {
    return -mu * y + amp * std::sin(freq * x[0]);
  };
  b.driver.g.push_back([sigma0](double, const Vec&, double, const Vec&) { return sigma0; });
  b.constants.K = K;
  b.constants.mu = mu;
  b.constants.C = mu * mu;
  b.constants.M2 = amp * amp * freq * freq;
  b.constants.L = 1.0;  // |b| Lipschitz 1, sigma constant
  b.constants.Cj = {0.0};
  b.constants.alphaj = {0.0};
  b.constants.M2j = {0.0};
  b.coeffs = ForwardCoefficients::linear_drift(dim, 1.0, s_f);
  b.spectrum = NoiseSpectrum::flat(1);
  return b;
}

Benchmark make_picard_bench(double mu, double sigma0, double K) {
  Benchmark b;
  b.name = "picard_bench";
  b.driver.modes = 2;
  b.driver.f = [mu](double, const Vec&, double y, const Vec& z) {
    return -mu * y + 0.2 * std::sin(z[0]);
  };
  b.driver.g.push_back(
      [sigma0](double, const Vec&, double, const Vec& z) { return sigma0 + 0.4 * z[0]; });
  b.driver.g.push_back([](double, const Vec&, double, const Vec& z) { return 0.2 + 0.3 * z[0]; });
  b.constants.K = K;
  b.constants.mu = mu;
  // |df|^2 <= 2 mu^2 |dy|^2 + 2 (0.2)^2 |dz|^2, one shared coefficient
  b.constants.C = std::max(2.0 * mu * mu, 2.0 * 0.2 * 0.2);
  b.constants.L = 1.0;
  b.constants.Cj = {0.0, 0.0};
  b.constants.alphaj = {0.16, 0.09};
  b.constants.M2j = {0.0, 0.0};
  b.coeffs = ForwardCoefficients::linear_drift(1, 1.0, 0.5);
  b.spectrum = NoiseSpectrum::flat(2);
  return b;
}

Benchmark make_mode_bench(int modes, double mu, double c0, double cy, double K) {
  Benchmark b;
  b.name = "mode_bench";
  b.driver.modes = modes;
  b.driver.f = [mu](double, const Vec&, double y, const Vec&) { return -mu * y; };
  b.spectrum = NoiseSpectrum::power_law(modes, 2.0);
  b.constants.K = K;
  b.constants.mu = mu;
  b.constants.C = mu * mu;
  b.constants.L = 0.0;
  for (int j = 0; j < modes; ++j) {
    const double root_lambda = std::sqrt(b.spectrum.lambdas[j]);
    b.driver.g.push_back([root_lambda, c0, cy](double, const Vec&, double y, const Vec&) {
      return root_lambda * (c0 + cy * std::sin(y));
    });
    b.constants.Cj.push_back(b.spectrum.lambdas[j] * cy * cy);
    b.constants.alphaj.push_back(0.0);
    b.constants.M2j.push_back(0.0);
  }
  b.coeffs = ForwardCoefficients::frozen(1);
  return b;
}

Benchmark make_benchmark(const std::string& name) {
  if (name == "ou") return make_ou();
  if (name == "ou_space") return make_ou_space();
  if (name == "picard_bench") return make_picard_bench();
  if (name == "mode_bench") return make_mode_bench();
  throw std::invalid_argument("unknown benchmark: " + name);
}

}  // namespace bdsde
