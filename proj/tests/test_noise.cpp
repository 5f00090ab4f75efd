#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "bdsde/noise.hpp"

using namespace bdsde;

namespace {
const NoiseSpectrum kOneMode = NoiseSpectrum::flat(1);
}

TEST_CASE("spectrum validation and trace") {
  const NoiseSpectrum s = NoiseSpectrum::power_law(16, 2.0);
  REQUIRE(s.modes() == 16);
  REQUIRE(s.trace() > 1.0);
  REQUIRE(s.trace() < 1.7);  // partial sums of j^-2 stay below pi^2/6

  NoiseSpectrum bad;
  bad.lambdas = {1.0, 2.0};  // increasing
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.lambdas = {1.0, 0.0};
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("empty grid is valid") {
  const NoiseGrid g = sample_noise(7, 0.0, 0.5, 0, 2, kOneMode);
  REQUIRE(g.steps == 0);
  REQUIRE(g.forward.empty());
  REQUIRE(g.backward.empty());
}

TEST_CASE("parameter errors") {
  REQUIRE_THROWS_AS(sample_noise(1, 0.0, -0.1, 4, 1, kOneMode), std::invalid_argument);
  REQUIRE_THROWS_AS(sample_noise_at(1, 0, 0.0, 0.1, 4, 0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(sample_noise_at(1, 0, 0.0, 0.1, 4, 1, 0), std::invalid_argument);
}

TEST_CASE("increment sample moments") {
  const int n = 10000;
  const double dt = 0.01;
  const NoiseGrid g = sample_noise(42, 0.0, dt, n, 1, kOneMode);
  double mean = 0.0, var = 0.0;
  for (int k = 0; k < n; ++k) mean += g.dW(k, 0);
  mean /= n;
  for (int k = 0; k < n; ++k) var += (g.dW(k, 0) - mean) * (g.dW(k, 0) - mean);
  var /= n - 1;
  REQUIRE(std::abs(mean) <= 4.0 * std::sqrt(dt / n));
  REQUIRE(std::abs(var - dt) <= 0.05 * dt);
}

TEST_CASE("offset restriction matches shifted sampling bitwise") {
  const int n = 64, r = 17;
  const NoiseGrid base = sample_noise(99, 0.0, 0.125, n, 2, kOneMode);
  const NoiseGrid offset = sample_noise_at(99, r, 0.0, 0.125, n - r, 2, 1);
  for (int k = 0; k < n - r; ++k) {
    for (int i = 0; i < 2; ++i) REQUIRE(base.dW(k + r, i) == offset.dW(k, i));
    REQUIRE(base.dBhat(k + r, 0) == offset.dBhat(k, 0));
  }
}

TEST_CASE("shift is regeneration at the advanced offset") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const NoiseGrid g = sample_noise_at(seed, -11, 0.0, 0.25, 20, 1, 2);
    const NoiseGrid shifted = shift(g, 13);
    const NoiseGrid regen = sample_noise_at(seed, -11 + 13, 0.0, 0.25, 20, 1, 2);
    REQUIRE(shifted.forward == regen.forward);
    REQUIRE(shifted.backward == regen.backward);
  }
}

TEST_CASE("shift semigroup and identity") {
  const NoiseGrid g = sample_noise(5, 0.0, 0.1, 32, 1, kOneMode);
  const NoiseGrid zero = shift(g, 0);
  REQUIRE(zero.forward == g.forward);
  REQUIRE(zero.backward == g.backward);

  const NoiseGrid ab = shift(shift(g, 5), 9);
  const NoiseGrid once = shift(g, 14);
  REQUIRE(ab.forward == once.forward);
  REQUIRE(ab.backward == once.backward);
  REQUIRE(ab.origin_offset == once.origin_offset);

  const NoiseGrid part = shift(g, 7);
  for (int k = 0; k + 7 < 32; ++k) REQUIRE(part.dBhat(k, 0) == g.dBhat(k + 7, 0));
}

TEST_CASE("reversal involution and single-step negation") {
  const NoiseGrid g = sample_noise(11, 0.0, 0.2, 16, 2, kOneMode);
  const NoiseGrid back = reverse(reverse(g, g.t_end()), g.t_end());
  REQUIRE(back.forward == g.forward);
  REQUIRE(back.backward == g.backward);
  REQUIRE(back.origin_offset == g.origin_offset);
  REQUIRE(back.direction == g.direction);

  const NoiseGrid one = sample_noise(3, 0.0, 0.5, 1, 1, kOneMode);
  const NoiseGrid rev = reverse(one, 0.5);
  REQUIRE(rev.dW(0, 0) == -one.dW(0, 0));

  REQUIRE_THROWS_AS(reverse(g, 1.234), std::invalid_argument);
}

TEST_CASE("reversed grids are stream backed") {
  // shifting a reversed grid equals reversing at a later index
  const NoiseGrid g = sample_noise_at(21, 0, 0.0, 0.125, 24, 1, 1);
  const NoiseGrid rev_late = sample_noise_reversed(21, 24, 0.0, 0.125, 16, 1, 1);
  const NoiseGrid rev_early = sample_noise_reversed(21, 16, 0.0, 0.125, 16, 1, 1);
  const NoiseGrid shifted = shift(rev_late, 8);
  REQUIRE(shifted.forward == rev_early.forward);
  REQUIRE(shifted.backward == rev_early.backward);
  // and the reversal of the materialized grid agrees with direct sampling
  const NoiseGrid rev_direct = reverse(g, g.t_end());
  const NoiseGrid rev_sampled = sample_noise_reversed(21, 24, 0.0, 0.125, 24, 1, 1);
  REQUIRE(rev_direct.forward == rev_sampled.forward);
  REQUIRE(rev_direct.backward == rev_sampled.backward);
}

TEST_CASE("backward integral basics") {
  const NoiseGrid g = sample_noise(13, 0.0, 0.1, 50, 1, kOneMode);
  std::vector<double> zeros(50, 0.0);
  REQUIRE(backward_integral(zeros, g, 1) == 0.0);

  std::vector<double> ones(50, 1.0);
  double total = 0.0;
  for (int k = 0; k < 50; ++k) total += g.dBhat(k, 0);
  REQUIRE_THAT(backward_integral(ones, g, 1), Catch::Matchers::WithinRel(total, 1e-14));

  std::vector<double> three(3, 1.0);
  REQUIRE_THROWS_AS(backward_integral(three, g, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(backward_integral(ones, g, 2), std::invalid_argument);
}

TEST_CASE("backward integral equals negated forward sum under reversal") {
  const int n = 40;
  const NoiseGrid g = sample_noise(17, 0.0, 0.05, n, 1, kOneMode);
  // arbitrary integrand sampled at right endpoints t_1..t_n
  std::vector<double> values(n);
  for (int k = 0; k < n; ++k) values[k] = std::sin(0.3 * (k + 1)) + 0.2 * (k + 1);

  const NoiseGrid rev = reverse(g, g.t_end());
  std::vector<double> reversed_values(n);
  for (int k = 0; k < n; ++k) reversed_values[k] = values[n - 1 - k];

  const double backward = backward_integral(values, g, 1);
  const double forward = forward_integral(reversed_values, rev, 1);
  REQUIRE_THAT(backward, Catch::Matchers::WithinRel(-forward, 1e-12));
}

TEST_CASE("normality of pooled increments") {
  const int n = 100000;
  const NoiseGrid g = sample_noise(2024, 0.0, 1.0, n, 1, kOneMode);
  double mean = 0.0;
  for (int k = 0; k < n; ++k) mean += g.dW(k, 0);
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double d = g.dW(k, 0) - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  const double jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  REQUIRE(jb < 13.8155);  // chi-squared(2) quantile at 1 - 1e-3
}

TEST_CASE("csv round trip") {
  const NoiseGrid g = sample_noise_at(77, -5, 0.5, 0.125, 12, 2, 3);
  const std::string path = (std::filesystem::temp_directory_path() / "bdsde_noise_rt.csv").string();
  save_noise_csv(g, path);
  const NoiseGrid back = load_noise_csv(path);
  REQUIRE(back.t0 == g.t0);
  REQUIRE(back.dt == g.dt);
  REQUIRE(back.steps == g.steps);
  REQUIRE(back.dim == g.dim);
  REQUIRE(back.modes == g.modes);
  REQUIRE(back.master_seed == g.master_seed);
  REQUIRE(back.origin_offset == g.origin_offset);
  REQUIRE(back.forward == g.forward);
  REQUIRE(back.backward == g.backward);
  std::filesystem::remove(path);
}
