#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bdsde {

/// Flat key = value configuration with dotted sections. Unknown keys and
/// inadmissible combinations are collected, not thrown one at a time.
struct ExperimentConfig {
  std::string study;
  std::string driver = "ou";
  std::map<std::string, double> problem;  // driver parameters by name

  // constants overrides (negative = keep the benchmark's derived value)
  double K = -1.0;
  double p = -1.0;
  double q = -1.0;
  double C = -1.0;
  double mu = -1.0;
  double L = -1.0;
  std::vector<double> Cj;      // empty = keep
  std::vector<double> alphaj;  // empty = keep

  // discretization
  double dt = 1.0 / 64.0;
  double horizon = 4.0;
  std::vector<double> horizons;
  double relax = 4.0;
  int inner_samples = 4;
  int modes = 0;  // 0 = benchmark default

  // spatial grid
  int dim = 1;
  double radius = 4.0;
  int nodes = 33;

  std::uint64_t master_seed = 1;
  int seed_count = 16;

  double tol = 1e-9;
  int max_iter = 60;
  bool override_conditions = false;
  int threads = 0;
  int export_stride = 0;  // 0 = pick so that at most ~17 slices are written

  std::string output_dir = "out";

  /// Canonical text used for the config hash.
  std::string canonical() const;
};

struct ParseResult {
  ExperimentConfig config;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ParseResult parse_config_text(const std::string& text);
ParseResult parse_config(const std::string& path);

std::vector<std::string> known_studies();

}  // namespace bdsde
