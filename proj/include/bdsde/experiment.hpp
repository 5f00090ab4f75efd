#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bdsde/benchmarks.hpp"
#include "bdsde/config.hpp"

namespace bdsde {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
  std::uint64_t config_hash = 0;
  std::string version = kVersion;
  double wall_seconds = 0.0;
  bool passed = false;
  std::vector<std::pair<std::string, std::string>> verdicts;
  std::vector<std::pair<std::string, std::uint64_t>> files;  // path -> content hash
};

/// Builds the benchmark named by the config and applies the constants and
/// problem-parameter overrides.
Benchmark build_benchmark(const ExperimentConfig& config);

/// Executes the configured study, writes its CSV/JSON outputs and the
/// manifest under config.output_dir, and reports the per-study verdicts.
/// Solver failures propagate as exceptions after the residual trace is
/// persisted.
RunManifest run(const ExperimentConfig& config);

/// run() wrapped for the command line: exit status 0 iff every asserted
/// criterion of the study passed.
int run_cli(const ExperimentConfig& config);

}  // namespace bdsde
