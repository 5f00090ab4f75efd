#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bdsde/bdsde_finite.hpp"
#include "bdsde/weighted_space.hpp"

namespace bdsde {

/// FNV-1a over the raw bytes; used for config and output-inventory hashes.
std::uint64_t fnv1a(const std::string& bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Minimal CSV writer: header row then numeric rows at full precision.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Snapshot export: columns x_1..x_d then value (or value_1..value_d).
void write_snapshot_csv(const std::string& path, const FieldSnapshot& field,
                        const SpatialGrid& grid);

/// One CSV per exported time slice plus a manifest listing times and files.
std::vector<std::string> export_field_path(const FieldPath& path, const SpatialGrid& grid,
                                           const std::string& dir, const std::string& stem,
                                           int stride);

std::string format_double(double v);

}  // namespace bdsde
