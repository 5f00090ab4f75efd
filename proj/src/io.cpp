#include "bdsde/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bdsde {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  write_text_file(path, out.str());
}

void write_snapshot_csv(const std::string& path, const FieldSnapshot& field,
                        const SpatialGrid& grid) {
  std::vector<std::string> header;
  for (int i = 0; i < grid.dim; ++i) header.push_back("x_" + std::to_string(i + 1));
  if (field.width == 1) {
    header.push_back("value");
  } else {
    for (int c = 0; c < field.width; ++c) header.push_back("value_" + std::to_string(c + 1));
  }
  std::vector<std::vector<double>> rows;
  rows.reserve(grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i) {
    std::vector<double> row;
    for (int d = 0; d < grid.dim; ++d) row.push_back(grid.nodes[i][d]);
    for (int c = 0; c < field.width; ++c) row.push_back(field.at(i, c));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

std::vector<std::string> export_field_path(const FieldPath& path, const SpatialGrid& grid,
                                           const std::string& dir, const std::string& stem,
                                           int stride) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  if (stride <= 0) stride = std::max(1, path.steps() / 16);
  std::vector<std::string> files;
  std::ostringstream manifest;
  manifest << "slice,time,y_file,z_file\n";
  int slice = 0;
  for (int k = 0; k <= path.steps(); k += stride) {
    const std::string y_file = stem + "_y_" + std::to_string(slice) + ".csv";
    const std::string z_file = stem + "_z_" + std::to_string(slice) + ".csv";
    write_snapshot_csv(dir + "/" + y_file, path.Y[k], grid);
    write_snapshot_csv(dir + "/" + z_file, path.Z[k], grid);
    manifest << slice << ',' << format_double(path.times[k]) << ',' << y_file << ',' << z_file
             << '\n';
    files.push_back(dir + "/" + y_file);
    files.push_back(dir + "/" + z_file);
    ++slice;
  }
  const std::string manifest_path = dir + "/" + stem + "_slices.csv";
  write_text_file(manifest_path, manifest.str());
  files.push_back(manifest_path);
  return files;
}

}  // namespace bdsde
