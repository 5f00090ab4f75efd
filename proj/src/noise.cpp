#include "bdsde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bdsde/common.hpp"

namespace bdsde {

double NoiseSpectrum::trace() const {
  double s = 0.0;
  for (double l : lambdas) s += l;
  return s;
}

void NoiseSpectrum::validate() const {
  if (lambdas.empty()) throw std::invalid_argument("NoiseSpectrum: at least one mode required");
  double prev = lambdas.front();
  for (double l : lambdas) {
    if (!(l > 0.0)) throw std::invalid_argument("NoiseSpectrum: eigenvalues must be positive");
    if (l > prev + 1e-15) throw std::invalid_argument("NoiseSpectrum: eigenvalues must be non-increasing");
    prev = l;
  }
}

NoiseSpectrum NoiseSpectrum::power_law(int count, double exponent) {
  NoiseSpectrum s;
  s.lambdas.resize(count);
  for (int j = 0; j < count; ++j) s.lambdas[j] = std::pow(static_cast<double>(j + 1), -exponent);
  s.validate();
  return s;
}

NoiseSpectrum NoiseSpectrum::flat(int count, double value) {
  NoiseSpectrum s;
  s.lambdas.assign(count, value);
  s.validate();
  return s;
}

namespace {

// Raw N(0,1) cell of the two-sided master stream, component c at stream
// index g; a reversed grid reads the mirrored index with flipped sign.
double stream_cell(std::uint64_t seed, int direction, std::int64_t g, int component) {
  const CounterStream grid_stream(seed, StreamTag::kGrid);
  if (direction > 0) return grid_stream.normal(g, static_cast<std::uint32_t>(component));
  return -grid_stream.normal(-g - 1, static_cast<std::uint32_t>(component));
}

void fill_increments(NoiseGrid& grid) {
  const double root_dt = std::sqrt(grid.dt);
  grid.forward.assign(static_cast<std::size_t>(grid.steps) * grid.dim, 0.0);
  grid.backward.assign(static_cast<std::size_t>(grid.steps) * grid.modes, 0.0);
  parallel_for(grid.steps, [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k) {
      const std::int64_t g = grid.origin_offset + k;
      for (int i = 0; i < grid.dim; ++i)
        grid.forward[static_cast<std::size_t>(k) * grid.dim + i] =
            root_dt * stream_cell(grid.master_seed, grid.direction, g, i);
      for (int j = 0; j < grid.modes; ++j)
        grid.backward[static_cast<std::size_t>(k) * grid.modes + j] =
            root_dt * stream_cell(grid.master_seed, grid.direction, g, grid.dim + j);
    }
  });
}

void check_shape(double dt, int steps, int dim, int modes) {
  if (!(dt > 0.0)) throw std::invalid_argument("noise grid: dt must be positive");
  if (steps < 0) throw std::invalid_argument("noise grid: negative step count");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("noise grid: dim must be 1 or 2");
  if (modes < 1) throw std::invalid_argument("noise grid: at least one backward mode required");
}

}  // namespace

NoiseGrid sample_noise_at(std::uint64_t seed, std::int64_t origin_offset, double t0, double dt,
                          int steps, int dim, int modes) {
  check_shape(dt, steps, dim, modes);
  NoiseGrid grid;
  grid.t0 = t0;
  grid.dt = dt;
  grid.steps = steps;
  grid.dim = dim;
  grid.modes = modes;
  grid.master_seed = seed;
  grid.origin_offset = origin_offset;
  grid.direction = +1;
  fill_increments(grid);
  return grid;
}

NoiseGrid sample_noise(std::uint64_t seed, double t0, double dt, int steps, int dim,
                       const NoiseSpectrum& spectrum) {
  spectrum.validate();
  return sample_noise_at(seed, 0, t0, dt, steps, dim, spectrum.modes());
}

NoiseGrid sample_noise_reversed(std::uint64_t seed, std::int64_t reversal_index, double t0,
                                double dt, int steps, int dim, int modes) {
  check_shape(dt, steps, dim, modes);
  NoiseGrid grid;
  grid.t0 = t0;
  grid.dt = dt;
  grid.steps = steps;
  grid.dim = dim;
  grid.modes = modes;
  grid.master_seed = seed;
  grid.origin_offset = -reversal_index;
  grid.direction = -1;
  fill_increments(grid);
  return grid;
}

NoiseGrid shift(const NoiseGrid& grid, std::int64_t r_steps) {
  if (r_steps < 0) throw std::invalid_argument("shift: r_steps must be nonnegative");
  NoiseGrid out = grid;
  out.origin_offset += r_steps;
  if (r_steps == 0) return out;
  // Reuse the overlap, regenerate the part that ran off the stored range.
  const int keep = static_cast<int>(std::max<std::int64_t>(0, grid.steps - r_steps));
  const double root_dt = std::sqrt(grid.dt);
  for (int k = 0; k < keep; ++k) {
    const int src = k + static_cast<int>(r_steps);
    for (int i = 0; i < grid.dim; ++i)
      out.forward[static_cast<std::size_t>(k) * grid.dim + i] = grid.dW(src, i);
    for (int j = 0; j < grid.modes; ++j)
      out.backward[static_cast<std::size_t>(k) * grid.modes + j] = grid.dBhat(src, j);
  }
  for (int k = keep; k < grid.steps; ++k) {
    const std::int64_t g = out.origin_offset + k;
    for (int i = 0; i < grid.dim; ++i)
      out.forward[static_cast<std::size_t>(k) * grid.dim + i] =
          root_dt * stream_cell(grid.master_seed, grid.direction, g, i);
    for (int j = 0; j < grid.modes; ++j)
      out.backward[static_cast<std::size_t>(k) * grid.modes + j] =
          root_dt * stream_cell(grid.master_seed, grid.direction, g, grid.dim + j);
  }
  return out;
}

NoiseGrid reverse(const NoiseGrid& grid, double T) {
  const double t_end = grid.t_end();
  if (std::abs(T - t_end) > 1e-9 * std::max(1.0, std::abs(t_end)))
    throw std::invalid_argument("reverse: T must equal the right end of the grid");
  NoiseGrid out = grid;
  out.direction = -grid.direction;
  out.origin_offset = -(grid.origin_offset + grid.steps);
  for (int k = 0; k < grid.steps; ++k) {
    const int src = grid.steps - 1 - k;
    for (int i = 0; i < grid.dim; ++i)
      out.forward[static_cast<std::size_t>(k) * grid.dim + i] = -grid.dW(src, i);
    for (int j = 0; j < grid.modes; ++j)
      out.backward[static_cast<std::size_t>(k) * grid.modes + j] = -grid.dBhat(src, j);
  }
  return out;
}

NoiseGrid first_steps(const NoiseGrid& grid, int steps) {
  if (steps < 0 || steps > grid.steps) throw std::invalid_argument("first_steps: step count out of range");
  NoiseGrid out = grid;
  out.steps = steps;
  out.forward.assign(grid.forward.begin(),
                     grid.forward.begin() + static_cast<std::size_t>(steps) * grid.dim);
  out.backward.assign(grid.backward.begin(),
                      grid.backward.begin() + static_cast<std::size_t>(steps) * grid.modes);
  return out;
}

double backward_integral(std::span<const double> values, const NoiseGrid& grid, int mode) {
  if (static_cast<int>(values.size()) != grid.steps)
    throw std::invalid_argument("backward_integral: need one value per step");
  if (mode < 1 || mode > grid.modes) throw std::invalid_argument("backward_integral: mode out of range");
  double s = 0.0;
  for (int k = 0; k < grid.steps; ++k) s += values[k] * grid.dBhat(k, mode - 1);
  return s;
}

double forward_integral(std::span<const double> values, const NoiseGrid& grid, int mode) {
  if (static_cast<int>(values.size()) != grid.steps)
    throw std::invalid_argument("forward_integral: need one value per step");
  if (mode < 1 || mode > grid.modes) throw std::invalid_argument("forward_integral: mode out of range");
  double s = 0.0;
  for (int k = 0; k < grid.steps; ++k) s += values[k] * grid.dBhat(k, mode - 1);
  return s;
}

void save_noise_csv(const NoiseGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_noise_csv: cannot open " + path);
  char buf[64];
  out << "t0,dt,steps,dim,modes,seed,offset,direction\n";
  std::snprintf(buf, sizeof buf, "%.17g", grid.t0);
  out << buf << ',';
  std::snprintf(buf, sizeof buf, "%.17g", grid.dt);
  out << buf << ',' << grid.steps << ',' << grid.dim << ',' << grid.modes << ','
      << grid.master_seed << ',' << grid.origin_offset << ',' << grid.direction << '\n';
  for (int k = 0; k < grid.steps; ++k) {
    for (int i = 0; i < grid.dim; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", grid.dW(k, i));
      out << (i ? "," : "") << buf;
    }
    for (int j = 0; j < grid.modes; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", grid.dBhat(k, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

NoiseGrid load_noise_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_noise_csv: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header names
  std::getline(in, line);
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream hdr(line);
  NoiseGrid grid;
  hdr >> grid.t0 >> grid.dt >> grid.steps >> grid.dim >> grid.modes >> grid.master_seed >>
      grid.origin_offset >> grid.direction;
  if (!hdr) throw std::runtime_error("load_noise_csv: malformed header in " + path);
  grid.forward.assign(static_cast<std::size_t>(grid.steps) * grid.dim, 0.0);
  grid.backward.assign(static_cast<std::size_t>(grid.steps) * grid.modes, 0.0);
  for (int k = 0; k < grid.steps; ++k) {
    if (!std::getline(in, line)) throw std::runtime_error("load_noise_csv: truncated file " + path);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    for (int i = 0; i < grid.dim; ++i) row >> grid.forward[static_cast<std::size_t>(k) * grid.dim + i];
    for (int j = 0; j < grid.modes; ++j) row >> grid.backward[static_cast<std::size_t>(k) * grid.modes + j];
    if (!row) throw std::runtime_error("load_noise_csv: malformed row in " + path);
  }
  return grid;
}

}  // namespace bdsde
