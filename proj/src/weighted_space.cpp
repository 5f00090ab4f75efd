#include "bdsde/weighted_space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bdsde/forward_sde.hpp"

namespace bdsde {

void WeightSpec::validate() const {
  if (!(q > 3.0)) throw std::invalid_argument("WeightSpec: q must exceed 3");
}

double rho(const WeightSpec& weight, const Vec& x, int dim) {
  return std::pow(1.0 + norm(x, dim), weight.q);
}

MomentCheck weight_moment_check(const WeightSpec& weight, double p, double radius) {
  weight.validate();
  MomentCheck res;
  res.finite = p < weight.q - 1.0;
  const int n = 20001;
  const double h = 2.0 * radius / (n - 1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -radius + i * h;
    const double v = std::pow(std::abs(x), p) * std::pow(1.0 + std::abs(x), -weight.q);
    acc += (i == 0 || i == n - 1) ? 0.5 * v : v;
  }
  res.truncated_value = acc * h;
  // |x|^p <= (1+|x|)^p, so the two-sided tail is bounded by the closed form.
  if (res.finite)
    res.tail_bound = 2.0 * std::pow(1.0 + radius, p - weight.q + 1.0) / (weight.q - 1.0 - p);
  return res;
}

SpatialGrid SpatialGrid::tensor(int dim, double radius, int nodes_per_axis, WeightSpec weight) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("SpatialGrid: dim must be 1 or 2");
  if (nodes_per_axis < 2) throw std::invalid_argument("SpatialGrid: need at least 2 nodes per axis");
  if (!(radius > 0.0)) throw std::invalid_argument("SpatialGrid: radius must be positive");
  weight.validate();

  SpatialGrid grid;
  grid.dim = dim;
  grid.radius = radius;
  grid.nodes_per_axis = nodes_per_axis;
  grid.weight = weight;
  grid.axis.resize(nodes_per_axis);
  const double h = 2.0 * radius / (nodes_per_axis - 1);
  for (int i = 0; i < nodes_per_axis; ++i) grid.axis[i] = -radius + i * h;

  auto axis_weight = [&](int i) { return (i == 0 || i == nodes_per_axis - 1) ? 0.5 * h : h; };

  if (dim == 1) {
    grid.nodes.resize(nodes_per_axis);
    grid.w_plain.resize(nodes_per_axis);
    for (int i = 0; i < nodes_per_axis; ++i) {
      grid.nodes[i] = make_vec(grid.axis[i]);
      grid.w_plain[i] = axis_weight(i);
    }
  } else {
    grid.nodes.resize(static_cast<std::size_t>(nodes_per_axis) * nodes_per_axis);
    grid.w_plain.resize(grid.nodes.size());
    for (int ix = 0; ix < nodes_per_axis; ++ix)
      for (int iy = 0; iy < nodes_per_axis; ++iy) {
        const int idx = ix * nodes_per_axis + iy;
        grid.nodes[idx] = make_vec(grid.axis[ix], grid.axis[iy]);
        grid.w_plain[idx] = axis_weight(ix) * axis_weight(iy);
      }
  }
  grid.w_rho.resize(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i)
    grid.w_rho[i] = grid.w_plain[i] / rho(weight, grid.nodes[i], dim);
  return grid;
}

double SpatialGrid::rho_mass() const {
  double s = 0.0;
  for (double w : w_rho) s += w;
  return s;
}

namespace {

double snapshot_sum(const FieldSnapshot& field, const SpatialGrid& grid,
                    const std::vector<double>& weights) {
  if (static_cast<int>(field.values.size()) != grid.node_count() * field.width)
    throw std::invalid_argument("field does not match the grid");
  double s = 0.0;
  for (int i = 0; i < grid.node_count(); ++i) {
    double mag_sq = 0.0;
    for (int c = 0; c < field.width; ++c) {
      const double v = field.at(i, c);
      mag_sq += v * v;
    }
    s += mag_sq * weights[i];
  }
  return s;
}

}  // namespace

double weighted_norm_sq(const FieldSnapshot& field, const SpatialGrid& grid) {
  return snapshot_sum(field, grid, grid.w_rho);
}

double plain_norm_sq(const FieldSnapshot& field, const SpatialGrid& grid) {
  return snapshot_sum(field, grid, grid.w_plain);
}

double discounted_path_norm(std::span<const FieldSnapshot> path, std::span<const double> times,
                            const SpatialGrid& grid, double discount, PathNormKind kind) {
  if (path.empty() || path.size() != times.size())
    throw std::invalid_argument("discounted_path_norm: path/times mismatch or empty path");
  if (kind == PathNormKind::kSup) {
    double best = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k)
      best = std::max(best, std::exp(-discount * times[k]) * weighted_norm_sq(path[k], grid));
    return best;
  }
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const double dt = times[k + 1] - times[k];
    const double a = std::exp(-discount * times[k]) * weighted_norm_sq(path[k], grid);
    const double b = std::exp(-discount * times[k + 1]) * weighted_norm_sq(path[k + 1], grid);
    acc += 0.5 * (a + b) * dt;
  }
  return acc;
}

namespace {

// Clamped cell lookup along one axis: index of the left node plus fraction.
inline void locate(const std::vector<double>& axis, double x, int& i0, double& frac) {
  const int n = static_cast<int>(axis.size());
  if (x <= axis.front()) {
    i0 = 0;
    frac = 0.0;
    return;
  }
  if (x >= axis.back()) {
    i0 = n - 2;
    frac = 1.0;
    return;
  }
  const double h = axis[1] - axis[0];
  i0 = std::min(n - 2, static_cast<int>((x - axis.front()) / h));
  frac = (x - axis[i0]) / h;
}

}  // namespace

double interpolate(const FieldSnapshot& field, const SpatialGrid& grid, const Vec& x, int comp) {
  if (grid.dim == 1) {
    int i0;
    double u;
    locate(grid.axis, x[0], i0, u);
    return (1.0 - u) * field.at(i0, comp) + u * field.at(i0 + 1, comp);
  }
  int ix, iy;
  double u, v;
  locate(grid.axis, x[0], ix, u);
  locate(grid.axis, x[1], iy, v);
  const int n = grid.nodes_per_axis;
  const double f00 = field.at(ix * n + iy, comp);
  const double f01 = field.at(ix * n + iy + 1, comp);
  const double f10 = field.at((ix + 1) * n + iy, comp);
  const double f11 = field.at((ix + 1) * n + iy + 1, comp);
  return (1.0 - u) * ((1.0 - v) * f00 + v * f01) + u * ((1.0 - v) * f10 + v * f11);
}

Vec interpolate_vec(const FieldSnapshot& field, const SpatialGrid& grid, const Vec& x) {
  Vec out = zero_vec();
  for (int c = 0; c < field.width; ++c) out[c] = interpolate(field, grid, x, c);
  return out;
}

double equivalence_ratio(const FieldSnapshot& phi, const FlowEnsemble& flow, int step_index,
                         const SpatialGrid& grid) {
  if (step_index < 0 || step_index > flow.steps())
    throw std::invalid_argument("equivalence_ratio: step index out of range");
  if (static_cast<int>(flow.starts.size()) != grid.node_count())
    throw std::invalid_argument("equivalence_ratio: ensemble must start from the grid nodes");
  double den = 0.0;
  for (int i = 0; i < grid.node_count(); ++i) den += std::abs(phi.at(i)) * grid.w_rho[i];
  if (!(den > 0.0)) throw std::invalid_argument("equivalence_ratio: degenerate field (zero mass)");
  double num = 0.0;
  for (int i = 0; i < grid.node_count(); ++i) {
    double avg = 0.0;
    for (int s = 0; s < flow.samples; ++s)
      avg += std::abs(interpolate(phi, grid, flow.state(i, s, step_index)));
    num += (avg / flow.samples) * grid.w_rho[i];
  }
  return num / den;
}

}  // namespace bdsde
