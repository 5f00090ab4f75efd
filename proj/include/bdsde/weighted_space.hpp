#pragma once

#include <span>
#include <vector>

#include "bdsde/common.hpp"

namespace bdsde {

struct FlowEnsemble;  // forward_sde.hpp

/// Polynomial weight (1+|x|)^q with q > 3; fields are measured against the
/// inverse weight so that polynomially growing data stays integrable.
struct WeightSpec {
  double q = 4.0;
  void validate() const;
};

double rho(const WeightSpec& weight, const Vec& x, int dim);

/// Quadrature value of |x|^p (1+|x|)^(-q) over [-R,R] plus an analytic bound
/// on the neglected tail (1-d). Finite exactly when p < q - 1.
struct MomentCheck {
  bool finite = false;
  double truncated_value = 0.0;
  double tail_bound = 0.0;
};
MomentCheck weight_moment_check(const WeightSpec& weight, double p, double radius);

/// Tensor grid over [-R,R]^d with trapezoid quadrature weights, stored both
/// plain and with the inverse weight folded in. Interpolation is multilinear
/// with clamping to the boundary.
struct SpatialGrid {
  int dim = 1;
  double radius = 1.0;
  int nodes_per_axis = 3;
  WeightSpec weight;
  std::vector<double> axis;     // nodes_per_axis coordinates
  std::vector<Vec> nodes;       // node_count() points, x-major ordering
  std::vector<double> w_plain;  // trapezoid weights
  std::vector<double> w_rho;    // w_plain * rho^{-1}(node)

  int node_count() const { return static_cast<int>(nodes.size()); }
  double spacing() const { return axis.size() > 1 ? axis[1] - axis[0] : 2.0 * radius; }
  double rho_mass() const;  // sum of w_rho

  static SpatialGrid tensor(int dim, double radius, int nodes_per_axis, WeightSpec weight);
};

/// Nodal values of one field at one time; width 1 for scalar fields, d for
/// vector fields. Values are node-major.
struct FieldSnapshot {
  int width = 1;
  std::vector<double> values;

  static FieldSnapshot zeros(int node_count, int width = 1) {
    return FieldSnapshot{width, std::vector<double>(static_cast<std::size_t>(node_count) * width, 0.0)};
  }
  static FieldSnapshot constant(int node_count, double value) {
    return FieldSnapshot{1, std::vector<double>(static_cast<std::size_t>(node_count), value)};
  }
  double at(int node, int comp = 0) const { return values[static_cast<std::size_t>(node) * width + comp]; }
  double& at(int node, int comp = 0) { return values[static_cast<std::size_t>(node) * width + comp]; }
};

/// sum_i |values_i|^2 w_rho,i  — the squared weighted L2 norm.
double weighted_norm_sq(const FieldSnapshot& field, const SpatialGrid& grid);

/// Same sum against the plain trapezoid weights (no inverse weight); used by
/// the compactly supported weak-form integrals.
double plain_norm_sq(const FieldSnapshot& field, const SpatialGrid& grid);

enum class PathNormKind { kSup, kIntegral };

/// sup_k e^{-K t_k} |phi_k|^2  or  trapezoid_k e^{-K t_k} |phi_k|^2 dt over
/// one realized path of snapshots.
double discounted_path_norm(std::span<const FieldSnapshot> path, std::span<const double> times,
                            const SpatialGrid& grid, double discount, PathNormKind kind);

/// Multilinear interpolation of component `comp`; points outside the domain
/// are clamped to the boundary.
double interpolate(const FieldSnapshot& field, const SpatialGrid& grid, const Vec& x, int comp = 0);
Vec interpolate_vec(const FieldSnapshot& field, const SpatialGrid& grid, const Vec& x);

/// Monte-Carlo/quadrature estimate of
///   E int |phi(X_s^{t,x})| rho^{-1} dx  /  int |phi(x)| rho^{-1} dx
/// at the ensemble's step index. Throws on a vanishing denominator.
double equivalence_ratio(const FieldSnapshot& phi, const FlowEnsemble& flow, int step_index,
                         const SpatialGrid& grid);

}  // namespace bdsde
