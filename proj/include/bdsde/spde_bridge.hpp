#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bdsde/bdsde_finite.hpp"

namespace bdsde {

/// Smooth compactly supported test function with analytic time derivative and
/// gradient. The built-in family is a smooth bump in space times an affine
/// factor in time.
struct TestFunction {
  Vec center = zero_vec();
  double support_radius = 1.0;
  std::function<double(double s, const Vec& x)> psi;
  std::function<double(double s, const Vec& x)> dpsi_ds;
  std::function<Vec(double s, const Vec& x)> grad_psi;

  /// psi(s,x) = (time_a + time_b s) * exp(-1 / (1 - |x-c|^2 / r^2)) inside the
  /// support ball, 0 outside.
  static TestFunction bump(int dim, const Vec& center, double radius, double time_a = 1.0,
                           double time_b = 0.0);
};

/// Diagonal snapshots u(t_i, .) from per-time solves sharing one master
/// stream; diagonal_solve(t) must return the field on [t, t + relax].
std::vector<FieldSnapshot> extract_u(const std::function<FieldPath(double)>& diagonal_solve,
                                     std::span<const double> t_values);

/// Slices of one backward sweep at the requested times. For drivers without
/// explicit time dependence the sweep field at time t coincides with the
/// solve restarted at t, so slicing and per-time solving agree.
std::vector<FieldSnapshot> diagonal_slices(const FieldPath& sweep, std::span<const double> t_values);

/// v(t_i, .) = u(T - t_i, .) computed under time-reversed noise;
/// diagonal_solve must already be bound to the reversed stream.
std::vector<FieldSnapshot> extract_v(const std::function<FieldPath(double)>& diagonal_solve,
                                     double T, std::span<const double> t_values);

struct GradientCheck {
  std::vector<FieldSnapshot> sigma_grad;  // Z slices relabeled
  std::vector<FieldSnapshot> finite_difference;
  double discrepancy = 0.0;  // time-RMS relative weighted-norm gap
};

/// Identifies the gradient field two ways: the solver's Z slices and
/// sigma^T times the central-difference gradient of the Y field.
GradientCheck sigma_grad_u(const FieldPath& solution, const ForwardCoefficients& coeffs,
                           const SpatialGrid& grid);

/// Residual of the test-function identity over [t, T]: time-derivative and
/// boundary pairings minus the gradient, transport and drift terms, plus the
/// right-endpoint backward sum of the mode pairings. Deterministic integrands
/// use trapezoid rules on the solution grid.
double weak_form_residual(const FieldPath& solution, const TestFunction& psi,
                          const DriverSpec& driver, const ForwardCoefficients& coeffs,
                          const SpatialGrid& grid, const NoiseGrid& noise, double t, double T);

/// Quadrature defect of the identity
///   int L phi1 phi2 + 1/2 int (sigma^T grad phi1)(sigma^T grad phi2)
///     + int phi1 div((b - tilde_A) phi2)  =  0
/// for smooth compactly supported fields; O(h^2) on the tensor grid.
double integration_by_parts_defect(const std::function<double(const Vec&)>& phi1,
                                   const std::function<double(const Vec&)>& phi2,
                                   const ForwardCoefficients& coeffs, const SpatialGrid& grid);

}  // namespace bdsde
