#include "bdsde/spde_bridge.hpp"

#include <cmath>
#include <stdexcept>

namespace bdsde {

TestFunction TestFunction::bump(int dim, const Vec& center, double radius, double time_a,
                                double time_b) {
  if (!(radius > 0.0)) throw std::invalid_argument("TestFunction::bump: radius must be positive");
  TestFunction tf;
  tf.center = center;
  tf.support_radius = radius;
  const double r_sq = radius * radius;
  auto shape = [center, r_sq, dim](const Vec& x) {
    const double xi = norm_sq(sub(x, center, dim), dim) / r_sq;
    if (xi >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - xi));
  };
  tf.psi = [shape, time_a, time_b](double s, const Vec& x) { return (time_a + time_b * s) * shape(x); };
  tf.dpsi_ds = [shape, time_b](double, const Vec& x) { return time_b * shape(x); };
  tf.grad_psi = [shape, center, r_sq, dim, time_a, time_b](double s, const Vec& x) {
    Vec g = zero_vec();
    const Vec delta = sub(x, center, dim);
    const double xi = norm_sq(delta, dim) / r_sq;
    if (xi >= 1.0) return g;
    const double one_minus = 1.0 - xi;
    const double factor = -(time_a + time_b * s) * shape(x) / (one_minus * one_minus) * 2.0 / r_sq;
    for (int i = 0; i < dim; ++i) g[i] = factor * delta[i];
    return g;
  };
  return tf;
}

std::vector<FieldSnapshot> extract_u(const std::function<FieldPath(double)>& diagonal_solve,
                                     std::span<const double> t_values) {
  std::vector<FieldSnapshot> out;
  out.reserve(t_values.size());
  for (double t : t_values) {
    FieldPath path = diagonal_solve(t);
    if (std::abs(path.t0() - t) > 1e-9)
      throw std::invalid_argument("extract_u: diagonal solve does not start at t");
    out.push_back(std::move(path.Y.front()));
  }
  return out;
}

std::vector<FieldSnapshot> diagonal_slices(const FieldPath& sweep, std::span<const double> t_values) {
  std::vector<FieldSnapshot> out;
  out.reserve(t_values.size());
  for (double t : t_values) out.push_back(sweep.Y[sweep.time_index(t)]);
  return out;
}

std::vector<FieldSnapshot> extract_v(const std::function<FieldPath(double)>& diagonal_solve,
                                     double T, std::span<const double> t_values) {
  std::vector<double> flipped;
  flipped.reserve(t_values.size());
  for (double t : t_values) {
    if (t < -1e-12 || t > T + 1e-12) throw std::invalid_argument("extract_v: t outside [0, T]");
    flipped.push_back(T - t);
  }
  return extract_u(diagonal_solve, flipped);
}

namespace {

// Central-difference gradient of a scalar nodal field, one-sided at the
// domain boundary.
FieldSnapshot grid_gradient(const FieldSnapshot& field, const SpatialGrid& grid) {
  FieldSnapshot out = FieldSnapshot::zeros(grid.node_count(), grid.dim);
  const int n = grid.nodes_per_axis;
  const double h = grid.spacing();
  auto value = [&](int ix, int iy) {
    return grid.dim == 1 ? field.at(ix) : field.at(ix * n + iy);
  };
  auto diff = [&](int i, int n_axis, auto&& get) {
    if (i == 0) return (get(1) - get(0)) / h;
    if (i == n_axis - 1) return (get(n_axis - 1) - get(n_axis - 2)) / h;
    return (get(i + 1) - get(i - 1)) / (2.0 * h);
  };
  for (int ix = 0; ix < n; ++ix) {
    if (grid.dim == 1) {
      out.at(ix, 0) = diff(ix, n, [&](int i) { return value(i, 0); });
    } else {
      for (int iy = 0; iy < n; ++iy) {
        const int node = ix * n + iy;
        out.at(node, 0) = diff(ix, n, [&](int i) { return value(i, iy); });
        out.at(node, 1) = diff(iy, n, [&](int i) { return value(ix, i); });
      }
    }
  }
  return out;
}

}  // namespace

GradientCheck sigma_grad_u(const FieldPath& solution, const ForwardCoefficients& coeffs,
                           const SpatialGrid& grid) {
  GradientCheck check;
  check.sigma_grad = solution.Z;
  check.finite_difference.reserve(solution.Y.size());
  double num = 0.0, den = 0.0;
  const int last = solution.steps();
  for (int k = 0; k <= last; ++k) {
    const FieldSnapshot grad = grid_gradient(solution.Y[k], grid);
    FieldSnapshot fd = FieldSnapshot::zeros(grid.node_count(), grid.dim);
    for (int i = 0; i < grid.node_count(); ++i) {
      const Mat s = coeffs.sigma(grid.nodes[i]);
      Vec g = zero_vec();
      for (int c = 0; c < grid.dim; ++c) g[c] = grad.at(i, c);
      const Vec sg = mat_t_vec(s, g, grid.dim);
      for (int c = 0; c < grid.dim; ++c) fd.at(i, c) = sg[c];
    }
    // The terminal slice carries Z = 0 by convention; skip it in the score.
    if (k < last) {
      double diff = 0.0, ref = 0.0;
      for (int i = 0; i < grid.node_count(); ++i)
        for (int c = 0; c < grid.dim; ++c) {
          const double e = solution.Z[k].at(i, c) - fd.at(i, c);
          diff += e * e * grid.w_rho[i];
          ref += fd.at(i, c) * fd.at(i, c) * grid.w_rho[i];
        }
      num += diff;
      den += ref;
    }
    check.finite_difference.push_back(std::move(fd));
  }
  check.discrepancy = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  return check;
}

namespace {

// div((b - tilde_A) psi)(s, x) expanded as (b - tilde_A) . grad_psi
// + psi * div(b - tilde_A); the field divergence by central differences.
double transport_divergence(const TestFunction& psi, const ForwardCoefficients& coeffs, double s,
                            const Vec& x, int dim) {
  const Vec flow = sub(coeffs.b(x), tilde_A(coeffs, x), dim);
  const Vec grad = psi.grad_psi(s, x);
  double acc = dot(flow, grad, dim);
  double div = 0.0;
  const double h = 1e-4 * (1.0 + norm(x, dim));
  for (int i = 0; i < dim; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const Vec fp = sub(coeffs.b(xp), tilde_A(coeffs, xp), dim);
    const Vec fm = sub(coeffs.b(xm), tilde_A(coeffs, xm), dim);
    div += (fp[i] - fm[i]) / (2.0 * h);
  }
  return acc + psi.psi(s, x) * div;
}

}  // namespace

double weak_form_residual(const FieldPath& solution, const TestFunction& psi,
                          const DriverSpec& driver, const ForwardCoefficients& coeffs,
                          const SpatialGrid& grid, const NoiseGrid& noise, double t, double T) {
  if (norm(psi.center, grid.dim) + psi.support_radius > grid.radius + 1e-12)
    throw std::invalid_argument("weak_form_residual: test-function support exceeds the domain");
  const int kt = solution.time_index(t);
  const int kT = solution.time_index(T);
  if (kt >= kT) throw std::invalid_argument("weak_form_residual: need t < T on the grid");
  const double dt = solution.dt();
  const int dim = grid.dim;
  const int n_nodes = grid.node_count();

  // Spatial pairings at one time index, all against the plain measure.
  auto pair_du = [&](int k) {
    double acc = 0.0;
    const double s = solution.times[k];
    for (int i = 0; i < n_nodes; ++i)
      acc += solution.Y[k].at(i) * psi.dpsi_ds(s, grid.nodes[i]) * grid.w_plain[i];
    return acc;
  };
  auto pair_boundary = [&](int k) {
    double acc = 0.0;
    const double s = solution.times[k];
    for (int i = 0; i < n_nodes; ++i)
      acc += solution.Y[k].at(i) * psi.psi(s, grid.nodes[i]) * grid.w_plain[i];
    return acc;
  };
  auto pair_gradient = [&](int k) {
    double acc = 0.0;
    const double s = solution.times[k];
    for (int i = 0; i < n_nodes; ++i) {
      Vec z = zero_vec();
      for (int c = 0; c < dim; ++c) z[c] = solution.Z[k].at(i, c);
      const Vec spsi = mat_t_vec(coeffs.sigma(grid.nodes[i]), psi.grad_psi(s, grid.nodes[i]), dim);
      acc += dot(z, spsi, dim) * grid.w_plain[i];
    }
    return acc;
  };
  auto pair_transport = [&](int k) {
    double acc = 0.0;
    const double s = solution.times[k];
    for (int i = 0; i < n_nodes; ++i)
      acc += solution.Y[k].at(i) * transport_divergence(psi, coeffs, s, grid.nodes[i], dim) *
             grid.w_plain[i];
    return acc;
  };
  auto pair_drift = [&](int k) {
    double acc = 0.0;
    const double s = solution.times[k];
    for (int i = 0; i < n_nodes; ++i) {
      Vec z = zero_vec();
      for (int c = 0; c < dim; ++c) z[c] = solution.Z[k].at(i, c);
      acc += driver.eval_f(s, grid.nodes[i], solution.Y[k].at(i), z) *
             psi.psi(s, grid.nodes[i]) * grid.w_plain[i];
    }
    return acc;
  };

  auto trapezoid = [&](auto&& integrand) {
    double acc = 0.0;
    for (int k = kt; k <= kT; ++k) {
      const double w = (k == kt || k == kT) ? 0.5 : 1.0;
      acc += w * integrand(k) * dt;
    }
    return acc;
  };

  const double term_du = trapezoid(pair_du);
  const double term_left = pair_boundary(kt);
  const double term_right = pair_boundary(kT);
  const double term_grad = 0.5 * trapezoid(pair_gradient);
  const double term_transport = trapezoid(pair_transport);
  const double term_drift = trapezoid(pair_drift);

  // Right-endpoint backward sums of the mode pairings.
  double term_modes = 0.0;
  for (int j = 0; j < driver.modes; ++j) {
    for (int k = kt; k < kT; ++k) {
      const double s_right = solution.times[k + 1];
      double pairing = 0.0;
      for (int i = 0; i < n_nodes; ++i) {
        Vec z = zero_vec();
        for (int c = 0; c < dim; ++c) z[c] = solution.Z[k + 1].at(i, c);
        pairing += driver.eval_g(j, s_right, grid.nodes[i], solution.Y[k + 1].at(i), z) *
                   psi.psi(s_right, grid.nodes[i]) * grid.w_plain[i];
      }
      term_modes += pairing * noise.dBhat(k, j);
    }
  }

  return term_du + term_left - term_right - term_grad - term_transport - term_drift + term_modes;
}

double integration_by_parts_defect(const std::function<double(const Vec&)>& phi1,
                                   const std::function<double(const Vec&)>& phi2,
                                   const ForwardCoefficients& coeffs, const SpatialGrid& grid) {
  const int dim = grid.dim;
  const double fd = 1e-5;
  auto gradient = [&](const std::function<double(const Vec&)>& f, const Vec& x) {
    Vec g = zero_vec();
    for (int i = 0; i < dim; ++i) {
      Vec xp = x, xm = x;
      xp[i] += fd;
      xm[i] -= fd;
      g[i] = (f(xp) - f(xm)) / (2.0 * fd);
    }
    return g;
  };
  auto hessian_entry = [&](const std::function<double(const Vec&)>& f, const Vec& x, int i, int j) {
    if (i == j) {
      Vec xp = x, xm = x;
      xp[i] += fd;
      xm[i] -= fd;
      return (f(xp) - 2.0 * f(x) + f(xm)) / (fd * fd);
    }
    Vec xpp = x, xpm = x, xmp = x, xmm = x;
    xpp[i] += fd;
    xpp[j] += fd;
    xpm[i] += fd;
    xpm[j] -= fd;
    xmp[i] -= fd;
    xmp[j] += fd;
    xmm[i] -= fd;
    xmm[j] -= fd;
    return (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * fd * fd);
  };

  double acc = 0.0;
  for (int n = 0; n < grid.node_count(); ++n) {
    const Vec& x = grid.nodes[n];
    const Mat a = sigma_sq(coeffs.sigma(x), dim);
    double generator = 0.0;
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) generator += 0.5 * a[i][j] * hessian_entry(phi1, x, i, j);
    }
    generator += dot(coeffs.b(x), gradient(phi1, x), dim);

    const Vec sg1 = mat_t_vec(coeffs.sigma(x), gradient(phi1, x), dim);
    const Vec sg2 = mat_t_vec(coeffs.sigma(x), gradient(phi2, x), dim);

    const Vec flow = sub(coeffs.b(x), tilde_A(coeffs, x), dim);
    double div_term = dot(flow, gradient(phi2, x), dim);
    double div_flow = 0.0;
    const double h = 1e-4 * (1.0 + norm(x, dim));
    for (int i = 0; i < dim; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      div_flow += (sub(coeffs.b(xp), tilde_A(coeffs, xp), dim)[i] -
                   sub(coeffs.b(xm), tilde_A(coeffs, xm), dim)[i]) /
                  (2.0 * h);
    }
    div_term += phi2(x) * div_flow;

    acc += (generator * phi2(x) + 0.5 * dot(sg1, sg2, dim) + phi1(x) * div_term) * grid.w_plain[n];
  }
  return std::abs(acc);
}

}  // namespace bdsde
