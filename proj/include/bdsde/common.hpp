#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdsde {

// States live in R^d with d <= kMaxDim; unused components stay zero.
inline constexpr int kMaxDim = 2;

using Vec = std::array<double, kMaxDim>;
using Mat = std::array<std::array<double, kMaxDim>, kMaxDim>;

inline Vec zero_vec() { return Vec{0.0, 0.0}; }

inline Mat zero_mat() { return Mat{{{0.0, 0.0}, {0.0, 0.0}}}; }

inline Mat identity_mat() { return Mat{{{1.0, 0.0}, {0.0, 1.0}}}; }

inline Vec make_vec(double x0, double x1 = 0.0) { return Vec{x0, x1}; }

inline double dot(const Vec& a, const Vec& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a, int dim) { return dot(a, a, dim); }

inline double norm(const Vec& a, int dim) { return std::sqrt(norm_sq(a, dim)); }

inline Vec add(const Vec& a, const Vec& b, int dim) {
  Vec r = zero_vec();
  for (int i = 0; i < dim; ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b, int dim) {
  Vec r = zero_vec();
  for (int i = 0; i < dim; ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scale(const Vec& a, double c, int dim) {
  Vec r = zero_vec();
  for (int i = 0; i < dim; ++i) r[i] = c * a[i];
  return r;
}

// y = A x
inline Vec mat_vec(const Mat& m, const Vec& x, int dim) {
  Vec r = zero_vec();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r[i] += m[i][j] * x[j];
  return r;
}

// y = A^T x
inline Vec mat_t_vec(const Mat& m, const Vec& x, int dim) {
  Vec r = zero_vec();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r[i] += m[j][i] * x[j];
  return r;
}

// a = sigma sigma^T
inline Mat sigma_sq(const Mat& sigma, int dim) {
  Mat a = zero_mat();
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) a[i][j] += sigma[i][k] * sigma[j][k];
  return a;
}

inline bool all_finite(const Vec& a, int dim) {
  for (int i = 0; i < dim; ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}

/// Thrown when an iterative solve exhausts its iteration budget; carries the
/// residual history observed so far.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> residual_history)
      : std::runtime_error(what), residuals(std::move(residual_history)) {}
  std::vector<double> residuals;
};

// Worker cap shared by all parallel loops (set from the CLI --threads flag).
void set_max_threads(int n);
int max_threads();

// Runs fn(begin, end) over chunks of [0, n). Chunks are disjoint, so results
// are deterministic for per-index writes regardless of the schedule.
void parallel_for(int n, const std::function<void(int, int)>& fn);

}  // namespace bdsde
