#pragma once

#include <functional>

#include "smart/linalg.hpp"

namespace smart {

/// Smooth cost on the Stiefel manifold {M : M^T M = I_r}, given by its
/// value and Euclidean gradient.
struct SmoothCost {
  std::function<double(const Matrix&)> eval;
  std::function<Matrix(const Matrix&)> egrad;
};

struct RcgConfig {
  int max_iters = 200;
  double grad_tol = 1e-7;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
};

struct RcgResult {
  Matrix point;
  double grad_norm = 0.0;
  int iters = 0;
  bool stalled = false;
};

/// Projection onto the tangent space at M (embedded metric):
/// G - M sym(M^T G).
Matrix tangent_project(const Matrix& M, const Matrix& G);

/// QR retraction: orthonormal factor of M + xi with positive-diagonal R.
Matrix retract(const Matrix& M, const Matrix& xi);

/// Polak-Ribiere+ Riemannian conjugate gradient with projection-based
/// vector transport, Armijo backtracking, and automatic restart to
/// steepest descent. Stops at grad_tol or max_iters; a failed line
/// search marks the result stalled instead of throwing.
RcgResult minimize(const SmoothCost& cost, const Matrix& init, const RcgConfig& cfg);

}  // namespace smart
