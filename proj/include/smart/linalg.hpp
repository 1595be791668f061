#pragma once

#include <Eigen/Dense>

namespace smart {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin SVD with a fixed sign convention: within each left singular
/// vector, the entry of largest absolute value is positive (ties broken
/// by lowest row index). Singular values are sorted descending.
struct SvdTriple {
  Matrix U;
  Vector d;
  Matrix V;
};

SvdTriple svd(const Matrix& A);

/// Orthonormal factor Q of A = QR with the sign fixed so that the
/// diagonal of R is positive. Throws on rank deficiency.
Matrix qr_orthonormalize(const Matrix& A);

/// Deterministic orthonormal complement of U0 (p x k, orthonormal
/// columns): Gram-Schmidt over the standard basis e_1, ..., e_p in index
/// order, accepting a vector when its residual norm exceeds accept_tol.
/// Returns a p x (p-k) matrix so that [U0 | result] is orthogonal.
Matrix complete_basis(const Matrix& U0, double accept_tol = 1e-8);

double soft_threshold(double a, double kappa);
Matrix soft_threshold(const Matrix& A, double kappa);

/// Throws std::invalid_argument if A contains NaN/Inf.
void check_finite(const Matrix& A, const char* name);

}  // namespace smart
