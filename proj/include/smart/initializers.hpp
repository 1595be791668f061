#pragma once

#include "smart/solver.hpp"

namespace smart {

/// Columnwise Lasso via cyclic coordinate descent on the Gram system.
/// Objective per column: (1/2n)||y_j - X b||^2 + lambda0 |b|_1.
/// If the descent does not converge within cd_max_pass passes the best
/// iterate is returned and *stalled (when given) is set.
Matrix lasso_fit(const Matrix& X, const Matrix& Y, double lambda0,
                 double cd_tol = 1e-8, int cd_max_pass = 10000, bool* stalled = nullptr);

/// C = (X^T X + n lambda0 I)^{-1} X^T Y.
Matrix ridge_fit(const Matrix& X, const Matrix& Y, double lambda0);

/// Minimum-norm least-squares solution via the SVD pseudoinverse.
Matrix ols_fit(const Matrix& X, const Matrix& Y);

/// Top-r SVD factors of a warm-start estimate.
SmartFactors warm_start(const Matrix& C_init, int r);

/// Plug-in penalty sigma_hat * sqrt(2 log(pq) / n), with sigma_hat the
/// 1.4826-scaled median absolute residual of a ridge prefit.
double default_lasso_lambda(const Matrix& X, const Matrix& Y);

}  // namespace smart
