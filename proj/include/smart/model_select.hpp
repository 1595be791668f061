#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "smart/initializers.hpp"
#include "smart/solver.hpp"

namespace smart {

struct SelectionGrid {
  std::vector<double> lambda_u_grid;
  std::vector<double> lambda_v_grid;
  std::vector<std::pair<int, int>> truncation_pairs;  // (r_u, r_v) candidates
  int k_folds = 5;
  uint64_t seed = 0;
};

/// BIC of a fitted model:
///   nq log(||Y - X C_hat||_F^2 / nq) + (|Omega_u|_0 + |Omega_v|_0) log(nq),
/// counting entries above 1e-8 in absolute value.
double bic_score(const FitReport& fit, const Matrix& X, const Matrix& Y);

struct LambdaChoice {
  double lambda_u = 0.0;
  double lambda_v = 0.0;
  FitReport fit;
};

/// Fits every (lambda_u, lambda_v) pair, warm-starting along the grid,
/// and returns the BIC minimizer. Ties go to the larger lambda_u +
/// lambda_v, then to grid order.
LambdaChoice select_lambdas(const Matrix& X, const Matrix& Y, const SourceSpectralBasis& basis,
                            int r, const std::vector<double>& lambda_u_grid,
                            const std::vector<double>& lambda_v_grid, const SmartFactors& init,
                            const SolverConfig& cfg);

/// Self-tuning rank selection: threshold the singular values of the
/// projected response PY at mu = 2 S (sqrt(q) + sqrt(rank X)).
int select_rank(const Matrix& X, const Matrix& Y);

/// K-fold cross-validation over truncation pairs; per fold, lambdas are
/// re-selected by BIC on the training split. Ties go to the smaller
/// r_u + r_v, then to grid order.
std::pair<int, int> cv_select_truncation(const Matrix& X, const Matrix& Y,
                                         const Matrix& C0_tilde, int r,
                                         const SelectionGrid& grid, const SolverConfig& cfg);

/// Data-driven default penalty grids, scaled around the noise level of a
/// ridge prefit.
std::vector<double> default_lambda_grid(const Matrix& X, const Matrix& Y, int r, bool left_side);

/// Deterministic fold assignment: shuffle rows by seed, split contiguously.
/// Returns fold index per row.
std::vector<int> fold_assignment(int n, int k_folds, uint64_t seed);

}  // namespace smart
