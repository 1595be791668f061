#pragma once

#include <utility>

#include "smart/linalg.hpp"
#include "smart/stiefel.hpp"

namespace smart {

/// Full orthonormal bases obtained from the noisy source SVD plus a
/// deterministic completion, together with the truncation levels that
/// split each basis into an unpenalized head and a penalized complement.
struct SourceSpectralBasis {
  Matrix U_full;   // p x p orthogonal
  Matrix V_full;   // q x q orthogonal
  int r_u = 0;     // unpenalized left directions, in [0, p]
  int r_v = 0;     // unpenalized right directions, in [0, q]
  int r0_tilde = 0;  // numerical rank of the source matrix

  int p() const { return static_cast<int>(U_full.rows()); }
  int q() const { return static_cast<int>(V_full.rows()); }
  bool has_u_block() const { return r_u < p(); }
  bool has_v_block() const { return r_v < q(); }
  auto u_perp() const { return U_full.rightCols(p() - r_u); }
  auto v_perp() const { return V_full.rightCols(q() - r_v); }
};

SourceSpectralBasis build_source_basis(const Matrix& C0_tilde, int r_u, int r_v);

struct SmartFactors {
  Matrix U;  // p x r, orthonormal columns
  Vector D;  // r nonnegative values
  Matrix V;  // q x r, orthonormal columns

  Matrix coefficient() const { return U * D.asDiagonal() * V.transpose(); }
};

struct SolverConfig {
  double rho0 = 1.0;
  double gamma_rho = 1.05;  // penalty growth factor, > 1
  double rho_max = 1e8;
  int t_max = 500;
  double eps = 1e-4;  // tolerance for both primal and stationarity residuals
  RcgConfig inner;
};

struct AdmmState {
  SmartFactors factors;
  Matrix Omega_u, Omega_v;  // (p-r_u) x r and (q-r_v) x r; 0x r when absent
  Matrix Gamma_u, Gamma_v;  // dual matrices, same shapes
  double rho = 1.0;
  int t = 0;
};

/// Target data in Gram form: S = X^T X / n, T = X^T Y / n, and the fixed
/// part of the loss. Every block update and residual is a function of
/// these alone.
struct ProblemData {
  Matrix S;        // p x p
  Matrix T;        // p x q
  double y_sqnorm = 0.0;  // ||Y||_F^2
  int n = 0;
};

ProblemData make_problem_data(const Matrix& X, const Matrix& Y);

struct FitReport {
  SmartFactors factors;
  Matrix C_hat;
  Matrix Omega_u, Omega_v;
  double primal_residual = 0.0;
  double stationarity_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  int stall_count = 0;
};

double smart_objective(const Matrix& X, const Matrix& Y, const SmartFactors& factors,
                       const SourceSpectralBasis& basis, double lambda_u, double lambda_v);

Matrix u_update(const AdmmState& state, const ProblemData& data,
                const SourceSpectralBasis& basis, const RcgConfig& cfg, bool* stalled = nullptr);
Matrix v_update(const AdmmState& state, const ProblemData& data,
                const SourceSpectralBasis& basis, const RcgConfig& cfg, bool* stalled = nullptr);
Vector d_update(const AdmmState& state, const ProblemData& data,
                const SourceSpectralBasis& basis);
std::pair<Matrix, Matrix> omega_update(const AdmmState& state, const SourceSpectralBasis& basis,
                                       double lambda_u, double lambda_v);
std::pair<Matrix, Matrix> dual_update(const AdmmState& state, const SourceSpectralBasis& basis);

/// (primal, stationarity) residuals of the current state, evaluated with
/// the state's rho (i.e. before the penalty increase).
std::pair<double, double> residuals(const AdmmState& state, const ProblemData& data,
                                    const SourceSpectralBasis& basis);

FitReport smart_fit(const Matrix& X, const Matrix& Y, const SourceSpectralBasis& basis,
                    int r, double lambda_u, double lambda_v, const SmartFactors& init,
                    const SolverConfig& cfg);

/// Convenience overload building the source basis from the raw source matrix.
FitReport smart_fit(const Matrix& X, const Matrix& Y, const Matrix& C0_tilde,
                    int r, int r_u, int r_v, double lambda_u, double lambda_v,
                    const SmartFactors& init, const SolverConfig& cfg);

}  // namespace smart
