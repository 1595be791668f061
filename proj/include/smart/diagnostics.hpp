#pragma once

#include <utility>
#include <vector>

#include "smart/linalg.hpp"

namespace smart {

/// Count of entries of U_star^T Uperp(r_u) above tol in absolute value,
/// where Uperp(r_u) drops the first r_u columns of the full source basis.
int alignment_count(const Matrix& U_star, const Matrix& U_full, int r_u, double tol = 1e-8);

/// Smallest r_u such that col(U_star) lies in the span of the first r_u
/// source basis columns (projection residual <= tol * sqrt(r)).
int min_truncation(const Matrix& U_star, const Matrix& U_full, double tol = 1e-8);

/// 1 + (1/tau) sqrt(sum_j (d1/dj)^2) over the leading r values.
double conditioning_factor(const Vector& d_star, double tau);

struct SourceErrorTerms {
  double eps0 = 0.0;        // spectral norm of the source perturbation
  double eps_source = 0.0;  // assembled approximation-error bound term
};

SourceErrorTerms source_error_terms(const Matrix& C0_clean, const Matrix& C0_tilde,
                                    int r, int r_u, int r_v, int r_u_star, int r_v_star,
                                    int s_u, int s_v, double d1_source);

struct SpectralDiagnostics {
  std::vector<int> s_u_table, s_v_table;  // alignment counts over 0..p / 0..q
  int r_u_star = 0, r_v_star = 0;
  double eta_r = 0.0;
  double eps0 = 0.0;
  double eps_source = 0.0;
};

/// Full diagnostic report from simulation ground truth. r_u/r_v are the
/// truncation levels the eps_source term is evaluated at.
SpectralDiagnostics compute_diagnostics(const Matrix& U_star, const Matrix& V_star,
                                        const Vector& d_star, const Matrix& C0_clean,
                                        const Matrix& C0_tilde, int r_u, int r_v,
                                        double tau = 0.5);

}  // namespace smart
