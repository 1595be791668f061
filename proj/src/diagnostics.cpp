#include "smart/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "smart/solver.hpp"

namespace smart {

int alignment_count(const Matrix& U_star, const Matrix& U_full, int r_u, double tol) {
  const int p = static_cast<int>(U_full.rows());
  if (r_u < 0 || r_u > p) throw std::invalid_argument("alignment_count: r_u out of range");
  if (r_u == p) return 0;
  Matrix P = U_star.transpose() * U_full.rightCols(p - r_u);
  int c = 0;
  for (Eigen::Index i = 0; i < P.size(); ++i) {
    if (std::abs(P.data()[i]) > tol) ++c;
  }
  return c;
}

int min_truncation(const Matrix& U_star, const Matrix& U_full, double tol) {
  const int p = static_cast<int>(U_full.rows());
  const double bound = tol * std::sqrt(static_cast<double>(U_star.cols()));
  for (int r_u = 0; r_u <= p; ++r_u) {
    Matrix head = U_full.leftCols(r_u);
    double resid = (U_star - head * (head.transpose() * U_star)).norm();
    if (resid <= bound) return r_u;
  }
  return p;
}

double conditioning_factor(const Vector& d_star, double tau) {
  if (tau <= 0.0 || tau >= 1.0) throw std::invalid_argument("conditioning_factor: tau in (0,1)");
  double acc = 0.0;
  for (Eigen::Index j = 0; j < d_star.size(); ++j) {
    const double ratio = d_star(0) / d_star(j);
    acc += ratio * ratio;
  }
  return 1.0 + std::sqrt(acc) / tau;
}

SourceErrorTerms source_error_terms(const Matrix& C0_clean, const Matrix& C0_tilde,
                                    int r, int r_u, int r_v, int r_u_star, int r_v_star,
                                    int s_u, int s_v, double d1_source) {
  SourceErrorTerms out;
  out.eps0 = svd(C0_tilde - C0_clean).d.maxCoeff();
  const double e0 = out.eps0;
  const int p = static_cast<int>(C0_clean.rows());
  const int q = static_cast<int>(C0_clean.cols());

  const double head = std::max(
      0.0, static_cast<double>(r) * (std::max(r_u_star - r_u, 0) + std::max(r_v_star - r_v, 0)) -
               static_cast<double>(s_u + s_v));
  const double amp = e0 * (2.0 * d1_source + e0);
  const double tail = std::sqrt(static_cast<double>(r)) *
                      std::sqrt(std::pow(static_cast<double>(r_u_star), 0.25) *
                                    std::sqrt(static_cast<double>(p - std::max(r_u_star, r_u))) +
                                std::pow(static_cast<double>(r_v_star), 0.25) *
                                    std::sqrt(static_cast<double>(q - std::max(r_v_star, r_v))));
  out.eps_source = std::sqrt(head) * std::sqrt(amp) + tail * std::pow(amp, 0.25);
  return out;
}

SpectralDiagnostics compute_diagnostics(const Matrix& U_star, const Matrix& V_star,
                                        const Vector& d_star, const Matrix& C0_clean,
                                        const Matrix& C0_tilde, int r_u, int r_v, double tau) {
  SourceSpectralBasis basis = build_source_basis(C0_clean, 0, 0);
  const int p = basis.p();
  const int q = basis.q();

  SpectralDiagnostics d;
  d.s_u_table.resize(p + 1);
  d.s_v_table.resize(q + 1);
  for (int k = 0; k <= p; ++k) d.s_u_table[k] = alignment_count(U_star, basis.U_full, k);
  for (int k = 0; k <= q; ++k) d.s_v_table[k] = alignment_count(V_star, basis.V_full, k);
  d.r_u_star = min_truncation(U_star, basis.U_full);
  d.r_v_star = min_truncation(V_star, basis.V_full);
  d.eta_r = conditioning_factor(d_star, tau);

  const double d1_source = svd(C0_clean).d.maxCoeff();
  const int r = static_cast<int>(d_star.size());
  SourceErrorTerms terms = source_error_terms(
      C0_clean, C0_tilde, r, r_u, r_v, d.r_u_star, d.r_v_star,
      d.s_u_table[std::min(r_u, p)], d.s_v_table[std::min(r_v, q)], d1_source);
  d.eps0 = terms.eps0;
  d.eps_source = terms.eps_source;
  return d;
}

}  // namespace smart
