#include "smart/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace smart {

namespace {

Matrix empty_block(int r) { return Matrix(0, r); }

// B_u^{(t)} = Uperp Gamma_u D - T V D - rho Uperp Omega_u D
Matrix assemble_Bu(const AdmmState& s, const ProblemData& data, const SourceSpectralBasis& basis) {
  const auto D = s.factors.D.asDiagonal();
  Matrix B = -(data.T * (s.factors.V * D));
  if (basis.has_u_block()) {
    B.noalias() += basis.u_perp() * ((s.Gamma_u - s.rho * s.Omega_u) * D);
  }
  return B;
}

Matrix assemble_Bv(const AdmmState& s, const ProblemData& data, const SourceSpectralBasis& basis) {
  const auto D = s.factors.D.asDiagonal();
  Matrix B = -(data.T.transpose() * (s.factors.U * D));
  if (basis.has_v_block()) {
    B.noalias() += basis.v_perp() * ((s.Gamma_v - s.rho * s.Omega_v) * D);
  }
  return B;
}

}  // namespace

ProblemData make_problem_data(const Matrix& X, const Matrix& Y) {
  if (X.rows() != Y.rows()) {
    throw std::invalid_argument("X and Y must have the same number of rows");
  }
  ProblemData d;
  d.n = static_cast<int>(X.rows());
  d.S = (X.transpose() * X) / static_cast<double>(d.n);
  d.T = (X.transpose() * Y) / static_cast<double>(d.n);
  d.y_sqnorm = Y.squaredNorm();
  return d;
}

SourceSpectralBasis build_source_basis(const Matrix& C0_tilde, int r_u, int r_v) {
  const int p = static_cast<int>(C0_tilde.rows());
  const int q = static_cast<int>(C0_tilde.cols());
  if (r_u < 0 || r_u > p || r_v < 0 || r_v > q) {
    throw std::invalid_argument("build_source_basis: truncation level out of range");
  }
  SvdTriple dec = svd(C0_tilde);
  int r0 = 0;
  const double d1 = dec.d.size() > 0 ? dec.d(0) : 0.0;
  for (Eigen::Index k = 0; k < dec.d.size(); ++k) {
    if (dec.d(k) > 1e-10 * d1) ++r0;
  }
  SourceSpectralBasis b;
  b.r_u = r_u;
  b.r_v = r_v;
  b.r0_tilde = r0;
  Matrix Usig = dec.U.leftCols(r0);
  Matrix Vsig = dec.V.leftCols(r0);
  b.U_full.resize(p, p);
  b.U_full << Usig, complete_basis(Usig);
  b.V_full.resize(q, q);
  b.V_full << Vsig, complete_basis(Vsig);
  return b;
}

double smart_objective(const Matrix& X, const Matrix& Y, const SmartFactors& factors,
                       const SourceSpectralBasis& basis, double lambda_u, double lambda_v) {
  const double n = static_cast<double>(X.rows());
  Matrix C = factors.coefficient();
  double obj = (Y - X * C).squaredNorm() / (2.0 * n);
  const auto D = factors.D.asDiagonal();
  if (basis.has_u_block()) {
    obj += lambda_u * (basis.u_perp().transpose() * factors.U * D).cwiseAbs().sum();
  }
  if (basis.has_v_block()) {
    obj += lambda_v * (basis.v_perp().transpose() * factors.V * D).cwiseAbs().sum();
  }
  return obj;
}

Matrix u_update(const AdmmState& state, const ProblemData& data,
                const SourceSpectralBasis& basis, const RcgConfig& cfg, bool* stalled) {
  const Matrix Bu = assemble_Bu(state, data, basis);
  const Vector d2 = state.factors.D.array().square();
  const double rho = state.rho;
  const bool pen = basis.has_u_block();

  SmoothCost cost;
  cost.eval = [&](const Matrix& U) {
    Matrix UD = U * state.factors.D.asDiagonal();
    double f = 0.5 * (UD.transpose() * (data.S * UD)).trace();
    if (pen) f += 0.5 * rho * (basis.u_perp().transpose() * UD).squaredNorm();
    f += (U.array() * Bu.array()).sum();
    return f;
  };
  cost.egrad = [&](const Matrix& U) {
    Matrix G = data.S * U * d2.asDiagonal();
    if (pen) {
      G.noalias() += rho * (basis.u_perp() * ((basis.u_perp().transpose() * U) * d2.asDiagonal()));
    }
    return Matrix(G + Bu);
  };

  RcgResult res = minimize(cost, state.factors.U, cfg);
  if (stalled) *stalled = res.stalled;
  return res.point;
}

Matrix v_update(const AdmmState& state, const ProblemData& data,
                const SourceSpectralBasis& basis, const RcgConfig& cfg, bool* stalled) {
  const Matrix Bv = assemble_Bv(state, data, basis);
  const Vector d2 = state.factors.D.array().square();
  const double rho = state.rho;
  const bool pen = basis.has_v_block();

  SmoothCost cost;
  cost.eval = [&](const Matrix& V) {
    double f = (V.array() * Bv.array()).sum();
    if (pen) {
      f += 0.5 * rho * (basis.v_perp().transpose() * V * state.factors.D.asDiagonal()).squaredNorm();
    }
    return f;
  };
  cost.egrad = [&](const Matrix& V) {
    Matrix G = Bv;
    if (pen) {
      G.noalias() += rho * (basis.v_perp() * ((basis.v_perp().transpose() * V) * d2.asDiagonal()));
    }
    return G;
  };

  RcgResult res = minimize(cost, state.factors.V, cfg);
  if (stalled) *stalled = res.stalled;
  return res.point;
}

Vector d_update(const AdmmState& state, const ProblemData& data,
                const SourceSpectralBasis& basis) {
  const int r = static_cast<int>(state.factors.D.size());
  const Matrix& U = state.factors.U;
  const Matrix& V = state.factors.V;
  const double rho = state.rho;

  Matrix Au, Av, Wu, Wv;
  if (basis.has_u_block()) {
    Au = basis.u_perp().transpose() * U;
    Wu = state.Omega_u - state.Gamma_u / rho;
  }
  if (basis.has_v_block()) {
    Av = basis.v_perp().transpose() * V;
    Wv = state.Omega_v - state.Gamma_v / rho;
  }

  Vector d(r);
  for (int k = 0; k < r; ++k) {
    const double alpha = U.col(k).dot(data.S * U.col(k));
    const double beta = U.col(k).dot(data.T * V.col(k));
    double c = alpha;
    double b = beta;
    if (basis.has_u_block()) {
      c += rho * Au.col(k).squaredNorm();
      b += rho * Au.col(k).dot(Wu.col(k));
    }
    if (basis.has_v_block()) {
      c += rho * Av.col(k).squaredNorm();
      b += rho * Av.col(k).dot(Wv.col(k));
    }
    d(k) = c > 0.0 ? std::max(0.0, b / c) : 0.0;
  }
  return d;
}

std::pair<Matrix, Matrix> omega_update(const AdmmState& state, const SourceSpectralBasis& basis,
                                       double lambda_u, double lambda_v) {
  const int r = static_cast<int>(state.factors.D.size());
  const auto D = state.factors.D.asDiagonal();
  Matrix Ou = empty_block(r), Ov = empty_block(r);
  if (basis.has_u_block()) {
    Matrix M = basis.u_perp().transpose() * state.factors.U * D + state.Gamma_u / state.rho;
    Ou = soft_threshold(M, lambda_u / state.rho);
  }
  if (basis.has_v_block()) {
    Matrix M = basis.v_perp().transpose() * state.factors.V * D + state.Gamma_v / state.rho;
    Ov = soft_threshold(M, lambda_v / state.rho);
  }
  return {Ou, Ov};
}

std::pair<Matrix, Matrix> dual_update(const AdmmState& state, const SourceSpectralBasis& basis) {
  const int r = static_cast<int>(state.factors.D.size());
  const auto D = state.factors.D.asDiagonal();
  Matrix Gu = empty_block(r), Gv = empty_block(r);
  if (basis.has_u_block()) {
    Gu = state.Gamma_u +
         state.rho * (basis.u_perp().transpose() * state.factors.U * D - state.Omega_u);
  }
  if (basis.has_v_block()) {
    Gv = state.Gamma_v +
         state.rho * (basis.v_perp().transpose() * state.factors.V * D - state.Omega_v);
  }
  return {Gu, Gv};
}

std::pair<double, double> residuals(const AdmmState& state, const ProblemData& data,
                                    const SourceSpectralBasis& basis) {
  const int p = basis.p();
  const int q = basis.q();
  const int r = static_cast<int>(state.factors.D.size());
  const auto D = state.factors.D.asDiagonal();
  const Vector d2 = state.factors.D.array().square();
  const double rho = state.rho;

  double eta_u = 0.0, eta_v = 0.0;
  if (basis.has_u_block()) {
    Matrix R = basis.u_perp().transpose() * state.factors.U * D - state.Omega_u;
    eta_u = R.norm() / std::sqrt(static_cast<double>(p - basis.r_u) * r);
  }
  if (basis.has_v_block()) {
    Matrix R = basis.v_perp().transpose() * state.factors.V * D - state.Omega_v;
    eta_v = R.norm() / std::sqrt(static_cast<double>(q - basis.r_v) * r);
  }
  const double primal = 0.5 * eta_u + 0.5 * eta_v;

  // Euclidean gradients of the current U- and V-block objectives
  Matrix Gu = data.S * state.factors.U * d2.asDiagonal() - data.T * state.factors.V * D;
  if (basis.has_u_block()) {
    Gu.noalias() += basis.u_perp() *
                    ((state.Gamma_u + rho * (basis.u_perp().transpose() * state.factors.U * D -
                                             state.Omega_u)) *
                     D);
  }
  Matrix UtSU = state.factors.U.transpose() * data.S * state.factors.U;
  Matrix Gv = state.factors.V * (D * UtSU * D) - data.T.transpose() * state.factors.U * D;
  if (basis.has_v_block()) {
    Gv.noalias() += basis.v_perp() *
                    ((state.Gamma_v + rho * (basis.v_perp().transpose() * state.factors.V * D -
                                             state.Omega_v)) *
                     D);
  }
  const double stat_u = tangent_project(state.factors.U, Gu).norm() /
                        std::sqrt(static_cast<double>(p) * r);
  const double stat_v = tangent_project(state.factors.V, Gv).norm() /
                        std::sqrt(static_cast<double>(q) * r);
  return {primal, 0.5 * stat_u + 0.5 * stat_v};
}

FitReport smart_fit(const Matrix& X, const Matrix& Y, const SourceSpectralBasis& basis,
                    int r, double lambda_u, double lambda_v, const SmartFactors& init,
                    const SolverConfig& cfg) {
  const int p = basis.p();
  const int q = basis.q();
  if (X.cols() != p || Y.cols() != q || X.rows() != Y.rows()) {
    throw std::invalid_argument("smart_fit: dimension mismatch between X, Y, and basis");
  }
  if (r < 1 || r > std::min(p, q)) {
    throw std::invalid_argument("smart_fit: rank out of range");
  }
  if (init.U.rows() != p || init.U.cols() != r || init.V.rows() != q || init.V.cols() != r ||
      init.D.size() != r) {
    throw std::invalid_argument("smart_fit: initializer shape mismatch");
  }
  if (lambda_u < 0.0 || lambda_v < 0.0) {
    throw std::invalid_argument("smart_fit: negative penalty");
  }

  const ProblemData data = make_problem_data(X, Y);

  AdmmState s;
  s.factors = init;
  s.rho = cfg.rho0;
  s.t = 0;
  {
    const auto D = s.factors.D.asDiagonal();
    if (basis.has_u_block()) {
      s.Omega_u = basis.u_perp().transpose() * s.factors.U * D;
      s.Gamma_u = Matrix::Zero(p - basis.r_u, r);
    } else {
      s.Omega_u = empty_block(r);
      s.Gamma_u = empty_block(r);
    }
    if (basis.has_v_block()) {
      s.Omega_v = basis.v_perp().transpose() * s.factors.V * D;
      s.Gamma_v = Matrix::Zero(q - basis.r_v, r);
    } else {
      s.Omega_v = empty_block(r);
      s.Gamma_v = empty_block(r);
    }
  }

  FitReport rep;
  rep.stall_count = 0;
  bool converged = false;
  double primal = 0.0, stat = 0.0;
  int t = 0;
  for (; t < cfg.t_max; ++t) {
    bool stu = false, stv = false;
    s.factors.U = u_update(s, data, basis, cfg.inner, &stu);
    s.factors.V = v_update(s, data, basis, cfg.inner, &stv);
    if (stu) ++rep.stall_count;
    if (stv) ++rep.stall_count;
    s.factors.D = d_update(s, data, basis);
    auto [Ou, Ov] = omega_update(s, basis, lambda_u, lambda_v);
    s.Omega_u = std::move(Ou);
    s.Omega_v = std::move(Ov);
    auto [Gu, Gv] = dual_update(s, basis);
    s.Gamma_u = std::move(Gu);
    s.Gamma_v = std::move(Gv);

    std::tie(primal, stat) = residuals(s, data, basis);
    if (primal <= cfg.eps && stat <= cfg.eps) {
      // the primal/stationarity pair is blind to a D block that is still
      // moving (it can contract geometrically toward a zero signal while
      // U/V stay stationary), so also require D to be a fixed point of its
      // own update at the current multipliers
      Vector d_next = d_update(s, data, basis);
      const double d_scale = s.factors.D.lpNorm<Eigen::Infinity>();
      if (d_scale <= 1e-10 ||
          (d_next - s.factors.D).lpNorm<Eigen::Infinity>() <= cfg.eps * d_scale) {
        converged = true;
        ++t;
        break;
      }
    }
    // grow the penalty only while primal feasibility is unresolved; growing
    // it unconditionally freezes a still-contracting D at a spurious value
    if (primal > cfg.eps) {
      s.rho = std::min(s.rho * cfg.gamma_rho, cfg.rho_max);
    }
    s.t = t + 1;
  }

  // report columns sorted by descending D, ties broken by original index
  std::vector<int> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return s.factors.D(a) > s.factors.D(b); });
  SmartFactors sorted;
  sorted.U.resize(p, r);
  sorted.V.resize(q, r);
  sorted.D.resize(r);
  Matrix Ou_sorted(s.Omega_u.rows(), r), Ov_sorted(s.Omega_v.rows(), r);
  for (int k = 0; k < r; ++k) {
    sorted.U.col(k) = s.factors.U.col(order[k]);
    sorted.V.col(k) = s.factors.V.col(order[k]);
    sorted.D(k) = s.factors.D(order[k]);
    if (s.Omega_u.rows() > 0) Ou_sorted.col(k) = s.Omega_u.col(order[k]);
    if (s.Omega_v.rows() > 0) Ov_sorted.col(k) = s.Omega_v.col(order[k]);
  }

  rep.factors = std::move(sorted);
  rep.C_hat = rep.factors.coefficient();
  rep.Omega_u = std::move(Ou_sorted);
  rep.Omega_v = std::move(Ov_sorted);
  rep.primal_residual = primal;
  rep.stationarity_residual = stat;
  rep.iterations = t;
  rep.converged = converged;
  rep.objective = smart_objective(X, Y, rep.factors, basis, lambda_u, lambda_v);
  return rep;
}

FitReport smart_fit(const Matrix& X, const Matrix& Y, const Matrix& C0_tilde,
                    int r, int r_u, int r_v, double lambda_u, double lambda_v,
                    const SmartFactors& init, const SolverConfig& cfg) {
  return smart_fit(X, Y, build_source_basis(C0_tilde, r_u, r_v), r, lambda_u, lambda_v, init, cfg);
}

}  // namespace smart
