#include "smart/initializers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace smart {

Matrix lasso_fit(const Matrix& X, const Matrix& Y, double lambda0,
                 double cd_tol, int cd_max_pass, bool* stalled) {
  if (lambda0 < 0.0) throw std::invalid_argument("lasso_fit: negative penalty");
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const int q = static_cast<int>(Y.cols());
  const Matrix S = (X.transpose() * X) / static_cast<double>(n);
  const Matrix T = (X.transpose() * Y) / static_cast<double>(n);

  Matrix C = Matrix::Zero(p, q);
  bool any_stall = false;
  for (int j = 0; j < q; ++j) {
    Vector beta = Vector::Zero(p);
    Vector grad = T.col(j);  // (1/n) X^T (y - X beta), maintained incrementally
    bool done = false;
    for (int pass = 0; pass < cd_max_pass && !done; ++pass) {
      double max_change = 0.0;
      for (int k = 0; k < p; ++k) {
        const double skk = S(k, k);
        if (skk <= 0.0) continue;
        const double zk = grad(k) + skk * beta(k);
        const double bnew = soft_threshold(zk, lambda0) / skk;
        const double delta = bnew - beta(k);
        if (delta != 0.0) {
          grad -= delta * S.col(k);
          beta(k) = bnew;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      done = max_change <= cd_tol;
    }
    if (!done) any_stall = true;
    C.col(j) = beta;
  }
  if (stalled) *stalled = any_stall;
  return C;
}

Matrix ridge_fit(const Matrix& X, const Matrix& Y, double lambda0) {
  if (lambda0 <= 0.0) throw std::invalid_argument("ridge_fit: penalty must be positive");
  const double n = static_cast<double>(X.rows());
  const int p = static_cast<int>(X.cols());
  Matrix A = X.transpose() * X + n * lambda0 * Matrix::Identity(p, p);
  return A.llt().solve(X.transpose() * Y);
}

Matrix ols_fit(const Matrix& X, const Matrix& Y) {
  SvdTriple dec = svd(X);
  const double cutoff = 1e-10 * (dec.d.size() > 0 ? dec.d(0) : 0.0);
  Vector dinv = dec.d.unaryExpr([cutoff](double s) { return s > cutoff ? 1.0 / s : 0.0; });
  return dec.V * dinv.asDiagonal() * (dec.U.transpose() * Y);
}

SmartFactors warm_start(const Matrix& C_init, int r) {
  const int p = static_cast<int>(C_init.rows());
  const int q = static_cast<int>(C_init.cols());
  if (r < 1 || r > std::min(p, q)) {
    throw std::invalid_argument("warm_start: rank out of range");
  }
  SvdTriple dec = svd(C_init);
  SmartFactors f;
  f.U = dec.U.leftCols(r);
  f.D = dec.d.head(r);
  f.V = dec.V.leftCols(r);
  return f;
}

double default_lasso_lambda(const Matrix& X, const Matrix& Y) {
  const double n = static_cast<double>(X.rows());
  const double pq = static_cast<double>(X.cols()) * static_cast<double>(Y.cols());
  Matrix R = Y - X * ridge_fit(X, Y, 0.1);
  std::vector<double> absres(R.data(), R.data() + R.size());
  for (double& v : absres) v = std::abs(v);
  auto mid = absres.begin() + absres.size() / 2;
  std::nth_element(absres.begin(), mid, absres.end());
  const double sigma_hat = 1.4826 * (*mid);
  return sigma_hat * std::sqrt(2.0 * std::log(pq) / n);
}

}  // namespace smart
