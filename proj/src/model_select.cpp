#include "smart/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smart/rng.hpp"

namespace smart {

namespace {

constexpr double kSupportTol = 1e-8;

int support_size(const Matrix& A) {
  int c = 0;
  for (Eigen::Index i = 0; i < A.size(); ++i) {
    if (std::abs(A.data()[i]) > kSupportTol) ++c;
  }
  return c;
}

double noise_scale(const Matrix& X, const Matrix& Y) {
  Matrix R = Y - X * ridge_fit(X, Y, 0.1);
  std::vector<double> absres(R.data(), R.data() + R.size());
  for (double& v : absres) v = std::abs(v);
  auto mid = absres.begin() + absres.size() / 2;
  std::nth_element(absres.begin(), mid, absres.end());
  return 1.4826 * (*mid);
}

}  // namespace

double bic_score(const FitReport& fit, const Matrix& X, const Matrix& Y) {
  const double nq = static_cast<double>(X.rows()) * static_cast<double>(Y.cols());
  double rss = (Y - X * fit.C_hat).squaredNorm();
  rss = std::max(rss, 1e-12);
  const int df = support_size(fit.Omega_u) + support_size(fit.Omega_v);
  return nq * std::log(rss / nq) + df * std::log(nq);
}

LambdaChoice select_lambdas(const Matrix& X, const Matrix& Y, const SourceSpectralBasis& basis,
                            int r, const std::vector<double>& lambda_u_grid,
                            const std::vector<double>& lambda_v_grid, const SmartFactors& init,
                            const SolverConfig& cfg) {
  if (lambda_u_grid.empty() || lambda_v_grid.empty()) {
    throw std::invalid_argument("select_lambdas: empty grid");
  }
  LambdaChoice best;
  bool have_best = false;
  double best_bic = 0.0;
  int failures = 0;
  SmartFactors warm = init;
  for (double lu : lambda_u_grid) {
    for (double lv : lambda_v_grid) {
      FitReport fit;
      try {
        fit = smart_fit(X, Y, basis, r, lu, lv, warm, cfg);
      } catch (const std::exception&) {
        ++failures;
        continue;
      }
      warm = fit.factors;
      const double bic = bic_score(fit, X, Y);
      const bool tie = have_best && std::abs(bic - best_bic) <= 1e-9 * std::max(1.0, std::abs(best_bic));
      const bool better =
          !have_best || (!tie && bic < best_bic) ||
          (tie && lu + lv > best.lambda_u + best.lambda_v);
      if (better) {
        best = {lu, lv, std::move(fit)};
        best_bic = bic;
        have_best = true;
      }
    }
  }
  if (!have_best) {
    throw std::runtime_error("select_lambdas: every grid cell failed (" +
                             std::to_string(failures) + " failures)");
  }
  return best;
}

int select_rank(const Matrix& X, const Matrix& Y) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const int q = static_cast<int>(Y.cols());
  if (n <= 1) throw std::invalid_argument("select_rank: need n > 1");
  if (Y.norm() == 0.0) return 1;

  SvdTriple xdec = svd(X);
  const double ev_max = xdec.d.size() > 0 ? xdec.d(0) * xdec.d(0) : 0.0;
  int m = 0;
  for (Eigen::Index k = 0; k < xdec.d.size(); ++k) {
    if (xdec.d(k) * xdec.d(k) > 1e-10 * ev_max) ++m;
  }
  Matrix Ux = xdec.U.leftCols(m);
  Matrix PY = Ux * (Ux.transpose() * Y);
  Vector lam = svd(PY).d;

  double s2;
  if (static_cast<long long>(n) * q > static_cast<long long>(m) * q) {
    s2 = (Y - PY).squaredNorm() / (static_cast<double>(n) * q - static_cast<double>(m) * q);
  } else {
    Vector dy = svd(Y / std::sqrt(static_cast<double>(n))).d;
    const Eigen::Index k = dy.size();
    double acc = 0.0;
    for (Eigen::Index i = k / 2; i < k; ++i) acc += dy(i) * dy(i);
    s2 = acc / static_cast<double>(k - k / 2);
  }
  double mu = 2.0 * std::sqrt(s2) * (std::sqrt(static_cast<double>(q)) +
                                     std::sqrt(static_cast<double>(m)));
  // guard against a collapsing threshold on (near-)noiseless data, where
  // trailing singular values are zero only up to roundoff
  if (lam.size() > 0) mu = std::max(mu, 1e-10 * lam(0));
  int r = 0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    if (lam(k) >= mu) ++r;
  }
  return std::min(std::max(r, 1), std::min(p, q));
}

std::vector<int> fold_assignment(int n, int k_folds, uint64_t seed) {
  if (k_folds < 2 || k_folds > n) {
    throw std::invalid_argument("fold_assignment: need 2 <= k_folds <= n");
  }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Rng rng(splitmix64(seed ^ 0xf01df01dULL));
  rng.shuffle(idx);
  std::vector<int> fold(n);
  // contiguous split of the shuffled order; first n % k folds get one extra
  const int base = n / k_folds, extra = n % k_folds;
  int pos = 0;
  for (int f = 0; f < k_folds; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    for (int j = 0; j < size; ++j) fold[idx[pos++]] = f;
  }
  return fold;
}

std::vector<double> default_lambda_grid(const Matrix& X, const Matrix& Y, int r, bool left_side) {
  const double n = static_cast<double>(X.rows());
  const double p = static_cast<double>(X.cols());
  const double q = static_cast<double>(Y.cols());
  const double delta = 0.1;
  const double sigma = noise_scale(X, Y);
  const double nu = svd(X).d(0) * svd(X).d(0) / n;
  const double base =
      left_side
          ? 8.0 * std::sqrt(2.0 * nu * sigma * sigma * std::log(12.0 * p * r / delta) / n)
          : 2.0 * std::sqrt(2.0 * nu * sigma * sigma * std::log(6.0 * q * r / delta) / n);
  return {base / 16.0, base / 4.0, base};
}

std::pair<int, int> cv_select_truncation(const Matrix& X, const Matrix& Y,
                                         const Matrix& C0_tilde, int r,
                                         const SelectionGrid& grid, const SolverConfig& cfg) {
  if (grid.truncation_pairs.empty()) {
    throw std::invalid_argument("cv_select_truncation: empty truncation grid");
  }
  if (grid.truncation_pairs.size() == 1) return grid.truncation_pairs.front();

  const int n = static_cast<int>(X.rows());
  const int q = static_cast<int>(Y.cols());
  const std::vector<int> fold = fold_assignment(n, grid.k_folds, grid.seed);

  // per-fold splits and warm starts, shared across truncation pairs
  struct Fold {
    Matrix Xtr, Ytr, Xva, Yva;
    SmartFactors init;
    std::vector<double> lu_grid, lv_grid;
  };
  std::vector<Fold> folds(grid.k_folds);
  for (int f = 0; f < grid.k_folds; ++f) {
    int ntr = 0;
    for (int i = 0; i < n; ++i) ntr += fold[i] != f;
    Fold& F = folds[f];
    F.Xtr.resize(ntr, X.cols());
    F.Ytr.resize(ntr, q);
    F.Xva.resize(n - ntr, X.cols());
    F.Yva.resize(n - ntr, q);
    int a = 0, b = 0;
    for (int i = 0; i < n; ++i) {
      if (fold[i] != f) {
        F.Xtr.row(a) = X.row(i);
        F.Ytr.row(a++) = Y.row(i);
      } else {
        F.Xva.row(b) = X.row(i);
        F.Yva.row(b++) = Y.row(i);
      }
    }
    F.init = warm_start(lasso_fit(F.Xtr, F.Ytr, default_lasso_lambda(F.Xtr, F.Ytr)), r);
    F.lu_grid = grid.lambda_u_grid.empty() ? default_lambda_grid(F.Xtr, F.Ytr, r, true)
                                           : grid.lambda_u_grid;
    F.lv_grid = grid.lambda_v_grid.empty() ? default_lambda_grid(F.Xtr, F.Ytr, r, false)
                                           : grid.lambda_v_grid;
  }

  // Fold fits only rank the candidate truncation pairs; a tighter iteration
  // cap keeps CV affordable without changing the final fit's accuracy.
  SolverConfig fold_cfg = cfg;
  fold_cfg.t_max = std::min(fold_cfg.t_max, 50);

  std::pair<int, int> best = grid.truncation_pairs.front();
  double best_err = 0.0;
  bool have_best = false;
  for (const auto& pair : grid.truncation_pairs) {
    SourceSpectralBasis basis = build_source_basis(C0_tilde, pair.first, pair.second);
    double err = 0.0;
    for (const Fold& F : folds) {
      LambdaChoice choice =
          select_lambdas(F.Xtr, F.Ytr, basis, r, F.lu_grid, F.lv_grid, F.init, fold_cfg);
      err += (F.Xva * choice.fit.C_hat - F.Yva).squaredNorm() /
             (static_cast<double>(F.Xva.rows()) * q);
    }
    err /= static_cast<double>(grid.k_folds);
    const bool tie = have_best && std::abs(err - best_err) <= 1e-12 * std::max(1.0, best_err);
    const bool better = !have_best || (!tie && err < best_err) ||
                        (tie && pair.first + pair.second < best.first + best.second);
    if (better) {
      best = pair;
      best_err = err;
      have_best = true;
    }
  }
  return best;
}

}  // namespace smart
