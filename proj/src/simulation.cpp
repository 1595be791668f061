#include "smart/simulation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

namespace smart {

Vector linspace_desc(double lo, double hi, int k) {
  Vector v(k);
  if (k == 1) {
    v(0) = hi;
    return v;
  }
  for (int i = 0; i < k; ++i) {
    v(i) = hi - (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
  }
  return v;
}

namespace {

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
  Matrix A(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) A(i, j) = rng.normal();
  }
  return A;
}

}  // namespace

SourceTruth gen_source(const DgpConfig& cfg, Rng& rng) {
  SourceTruth s;
  s.U0 = qr_orthonormalize(gaussian_matrix(cfg.p, cfg.r0, rng));
  s.V0 = qr_orthonormalize(gaussian_matrix(cfg.q, cfg.r0, rng));
  s.D0 = linspace_desc(cfg.source_sv_min, cfg.source_sv_max, cfg.r0);
  s.C0_clean = s.U0 * s.D0.asDiagonal() * s.V0.transpose();
  if (cfg.sigma0 > 0.0) {
    s.C0_tilde = s.C0_clean + cfg.sigma0 * gaussian_matrix(cfg.p, cfg.q, rng);
  } else {
    s.C0_tilde = s.C0_clean;
  }
  return s;
}

Matrix gen_features(const DgpConfig& cfg, Rng& rng) {
  // AR(1) recursion, exact for the Toeplitz covariance a^|i-j|
  const double a = cfg.ar_coef;
  const double b = std::sqrt(1.0 - a * a);
  Matrix X(cfg.n, cfg.p);
  for (int i = 0; i < cfg.n; ++i) {
    X(i, 0) = rng.normal();
    for (int j = 1; j < cfg.p; ++j) {
      X(i, j) = a * X(i, j - 1) + b * rng.normal();
    }
  }
  return X;
}

void gen_target(const DgpConfig& cfg, const SourceTruth& src, Rng& rng, SimInstance& inst) {
  if (cfg.r > cfg.r0) throw std::invalid_argument("gen_target: r exceeds r0");
  inst.cols_u = rng.sample_without_replacement(cfg.r0, cfg.r);
  inst.cols_v = rng.sample_without_replacement(cfg.r0, cfg.r);
  inst.U_star.resize(cfg.p, cfg.r);
  inst.V_star.resize(cfg.q, cfg.r);
  for (int k = 0; k < cfg.r; ++k) {
    inst.U_star.col(k) = src.U0.col(inst.cols_u[k]);
    inst.V_star.col(k) = src.V0.col(inst.cols_v[k]);
  }
  inst.D_star = linspace_desc(cfg.target_sv_min, cfg.target_sv_max, cfg.r);
  inst.C_star = inst.U_star * inst.D_star.asDiagonal() * inst.V_star.transpose();
}

Matrix gen_response(const DgpConfig& cfg, const Matrix& X, const Matrix& C_star, Rng& rng) {
  Matrix Y = X * C_star;
  if (cfg.sigma > 0.0) {
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
      for (Eigen::Index j = 0; j < Y.cols(); ++j) Y(i, j) += cfg.sigma * rng.normal();
    }
  }
  return Y;
}

SimInstance make_instance(const DgpConfig& cfg) {
  Rng rng(cfg.seed);
  SimInstance inst;
  inst.source = gen_source(cfg, rng);
  inst.X = gen_features(cfg, rng);
  gen_target(cfg, inst.source, rng, inst);
  inst.Y = gen_response(cfg, inst.X, inst.C_star, rng);
  return inst;
}

double norm_frob_error(const Matrix& C_hat, const Matrix& C_star) {
  const double pq = static_cast<double>(C_star.rows()) * static_cast<double>(C_star.cols());
  return (C_hat - C_star).norm() / std::sqrt(pq);
}

void apply_model_dims(ExperimentConfig& cfg, DgpConfig& dgp) {
  if (cfg.model == "I") {
    dgp.p = 100;
    dgp.q = 50;
  } else if (cfg.model == "II") {
    dgp.p = 150;
    dgp.q = 100;
  } else if (cfg.model == "III") {
    dgp.p = 300;
    dgp.q = 200;
  } else {
    throw std::invalid_argument("unknown model: " + cfg.model);
  }
}

std::vector<double> default_sweep(const std::string& experiment) {
  if (experiment == "vary_n") return {100, 200, 400};
  if (experiment == "vary_rhat") return {3, 5, 7};
  if (experiment == "vary_rs") return {5, 10, 15};
  if (experiment == "vary_sigma0") return {0.01, 0.1, 1.0, 5.0};
  throw std::invalid_argument("unknown experiment: " + experiment);
}

namespace {

struct MethodOutcome {
  double error = std::numeric_limits<double>::quiet_NaN();
  std::string hyperparams;
};

std::string fmt_lambda_pair(double lu, double lv) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "lambda_u=%.6g;lambda_v=%.6g", lu, lv);
  return buf;
}

MethodOutcome run_method(const std::string& method, const SimInstance& inst,
                         const ExperimentConfig& cfg, const DgpConfig& dgp, uint64_t seed) {
  MethodOutcome out;
  const Matrix& X = inst.X;
  const Matrix& Y = inst.Y;
  if (method == "ols_target") {
    out.error = norm_frob_error(ols_fit(X, Y), inst.C_star);
    out.hyperparams = "";
    return out;
  }
  if (method == "ridge_target") {
    // small-grid 5-fold CV on prediction error
    const std::vector<double> grid{1e-3, 1e-2, 1e-1, 1.0, 10.0};
    const std::vector<int> fold = fold_assignment(dgp.n, 5, seed);
    double best_err = std::numeric_limits<double>::infinity();
    double best_lambda = grid.front();
    for (double lam : grid) {
      double err = 0.0;
      for (int f = 0; f < 5; ++f) {
        int ntr = 0;
        for (int i = 0; i < dgp.n; ++i) ntr += fold[i] != f;
        Matrix Xtr(ntr, dgp.p), Ytr(ntr, dgp.q), Xva(dgp.n - ntr, dgp.p), Yva(dgp.n - ntr, dgp.q);
        int a = 0, b = 0;
        for (int i = 0; i < dgp.n; ++i) {
          if (fold[i] != f) {
            Xtr.row(a) = X.row(i);
            Ytr.row(a++) = Y.row(i);
          } else {
            Xva.row(b) = X.row(i);
            Yva.row(b++) = Y.row(i);
          }
        }
        err += (Xva * ridge_fit(Xtr, Ytr, lam) - Yva).squaredNorm();
      }
      if (err < best_err) {
        best_err = err;
        best_lambda = lam;
      }
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "lambda0=%.6g", best_lambda);
    out.hyperparams = buf;
    out.error = norm_frob_error(ridge_fit(X, Y, best_lambda), inst.C_star);
    return out;
  }
  if (method == "lasso_target") {
    const double lam = default_lasso_lambda(X, Y);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "lambda0=%.6g", lam);
    out.hyperparams = buf;
    out.error = norm_frob_error(lasso_fit(X, Y, lam), inst.C_star);
    return out;
  }
  if (method == "rrr_target") {
    const int r = select_rank(X, Y);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rank=%d", r);
    out.hyperparams = buf;
    out.error = norm_frob_error(warm_start(ols_fit(X, Y), r).coefficient(), inst.C_star);
    return out;
  }
  if (method == "smart_fixed") {
    const int ru = std::min(cfg.r_u, dgp.p);
    const int rv = std::min(cfg.r_v, dgp.q);
    SourceSpectralBasis basis = build_source_basis(inst.source.C0_tilde, ru, rv);
    SmartFactors init = warm_start(lasso_fit(X, Y, default_lasso_lambda(X, Y)), cfg.r_hat);
    LambdaChoice choice = select_lambdas(X, Y, basis, cfg.r_hat,
                                         default_lambda_grid(X, Y, cfg.r_hat, true),
                                         default_lambda_grid(X, Y, cfg.r_hat, false),
                                         init, cfg.solver);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "r=%d;ru=%d;rv=%d;%s;converged=%d", cfg.r_hat, ru, rv,
                  fmt_lambda_pair(choice.lambda_u, choice.lambda_v).c_str(),
                  choice.fit.converged ? 1 : 0);
    out.hyperparams = buf;
    out.error = norm_frob_error(choice.fit.C_hat, inst.C_star);
    return out;
  }
  if (method == "smart_auto") {
    const int r = select_rank(X, Y);
    SelectionGrid grid;
    grid.k_folds = cfg.cv_folds;
    grid.seed = seed;
    grid.truncation_pairs = {{0, 0},
                             {std::min(5, std::min(dgp.p, dgp.q)), std::min(5, std::min(dgp.p, dgp.q))},
                             {std::min(10, dgp.p), std::min(10, dgp.q)},
                             {dgp.p, dgp.q}};
    auto [ru, rv] = cv_select_truncation(X, Y, inst.source.C0_tilde, r, grid, cfg.solver);
    SourceSpectralBasis basis = build_source_basis(inst.source.C0_tilde, ru, rv);
    SmartFactors init = warm_start(lasso_fit(X, Y, default_lasso_lambda(X, Y)), r);
    LambdaChoice choice = select_lambdas(X, Y, basis, r,
                                         default_lambda_grid(X, Y, r, true),
                                         default_lambda_grid(X, Y, r, false),
                                         init, cfg.solver);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "r=%d;ru=%d;rv=%d;%s;converged=%d", r, ru, rv,
                  fmt_lambda_pair(choice.lambda_u, choice.lambda_v).c_str(),
                  choice.fit.converged ? 1 : 0);
    out.hyperparams = buf;
    out.error = norm_frob_error(choice.fit.C_hat, inst.C_star);
    return out;
  }
  throw std::invalid_argument("unknown method: " + method);
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                      const std::vector<std::string>& methods) {
  if (cfg.sweep.empty()) throw std::invalid_argument("run_experiment: empty sweep");
  if (cfg.replications < 1) throw std::invalid_argument("run_experiment: replications < 1");

  const std::string sweep_name = cfg.experiment == "vary_n"        ? "n"
                                 : cfg.experiment == "vary_rhat"   ? "r_hat"
                                 : cfg.experiment == "vary_rs"     ? "r_s"
                                 : cfg.experiment == "vary_sigma0" ? "sigma0"
                                                                   : cfg.experiment;

  const int n_sweep = static_cast<int>(cfg.sweep.size());
  const int n_tasks = n_sweep * cfg.replications;
  std::vector<std::vector<ResultRow>> slots(n_tasks);

  auto run_task = [&](int task) {
    const int si = task / cfg.replications;
    const int rep = task % cfg.replications;
    const double sv = cfg.sweep[si];

    ExperimentConfig ec = cfg;
    DgpConfig dgp;
    apply_model_dims(ec, dgp);
    dgp.n = cfg.n;
    dgp.r = cfg.r;
    dgp.r0 = cfg.r0;
    dgp.sigma0 = cfg.sigma0;
    if (cfg.experiment == "vary_n") {
      dgp.n = static_cast<int>(sv);
    } else if (cfg.experiment == "vary_rhat") {
      ec.r_hat = static_cast<int>(sv);
    } else if (cfg.experiment == "vary_rs") {
      ec.r_u = ec.r_v = static_cast<int>(sv);
    } else if (cfg.experiment == "vary_sigma0") {
      dgp.sigma0 = sv;
    } else {
      throw std::invalid_argument("unknown experiment: " + cfg.experiment);
    }
    dgp.seed = child_seed(cfg.seed, static_cast<uint64_t>(si), static_cast<uint64_t>(rep));

    SimInstance inst = make_instance(dgp);
    std::vector<ResultRow>& rows = slots[task];
    for (const std::string& m : methods) {
      ResultRow row;
      row.method = m;
      row.sweep_name = sweep_name;
      row.sweep_value = sv;
      row.replicate = rep;
      row.seed = dgp.seed;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        MethodOutcome mo = run_method(m, inst, ec, dgp, dgp.seed);
        row.error = mo.error;
        row.hyperparams = mo.hyperparams;
      } catch (const std::exception& e) {
        row.error = std::numeric_limits<double>::quiet_NaN();
        row.hyperparams = std::string("failure=") + e.what();
      }
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      rows.push_back(std::move(row));
    }
  };

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    for (int t = 0; t < n_tasks; ++t) run_task(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) run_task(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<ResultRow> out;
  out.reserve(static_cast<size_t>(n_tasks) * methods.size());
  for (auto& rows : slots) {
    for (auto& r : rows) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace smart
