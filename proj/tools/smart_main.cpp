#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smart/diagnostics.hpp"
#include "smart/io.hpp"
#include "smart/model_select.hpp"
#include "smart/simulation.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

int env_jobs_default() {
  if (const char* e = std::getenv("SMART_JOBS")) {
    const int v = std::atoi(e);
    if (v >= 1) return v;
  }
  return 1;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

constexpr const char* kVersion = "0.1.0";

struct SimulateOpts {
  std::string model = "I";
  std::string experiment = "vary_n";
  std::vector<double> sweep;
  int reps = 20;
  uint64_t seed = 0;
  bool seed_set = false;
  int jobs = env_jobs_default();
  std::string output = "simulate_out";
  std::vector<std::string> methods = {"smart_fixed", "ridge_target", "ols_target", "lasso_target"};
  int n = 200, r_hat = 5, r_u = 10, r_v = 10, r0 = 10, r = 5;
  double sigma0 = 0.01;
  bool no_timing = false;
  std::string dump_truth;
  int cv_folds = 5;
};

int cmd_simulate(const SimulateOpts& o) {
  smart::ExperimentConfig cfg;
  cfg.model = o.model;
  cfg.experiment = o.experiment;
  cfg.sweep = o.sweep.empty() ? smart::default_sweep(o.experiment) : o.sweep;
  cfg.replications = o.reps;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  cfg.n = o.n;
  cfg.r_hat = o.r_hat;
  cfg.r_u = o.r_u;
  cfg.r_v = o.r_v;
  cfg.sigma0 = o.sigma0;
  cfg.r0 = o.r0;
  cfg.r = o.r;
  cfg.cv_folds = o.cv_folds;

  fs::create_directories(o.output);

  if (!o.dump_truth.empty()) {
    fs::create_directories(o.dump_truth);
    smart::DgpConfig dgp;
    smart::apply_model_dims(cfg, dgp);
    dgp.n = cfg.n;
    dgp.r = cfg.r;
    dgp.r0 = cfg.r0;
    dgp.sigma0 = cfg.sigma0;
    if (cfg.experiment == "vary_n") dgp.n = static_cast<int>(cfg.sweep[0]);
    if (cfg.experiment == "vary_sigma0") dgp.sigma0 = cfg.sweep[0];
    dgp.seed = smart::child_seed(cfg.seed, 0, 0);
    smart::SimInstance inst = smart::make_instance(dgp);
    smart::write_matrix_csv(o.dump_truth + "/x.csv", inst.X);
    smart::write_matrix_csv(o.dump_truth + "/y.csv", inst.Y);
    smart::write_matrix_csv(o.dump_truth + "/c_star.csv", inst.C_star);
    smart::write_matrix_csv(o.dump_truth + "/c0_clean.csv", inst.source.C0_clean);
    smart::write_matrix_csv(o.dump_truth + "/c0_tilde.csv", inst.source.C0_tilde);
    smart::write_matrix_csv(o.dump_truth + "/u_star.csv", inst.U_star);
    smart::write_matrix_csv(o.dump_truth + "/v_star.csv", inst.V_star);
    smart::write_matrix_csv(o.dump_truth + "/d_star.csv", inst.D_star);
  }

  std::vector<smart::ResultRow> rows = smart::run_experiment(cfg, o.methods);
  smart::write_results_csv(o.output + "/results.csv", rows, !o.no_timing);

  json manifest;
  manifest["artifact_version"] = kVersion;
  manifest["subcommand"] = "simulate";
  manifest["config"] = {
      {"model", cfg.model},     {"experiment", cfg.experiment}, {"sweep", cfg.sweep},
      {"replications", cfg.replications}, {"seed", cfg.seed},   {"jobs", cfg.jobs},
      {"n", cfg.n},             {"r_hat", cfg.r_hat},           {"r_u", cfg.r_u},
      {"r_v", cfg.r_v},         {"sigma0", cfg.sigma0},         {"r0", cfg.r0},
      {"r", cfg.r},             {"cv_folds", cfg.cv_folds},     {"methods", o.methods},
      {"no_timing", o.no_timing}};
  if (!o.no_timing) {
    std::map<std::string, double> total;
    for (const auto& r : rows) total[r.method] += r.seconds;
    json timing;
    for (const auto& [m, s] : total) timing[m] = s;
    manifest["timing_seconds_by_method"] = timing;
  }
  write_json(o.output + "/manifest.json", manifest);
  std::cout << "wrote " << rows.size() << " rows to " << o.output << "/results.csv\n";
  return 0;
}

struct FitOpts {
  std::string x_path, y_path, source_path, output = "fit_out";
  int rank = -1;
  int r_u = -1, r_v = -1;
  double lambda_u = -1.0, lambda_v = -1.0;
  double lasso_lambda0 = -1.0;
  uint64_t seed = 0;
  int cv_folds = 5;
  double eps = 1e-4;
  int t_max = 500;
};

int cmd_fit(const FitOpts& o) {
  smart::Matrix X = smart::read_matrix_csv(o.x_path);
  smart::Matrix Y = smart::read_matrix_csv(o.y_path);
  smart::Matrix C0 = smart::read_matrix_csv(o.source_path);
  const int p = static_cast<int>(X.cols());
  const int q = static_cast<int>(Y.cols());
  if (X.rows() != Y.rows()) {
    throw std::runtime_error("fit: X is " + std::to_string(X.rows()) + "x" + std::to_string(p) +
                             " but Y is " + std::to_string(Y.rows()) + "x" + std::to_string(q));
  }
  if (C0.rows() != p || C0.cols() != q) {
    throw std::runtime_error("fit: source matrix is " + std::to_string(C0.rows()) + "x" +
                             std::to_string(C0.cols()) + ", expected " + std::to_string(p) + "x" +
                             std::to_string(q));
  }

  smart::SolverConfig solver;
  solver.eps = o.eps;
  solver.t_max = o.t_max;

  const int r = o.rank > 0 ? o.rank : smart::select_rank(X, Y);

  int r_u = o.r_u, r_v = o.r_v;
  if (r_u < 0 || r_v < 0) {
    smart::SelectionGrid grid;
    grid.k_folds = o.cv_folds;
    grid.seed = o.seed;
    const int cap = std::min(p, q);
    grid.truncation_pairs = {{0, 0},
                             {std::min(5, cap), std::min(5, cap)},
                             {std::min(10, p), std::min(10, q)},
                             {p, q}};
    std::tie(r_u, r_v) = smart::cv_select_truncation(X, Y, C0, r, grid, solver);
  }

  smart::SourceSpectralBasis basis = smart::build_source_basis(C0, r_u, r_v);
  const double lam0 = o.lasso_lambda0 >= 0.0 ? o.lasso_lambda0 : smart::default_lasso_lambda(X, Y);
  smart::SmartFactors init = smart::warm_start(smart::lasso_fit(X, Y, lam0), r);

  double lu = o.lambda_u, lv = o.lambda_v;
  smart::FitReport fit;
  if (lu < 0.0 || lv < 0.0) {
    smart::LambdaChoice choice = smart::select_lambdas(
        X, Y, basis, r, smart::default_lambda_grid(X, Y, r, true),
        smart::default_lambda_grid(X, Y, r, false), init, solver);
    lu = choice.lambda_u;
    lv = choice.lambda_v;
    fit = std::move(choice.fit);
  } else {
    fit = smart::smart_fit(X, Y, basis, r, lu, lv, init, solver);
  }

  fs::create_directories(o.output);
  smart::write_matrix_csv(o.output + "/U.csv", fit.factors.U);
  smart::write_matrix_csv(o.output + "/D.csv", smart::Matrix(fit.factors.D));
  smart::write_matrix_csv(o.output + "/V.csv", fit.factors.V);

  json report;
  report["artifact_version"] = kVersion;
  report["rank"] = r;
  report["r_u"] = r_u;
  report["r_v"] = r_v;
  report["penalty_free"] = (r_u == p && r_v == q);
  report["lambda_u"] = lu;
  report["lambda_v"] = lv;
  report["lasso_lambda0"] = lam0;
  report["iterations"] = fit.iterations;
  report["converged"] = fit.converged;
  report["primal_residual"] = fit.primal_residual;
  report["stationarity_residual"] = fit.stationarity_residual;
  report["objective"] = fit.objective;
  report["stall_count"] = fit.stall_count;
  write_json(o.output + "/report.json", report);
  std::cout << "fit written to " << o.output << " (converged=" << fit.converged << ")\n";
  return 0;
}

struct EvaluateOpts {
  std::string factors_dir, test_x, test_y, output = "metrics.json";
};

int cmd_evaluate(const EvaluateOpts& o) {
  smart::Matrix U = smart::read_matrix_csv(o.factors_dir + "/U.csv");
  smart::Matrix D = smart::read_matrix_csv(o.factors_dir + "/D.csv");
  smart::Matrix V = smart::read_matrix_csv(o.factors_dir + "/V.csv");
  smart::Matrix X = smart::read_matrix_csv(o.test_x);
  smart::Matrix Y = smart::read_matrix_csv(o.test_y);
  smart::Matrix C = U * smart::Vector(D.col(0)).asDiagonal() * V.transpose();

  const double ntq = static_cast<double>(X.rows()) * static_cast<double>(Y.cols());
  smart::Matrix R = X * C - Y;
  json metrics;
  metrics["artifact_version"] = kVersion;
  metrics["test_prediction_error"] = R.norm() / std::sqrt(ntq);
  std::vector<double> per_col;
  for (Eigen::Index j = 0; j < R.cols(); ++j) {
    per_col.push_back(R.col(j).norm() / std::sqrt(static_cast<double>(X.rows())));
  }
  metrics["per_response_error"] = per_col;
  write_json(o.output, metrics);
  std::cout << "prediction error " << R.norm() / std::sqrt(ntq) << "\n";
  return 0;
}

struct DiagnoseOpts {
  std::string truth_dir, output = "diagnostics.json";
  int r_u = 10, r_v = 10;
  double tau = 0.5;
};

int cmd_diagnose(const DiagnoseOpts& o) {
  smart::Matrix C0_clean = smart::read_matrix_csv(o.truth_dir + "/c0_clean.csv");
  smart::Matrix C0_tilde = smart::read_matrix_csv(o.truth_dir + "/c0_tilde.csv");
  smart::Matrix U_star = smart::read_matrix_csv(o.truth_dir + "/u_star.csv");
  smart::Matrix V_star = smart::read_matrix_csv(o.truth_dir + "/v_star.csv");
  smart::Vector d_star = smart::read_matrix_csv(o.truth_dir + "/d_star.csv").col(0);

  smart::SpectralDiagnostics d = smart::compute_diagnostics(
      U_star, V_star, d_star, C0_clean, C0_tilde, o.r_u, o.r_v, o.tau);

  json out;
  out["artifact_version"] = kVersion;
  out["r_u"] = o.r_u;
  out["r_v"] = o.r_v;
  out["tau"] = o.tau;
  out["r_u_star"] = d.r_u_star;
  out["r_v_star"] = d.r_v_star;
  out["eta_r"] = d.eta_r;
  out["eps0"] = d.eps0;
  out["eps_source"] = d.eps_source;
  out["s_u"] = d.s_u_table;
  out["s_v"] = d.s_v_table;
  write_json(o.output, out);
  std::cout << "diagnostics written to " << o.output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SMART: spectral transfer learning for low-rank multi-task regression"};
  app.require_subcommand(1);
  app.set_config("--config");

  SimulateOpts so;
  CLI::App* sim = app.add_subcommand("simulate", "run a seeded simulation experiment");
  sim->add_option("--model", so.model, "problem dimensions: I, II, or III");
  sim->add_option("--experiment", so.experiment, "vary_n | vary_rhat | vary_rs | vary_sigma0");
  sim->add_option("--sweep", so.sweep, "sweep values (default depends on experiment)");
  sim->add_option("--reps", so.reps, "replicates per sweep value");
  sim->add_option("--seed", so.seed, "master seed")->required();
  sim->add_option("--jobs", so.jobs, "worker threads (default SMART_JOBS or 1)");
  sim->add_option("--output", so.output, "output directory");
  sim->add_option("--methods", so.methods, "methods to run");
  sim->add_option("--n", so.n);
  sim->add_option("--rhat", so.r_hat);
  sim->add_option("--ru", so.r_u);
  sim->add_option("--rv", so.r_v);
  sim->add_option("--sigma0", so.sigma0);
  sim->add_option("--r0", so.r0);
  sim->add_option("--r", so.r);
  sim->add_option("--cv-folds", so.cv_folds);
  sim->add_flag("--no-timing", so.no_timing, "zero the timing fields for byte-stable output");
  sim->add_option("--dump-truth", so.dump_truth, "also write instance ground truth to this dir");

  FitOpts fo;
  CLI::App* fit = app.add_subcommand("fit", "fit SMART to CSV data");
  fit->add_option("--x", fo.x_path, "design matrix CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--y", fo.y_path, "response matrix CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--source", fo.source_path, "source coefficient matrix CSV")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--output", fo.output, "output directory");
  fit->add_option("--rank", fo.rank, "target rank (default: automatic selection)");
  fit->add_option("--ru", fo.r_u, "left truncation level (default: CV)");
  fit->add_option("--rv", fo.r_v, "right truncation level (default: CV)");
  fit->add_option("--lambda-u", fo.lambda_u, "left penalty (default: BIC)");
  fit->add_option("--lambda-v", fo.lambda_v, "right penalty (default: BIC)");
  fit->add_option("--lasso-lambda0", fo.lasso_lambda0, "warm-start lasso penalty");
  fit->add_option("--seed", fo.seed, "seed for CV folds");
  fit->add_option("--cv-folds", fo.cv_folds);
  fit->add_option("--eps", fo.eps, "solver tolerance");
  fit->add_option("--t-max", fo.t_max, "solver iteration cap");

  EvaluateOpts eo;
  CLI::App* ev = app.add_subcommand("evaluate", "evaluate fitted factors on test data");
  ev->add_option("--factors", eo.factors_dir, "directory with U.csv, D.csv, V.csv")->required();
  ev->add_option("--test-x", eo.test_x)->required()->check(CLI::ExistingFile);
  ev->add_option("--test-y", eo.test_y)->required()->check(CLI::ExistingFile);
  ev->add_option("--output", eo.output, "metrics JSON path");

  DiagnoseOpts dg;
  CLI::App* di = app.add_subcommand("diagnose", "spectral diagnostics from simulation ground truth");
  di->add_option("--truth-dir", dg.truth_dir, "directory written by simulate --dump-truth")
      ->required();
  di->add_option("--ru", dg.r_u);
  di->add_option("--rv", dg.r_v);
  di->add_option("--tau", dg.tau);
  di->add_option("--output", dg.output, "diagnostics JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(so);
    if (fit->parsed()) return cmd_fit(fo);
    if (ev->parsed()) return cmd_evaluate(eo);
    if (di->parsed()) return cmd_diagnose(dg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
