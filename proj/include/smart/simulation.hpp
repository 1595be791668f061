#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smart/model_select.hpp"
#include "smart/rng.hpp"
#include "smart/solver.hpp"

namespace smart {

struct DgpConfig {
  int p = 100;
  int q = 50;
  int n = 200;
  int r = 5;
  int r0 = 10;
  double sigma = 0.5;
  double sigma0 = 0.01;
  double source_sv_min = 1.0, source_sv_max = 10.0;
  double target_sv_min = 3.0, target_sv_max = 5.0;
  double ar_coef = 0.5;
  uint64_t seed = 0;
};

struct SourceTruth {
  Matrix C0_clean, C0_tilde;
  Matrix U0, V0;  // p x r0, q x r0 orthonormal
  Vector D0;      // descending
};

struct SimInstance {
  Matrix X, Y;
  Matrix C_star;
  SourceTruth source;
  Matrix U_star, V_star;
  Vector D_star;
  std::vector<int> cols_u, cols_v;  // selected source columns
};

/// Descending linear spacing from hi to lo over k points; a single point
/// takes the upper endpoint.
Vector linspace_desc(double lo, double hi, int k);

SourceTruth gen_source(const DgpConfig& cfg, Rng& rng);
Matrix gen_features(const DgpConfig& cfg, Rng& rng);
void gen_target(const DgpConfig& cfg, const SourceTruth& src, Rng& rng, SimInstance& inst);
Matrix gen_response(const DgpConfig& cfg, const Matrix& X, const Matrix& C_star, Rng& rng);

/// Full instance from a single seeded stream (source, features, target,
/// response drawn in that order).
SimInstance make_instance(const DgpConfig& cfg);

/// (1/sqrt(pq)) ||C_hat - C_star||_F
double norm_frob_error(const Matrix& C_hat, const Matrix& C_star);

struct ExperimentConfig {
  std::string model = "I";  // I: 100x50, II: 150x100, III: 300x200
  std::string experiment = "vary_n";
  std::vector<double> sweep;  // defaults depend on the experiment
  int replications = 20;
  uint64_t seed = 0;
  int jobs = 1;
  // defaults held fixed while one parameter sweeps
  int n = 200;
  int r_hat = 5;
  int r_u = 10, r_v = 10;
  double sigma0 = 0.01;
  int r0 = 10, r = 5;
  SolverConfig solver;
  int cv_folds = 5;
};

struct ResultRow {
  std::string method;
  std::string sweep_name;
  double sweep_value = 0.0;
  int replicate = 0;
  uint64_t seed = 0;
  double error = 0.0;  // NaN marks a method failure
  double seconds = 0.0;
  std::string hyperparams;
};

void apply_model_dims(ExperimentConfig& cfg, DgpConfig& dgp);
std::vector<double> default_sweep(const std::string& experiment);

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                      const std::vector<std::string>& methods);

}  // namespace smart
