#include "smart/stiefel.hpp"

#include <cmath>

namespace smart {

namespace {

double inner(const Matrix& A, const Matrix& B) {
  return (A.array() * B.array()).sum();
}

}  // namespace

Matrix tangent_project(const Matrix& M, const Matrix& G) {
  Matrix MtG = M.transpose() * G;
  Matrix sym = 0.5 * (MtG + MtG.transpose());
  return G - M * sym;
}

Matrix retract(const Matrix& M, const Matrix& xi) {
  return qr_orthonormalize(M + xi);
}

RcgResult minimize(const SmoothCost& cost, const Matrix& init, const RcgConfig& cfg) {
  constexpr int kMaxBacktracks = 50;

  Matrix M = init;
  double f = cost.eval(M);
  Matrix grad = tangent_project(M, cost.egrad(M));
  double gnorm2 = inner(grad, grad);
  Matrix dir = -grad;

  RcgResult res;
  res.stalled = false;
  double step = cfg.initial_step;

  int t = 0;
  for (; t < cfg.max_iters; ++t) {
    if (std::sqrt(gnorm2) <= cfg.grad_tol) break;

    double slope = inner(grad, dir);
    if (slope >= 0.0) {  // not a descent direction: restart
      dir = -grad;
      slope = -gnorm2;
    }

    // Armijo backtracking from a step that grows one notch per iteration
    double tstep = step / cfg.backtrack;
    Matrix Mnew;
    double fnew = f;
    bool ok = false;
    for (int b = 0; b < kMaxBacktracks; ++b) {
      bool feasible = true;
      try {
        Mnew = retract(M, tstep * dir);
      } catch (const std::exception&) {
        feasible = false;  // rank-deficient step, shrink
      }
      if (feasible) {
        fnew = cost.eval(Mnew);
        if (fnew <= f + cfg.armijo_c * tstep * slope) {
          ok = true;
          break;
        }
      }
      tstep *= cfg.backtrack;
    }
    if (!ok) {
      res.stalled = true;
      break;
    }
    step = tstep;

    Matrix grad_new = tangent_project(Mnew, cost.egrad(Mnew));
    double gnorm2_new = inner(grad_new, grad_new);

    // PR+ coefficient with projection transport of the old gradient
    Matrix grad_old_tr = tangent_project(Mnew, grad);
    double beta = (gnorm2_new - inner(grad_new, grad_old_tr)) / gnorm2;
    if (beta < 0.0) beta = 0.0;
    dir = -grad_new + beta * tangent_project(Mnew, dir);

    M = std::move(Mnew);
    f = fnew;
    grad = std::move(grad_new);
    gnorm2 = gnorm2_new;
  }

  res.point = std::move(M);
  res.grad_norm = std::sqrt(gnorm2);
  res.iters = t;
  return res;
}

}  // namespace smart
