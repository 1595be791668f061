#include "smart/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace smart {

void check_finite(const Matrix& A, const char* name) {
  if (!A.allFinite()) {
    throw std::invalid_argument(std::string(name) + " contains non-finite entries");
  }
}

SvdTriple svd(const Matrix& A) {
  check_finite(A, "svd input");
  Eigen::BDCSVD<Matrix> dec(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw std::runtime_error("svd: decomposition did not converge");
  }
  SvdTriple out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  // Sign convention: largest-magnitude entry of each left singular vector
  // is positive, ties broken by lowest index.
  for (Eigen::Index k = 0; k < out.U.cols(); ++k) {
    Eigen::Index imax = 0;
    double amax = -1.0;
    for (Eigen::Index i = 0; i < out.U.rows(); ++i) {
      double a = std::abs(out.U(i, k));
      if (a > amax) {
        amax = a;
        imax = i;
      }
    }
    if (out.U(imax, k) < 0.0) {
      out.U.col(k) = -out.U.col(k);
      out.V.col(k) = -out.V.col(k);
    }
  }
  return out;
}

Matrix qr_orthonormalize(const Matrix& A) {
  check_finite(A, "qr input");
  if (A.cols() > A.rows()) {
    throw std::invalid_argument("qr_orthonormalize: more columns than rows");
  }
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix R = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
  const double tol = 1e-12 * std::max(1.0, A.norm());
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    if (std::abs(R(j, j)) < tol) {
      throw std::runtime_error("qr_orthonormalize: rank-deficient input");
    }
  }
  Matrix Q = qr.householderQ() * Matrix::Identity(A.rows(), A.cols());
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  return Q;
}

Matrix complete_basis(const Matrix& U0, double accept_tol) {
  const Eigen::Index p = U0.rows();
  const Eigen::Index k = U0.cols();
  Matrix W(p, p - k);
  Eigen::Index accepted = 0;
  for (Eigen::Index j = 0; j < p && accepted < p - k; ++j) {
    Vector v = Vector::Zero(p);
    v(j) = 1.0;
    // two Gram-Schmidt passes for orthogonality near machine precision
    for (int pass = 0; pass < 2; ++pass) {
      if (k > 0) v -= U0 * (U0.transpose() * v);
      if (accepted > 0) {
        auto Wacc = W.leftCols(accepted);
        v -= Wacc * (Wacc.transpose() * v);
      }
    }
    const double nrm = v.norm();
    if (nrm > accept_tol) {
      W.col(accepted++) = v / nrm;
    }
  }
  if (accepted < p - k) {
    throw std::runtime_error("complete_basis: failed to complete the basis");
  }
  return W;
}

double soft_threshold(double a, double kappa) {
  if (a > kappa) return a - kappa;
  if (a < -kappa) return a + kappa;
  return 0.0;
}

Matrix soft_threshold(const Matrix& A, double kappa) {
  return A.unaryExpr([kappa](double a) { return soft_threshold(a, kappa); });
}

}  // namespace smart
