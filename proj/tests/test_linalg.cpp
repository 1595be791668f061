#include <doctest.h>

#include "smart/linalg.hpp"
#include "smart/rng.hpp"

using namespace smart;

namespace {

Matrix random_matrix(int rows, int cols, uint64_t seed) {
  Rng rng(seed);
  Matrix A(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) A(i, j) = rng.normal();
  return A;
}

}  // namespace

TEST_CASE("svd of identity") {
  SvdTriple s = svd(Matrix::Identity(3, 3));
  CHECK(s.d.isApprox(Vector::Ones(3), 1e-12));
  CHECK((s.U - Matrix::Identity(3, 3)).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((s.V - Matrix::Identity(3, 3)).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("svd of diagonal matrix") {
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 3.0;
  A(1, 1) = 2.0;
  SvdTriple s = svd(A);
  CHECK(s.d(0) == doctest::Approx(3.0));
  CHECK(s.d(1) == doctest::Approx(2.0));
  CHECK((s.U - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK((s.V - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("svd reconstruction and conventions on random input") {
  Matrix A = random_matrix(4, 3, 42);
  SvdTriple s = svd(A);
  CHECK((s.U * s.d.asDiagonal() * s.V.transpose() - A).norm() <= 1e-8 * std::max(1.0, A.norm()));
  CHECK((s.U.transpose() * s.U - Matrix::Identity(3, 3)).norm() <= 1e-10);
  CHECK((s.V.transpose() * s.V - Matrix::Identity(3, 3)).norm() <= 1e-10);
  for (int k = 0; k + 1 < 3; ++k) CHECK(s.d(k) >= s.d(k + 1));
  // sign convention: largest-magnitude entry of each left vector positive
  for (int k = 0; k < 3; ++k) {
    Eigen::Index imax;
    s.U.col(k).cwiseAbs().maxCoeff(&imax);
    CHECK(s.U(imax, k) > 0.0);
  }
}

TEST_CASE("svd is deterministic") {
  Matrix A = random_matrix(6, 5, 7);
  SvdTriple a = svd(A);
  SvdTriple b = svd(A);
  CHECK(a.U == b.U);
  CHECK(a.d == b.d);
  CHECK(a.V == b.V);
}

TEST_CASE("svd rejects non-finite input") {
  Matrix A = Matrix::Ones(2, 2);
  A(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd(A), std::invalid_argument);
}

TEST_CASE("qr of orthonormal input is the input") {
  Matrix Q0 = svd(random_matrix(6, 3, 11)).U;
  CHECK((qr_orthonormalize(Q0) - Q0).norm() <= 1e-12);
}

TEST_CASE("qr removes scaling") {
  Matrix A(2, 1);
  A << 2.0, 0.0;
  Matrix Q = qr_orthonormalize(A);
  CHECK(Q(0, 0) == doctest::Approx(1.0));
  CHECK(Q(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("qr span and orthogonality on random input") {
  Matrix A = random_matrix(6, 3, 5);
  Matrix Q = qr_orthonormalize(A);
  CHECK((Q.transpose() * Q - Matrix::Identity(3, 3)).norm() <= 1e-10);
  // same span: projectors agree
  Matrix Pa = A * (A.transpose() * A).inverse() * A.transpose();
  Matrix Pq = Q * Q.transpose();
  CHECK((Pa - Pq).norm() <= 1e-9);
}

TEST_CASE("qr rejects rank-deficient input") {
  Matrix A(3, 2);
  A.col(0) << 1, 2, 3;
  A.col(1) = 2.0 * A.col(0);
  CHECK_THROWS(qr_orthonormalize(A));
}

TEST_CASE("complete_basis canonical case") {
  Matrix U0 = Matrix::Zero(3, 1);
  U0(0, 0) = 1.0;
  Matrix W = complete_basis(U0);
  REQUIRE(W.cols() == 2);
  CHECK(W(1, 0) == doctest::Approx(1.0));
  CHECK(W(2, 1) == doctest::Approx(1.0));
}

TEST_CASE("complete_basis with full basis is empty") {
  Matrix U0 = Matrix::Identity(4, 4);
  Matrix W = complete_basis(U0);
  CHECK(W.rows() == 4);
  CHECK(W.cols() == 0);
}

TEST_CASE("complete_basis gives orthogonal square matrix") {
  Matrix U0 = svd(random_matrix(5, 2, 31)).U;
  Matrix W = complete_basis(U0);
  Matrix full(5, 5);
  full << U0, W;
  CHECK((full.transpose() * full - Matrix::Identity(5, 5)).norm() <= 1e-10);
  // deterministic
  CHECK(complete_basis(U0) == W);
}

TEST_CASE("soft_threshold branches") {
  CHECK(soft_threshold(1.2, 0.5) == doctest::Approx(0.7));
  CHECK(soft_threshold(0.3, 0.5) == 0.0);
  CHECK(soft_threshold(-1.0, 0.5) == doctest::Approx(-0.5));
}

TEST_CASE("soft_threshold is the l1 proximal map (grid oracle)") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = 3.0 * rng.normal();
    const double kappa = std::abs(rng.normal());
    const double st = soft_threshold(a, kappa);
    double best_x = -12.0, best_v = 1e300;
    for (double x = -12.0; x <= 12.0; x += 1e-4) {
      const double v = 0.5 * (x - a) * (x - a) + kappa * std::abs(x);
      if (v < best_v) {
        best_v = v;
        best_x = x;
      }
    }
    CHECK(std::abs(st - best_x) <= 1e-3);
  }
}
