#include <catch2/catch_amalgamated.hpp>

#include "scca/matrix.hpp"
#include "scca/rng.hpp"
#include "test_support.hpp"

using Catch::Approx;
using scca::Matrix;
using scca::Vector;

TEST_CASE("thin svd reconstructs and is orthonormal", "[matcore]") {
  scca::Philox rng(42, 1);
  const Matrix m = testsup::random_gaussian(7, 4, rng);
  const scca::SvdResult s = scca::svd(m);
  REQUIRE(s.left.cols() == 4);
  REQUIRE(s.right.cols() == 4);
  const Matrix rec =
      s.left * s.singular_values.asDiagonal() * s.right.transpose();
  REQUIRE(testsup::max_abs_diff(rec, m) < 1e-12);
  REQUIRE(testsup::max_abs_diff(s.left.transpose() * s.left,
                                Matrix::Identity(4, 4)) < 1e-12);
  REQUIRE(testsup::max_abs_diff(s.right.transpose() * s.right,
                                Matrix::Identity(4, 4)) < 1e-12);
  for (int i = 1; i < 4; ++i)
    REQUIRE(s.singular_values(i) <= s.singular_values(i - 1));
  REQUIRE_THROWS_AS(scca::svd(Matrix(0, 3)), scca::ArgumentError);
}

TEST_CASE("ky fan 2-norm of order r", "[matcore]") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 4.0;
  REQUIRE(scca::kyfan2(d, 2) == Approx(5.0).margin(1e-12));
  REQUIRE(scca::kyfan2(d, 1) == Approx(4.0).margin(1e-12));
  REQUIRE_THROWS_AS(scca::kyfan2(d, 0), scca::ArgumentError);
  REQUIRE_THROWS_AS(scca::kyfan2(d, 3), scca::ArgumentError);

  // op norm is the order-1 case
  scca::Philox rng(7, 2);
  const Matrix g = testsup::random_gaussian(5, 3, rng);
  REQUIRE(scca::op_norm(g) == Approx(scca::kyfan2(g, 1)).margin(1e-12));
}

// kyfan2(W, r) = sup <W, K> over unit-Frobenius K with rank <= r: the
// optimizer built from the top singular triplets attains it and random
// rank-r candidates never exceed it.
TEST_CASE("ky fan 2-norm is the rank-restricted sup", "[matcore]") {
  scca::Philox rng(11, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 4 + static_cast<int>(rng.next_below(4));
    const int cols = 4 + static_cast<int>(rng.next_below(4));
    const int r = 1 + static_cast<int>(rng.next_below(3));
    const Matrix w = testsup::random_gaussian(rows, cols, rng);
    const double value = scca::kyfan2(w, r);

    const scca::SvdResult s = scca::svd(w);
    Matrix best = Matrix::Zero(rows, cols);
    for (int i = 0; i < r; ++i)
      best += s.singular_values(i) * s.left.col(i) * s.right.col(i).transpose();
    best /= best.norm();
    REQUIRE((w.array() * best.array()).sum() == Approx(value).margin(1e-10));

    for (int k = 0; k < 50; ++k) {
      Matrix cand = testsup::random_gaussian(rows, r, rng) *
                    testsup::random_gaussian(r, cols, rng);
      cand /= cand.norm();
      REQUIRE((w.array() * cand.array()).sum() <= value + 1e-10);
    }
  }
}

TEST_CASE("symmetric square roots", "[matcore]") {
  scca::Philox rng(3, 4);
  const Matrix s = testsup::random_spd(5, rng);
  const auto [sqrt_s, invsqrt_s] = scca::psd_sqrt_invsqrt(s);
  REQUIRE(testsup::max_abs_diff(sqrt_s * sqrt_s, s) < 1e-10);
  REQUIRE(testsup::max_abs_diff(invsqrt_s * s * invsqrt_s,
                                Matrix::Identity(5, 5)) < 1e-10);
  REQUIRE(testsup::max_abs_diff(sqrt_s * invsqrt_s, Matrix::Identity(5, 5)) <
          1e-10);

  SECTION("rank deficiency is reported with the eigenvalue") {
    Matrix bad = Matrix::Zero(3, 3);
    bad(0, 0) = 1.0;
    bad(1, 1) = 1.0;  // third eigenvalue is exactly 0
    try {
      scca::psd_sqrt_invsqrt(bad);
      FAIL("expected SingularMatrixError");
    } catch (const scca::SingularMatrixError& e) {
      REQUIRE(std::abs(e.offending_eigenvalue) < 1e-12);
    }
  }

  SECTION("asymmetry is an argument error") {
    Matrix asym = Matrix::Identity(3, 3);
    asym(0, 1) = 0.5;
    REQUIRE_THROWS_AS(scca::psd_sqrt_invsqrt(asym), scca::ArgumentError);
  }

  SECTION("explicit ridge tolerance rejects small eigenvalues") {
    Matrix tiny = Matrix::Identity(2, 2);
    tiny(1, 1) = 1e-13;
    REQUIRE_THROWS_AS(scca::psd_sqrt_invsqrt(tiny, 1e-8),
                      scca::SingularMatrixError);
    REQUIRE_NOTHROW(scca::psd_sqrt_invsqrt(tiny, 1e-14));
  }
}

TEST_CASE("projection distance", "[matcore]") {
  Matrix e1 = Matrix::Zero(3, 1);
  Matrix e2 = Matrix::Zero(3, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  REQUIRE(scca::projection_distance(e1, e2) ==
          Approx(std::sqrt(2.0)).margin(1e-12));
  REQUIRE(scca::projection_distance(e1, e1) == Approx(0.0).margin(1e-14));

  // basis invariance: A and A R span the same space for invertible R
  scca::Philox rng(9, 5);
  const Matrix a = testsup::random_gaussian(6, 2, rng);
  const Matrix b = testsup::random_gaussian(6, 2, rng);
  Matrix r = testsup::random_gaussian(2, 2, rng);
  r += 3.0 * Matrix::Identity(2, 2);
  REQUIRE(scca::projection_distance(a, b) ==
          Approx(scca::projection_distance(a * r, b)).margin(1e-10));

  Matrix deficient(4, 2);
  deficient.col(0) = Vector::Ones(4);
  deficient.col(1) = 2.0 * Vector::Ones(4);
  REQUIRE_THROWS_AS(scca::projection_distance(deficient, a.topRows(4)),
                    scca::ArgumentError);
}

TEST_CASE("procrustes distance", "[matcore]") {
  scca::Philox rng(13, 6);

  // alignment can only help: distance 0 to any rotation of itself
  const Matrix a = testsup::random_orthonormal(5, 2, rng);
  const Matrix w = testsup::random_orthonormal(2, 2, rng);
  REQUIRE(scca::procrustes_distance(a, a * w) == Approx(0.0).margin(1e-12));

  // one-dimensional case: e1 vs e2 gives sqrt(2) and equals the projector
  // difference exactly
  Matrix e1 = Matrix::Zero(2, 1);
  Matrix e2 = Matrix::Zero(2, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  const double dist = scca::procrustes_distance(e1, e2);
  REQUIRE(dist == Approx(std::sqrt(2.0)).margin(1e-12));
  REQUIRE(dist ==
          Approx((e1 * e1.transpose() - e2 * e2.transpose()).norm())
              .margin(1e-12));

  // alignment never beats the projector-difference bound
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(6));
    const int r = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    const Matrix x = testsup::random_orthonormal(n, r, rng);
    const Matrix y = testsup::random_orthonormal(n, r, rng);
    const double lhs = scca::procrustes_distance(x, y);
    const double rhs = (x * x.transpose() - y * y.transpose()).norm();
    REQUIRE(lhs <= rhs + 1e-10);
  }

  Matrix not_frame(3, 2);
  not_frame << 1, 1, 0, 1, 0, 0;
  REQUIRE_THROWS_AS(scca::procrustes_distance(not_frame, a.topRows(3)),
                    scca::ArgumentError);
}
