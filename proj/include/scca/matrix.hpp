#pragma once

// Dense matrix primitives shared by every other header: thin SVD, symmetric
// square roots, the Ky Fan 2-norm, and two subspace distances.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "scca/errors.hpp"

namespace scca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SvdResult {
  Matrix left;             // thin left singular vectors
  Vector singular_values;  // nonincreasing, all >= 0
  Matrix right;            // thin right singular vectors
};

// Thin SVD with a reconstruction guard: ||U D V' - M||_F must stay below
// 1e-8 * (1 + ||M||_F) or the factorization is reported as failed.
inline SvdResult svd(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0)
    throw ArgumentError("svd: matrix must be nonempty");
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success)
    throw FactorizationError("svd: Jacobi iteration did not converge");
  SvdResult result{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  const double residual =
      (result.left * result.singular_values.asDiagonal() *
           result.right.transpose() -
       m)
          .norm();
  if (residual > 1e-8 * (1.0 + m.norm()))
    throw FactorizationError("svd: reconstruction residual " +
                             std::to_string(residual) + " exceeds tolerance");
  return result;
}

// Largest singular value.
inline double op_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

namespace detail {

inline std::string dim_string(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace detail

// Symmetric square root and inverse square root of a positive definite S.
// Any eigenvalue below ridge_tol raises SingularMatrixError naming that
// eigenvalue; asymmetry beyond 1e-10 * ||S||_op is an argument error.
inline std::pair<Matrix, Matrix> psd_sqrt_invsqrt(const Matrix& s,
                                                  double ridge_tol) {
  if (s.rows() != s.cols() || s.rows() == 0)
    throw ArgumentError("psd_sqrt_invsqrt: matrix must be square, got " +
                        detail::dim_string(s));
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success)
    throw FactorizationError("psd_sqrt_invsqrt: eigensolver did not converge");
  const double scale = std::max(std::abs(eig.eigenvalues()(0)),
                                std::abs(eig.eigenvalues()(s.rows() - 1)));
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(scale, 1e-300))
    throw ArgumentError("psd_sqrt_invsqrt: matrix is not symmetric (max "
                        "asymmetry " +
                        std::to_string(asym) + ")");
  const double eig_min = eig.eigenvalues()(0);
  if (eig_min < ridge_tol || eig_min <= 0.0)
    throw SingularMatrixError(
        "psd_sqrt_invsqrt: eigenvalue " + std::to_string(eig_min) +
            " is below the ridge tolerance " + std::to_string(ridge_tol),
        eig_min);
  const Vector root = eig.eigenvalues().cwiseSqrt();
  const Matrix sqrt_s = eig.eigenvectors() * root.asDiagonal() *
                        eig.eigenvectors().transpose();
  const Matrix invsqrt_s = eig.eigenvectors() *
                           root.cwiseInverse().asDiagonal() *
                           eig.eigenvectors().transpose();
  return {sqrt_s, invsqrt_s};
}

// Default ridge tolerance: 1e-10 times the operator norm of S.
inline double default_ridge_tol(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() == 0)
    throw ArgumentError("default_ridge_tol: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()),
                                            Eigen::EigenvaluesOnly);
  const double scale = std::max(std::abs(eig.eigenvalues()(0)),
                                std::abs(eig.eigenvalues()(s.rows() - 1)));
  return 1e-10 * scale;
}

inline std::pair<Matrix, Matrix> psd_sqrt_invsqrt(const Matrix& s) {
  return psd_sqrt_invsqrt(s, default_ridge_tol(s));
}

// Ky Fan 2-norm of order r: sqrt of the sum of the r largest squared
// singular values. This is the value of sup <M, K> over unit-Frobenius K
// with rank(K) <= r.
inline double kyfan2(const Matrix& m, int r) {
  if (r < 1 || r > std::min(m.rows(), m.cols()))
    throw ArgumentError("kyfan2: order r must lie in [1, min(rows, cols)]");
  const Vector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
  double sum = 0.0;
  for (int i = 0; i < r; ++i) sum += sv(i) * sv(i);
  return std::sqrt(sum);
}

namespace detail {

// Orthonormal basis of the column space; throws if A is column rank
// deficient.
inline Matrix orthonormal_basis(const Matrix& a, const char* who) {
  if (a.rows() == 0 || a.cols() == 0 || a.rows() < a.cols())
    throw ArgumentError(std::string(who) +
                        ": need a tall nonempty matrix, got " + dim_string(a));
  Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeThinU);
  const Vector sv = solver.singularValues();
  if (sv(a.cols() - 1) <= 1e-12 * std::max(sv(0), 1e-300))
    throw ArgumentError(std::string(who) + ": matrix is column rank deficient");
  return solver.matrixU();
}

}  // namespace detail

// Frobenius distance between the orthogonal projectors onto the column
// spaces of A and B. Basis-invariant; requires full column rank.
inline double projection_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw ArgumentError("projection_distance: row counts differ (" +
                        detail::dim_string(a) + " vs " + detail::dim_string(b) +
                        ")");
  const Matrix qa = detail::orthonormal_basis(a, "projection_distance");
  const Matrix qb = detail::orthonormal_basis(b, "projection_distance");
  return (qa * qa.transpose() - qb * qb.transpose()).norm();
}

// min over orthogonal W of ||A - B W||_F for orthonormal A, B, attained at
// the orthogonal polar factor of B'A.
inline double procrustes_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ArgumentError("procrustes_distance: shapes differ (" +
                        detail::dim_string(a) + " vs " + detail::dim_string(b) +
                        ")");
  if (a.cols() == 0) throw ArgumentError("procrustes_distance: empty input");
  const double dev_a =
      (a.transpose() * a - Matrix::Identity(a.cols(), a.cols()))
          .cwiseAbs()
          .maxCoeff();
  const double dev_b =
      (b.transpose() * b - Matrix::Identity(b.cols(), b.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (dev_a > 1e-8 || dev_b > 1e-8)
    throw ArgumentError(
        "procrustes_distance: inputs must have orthonormal columns (max "
        "Gram deviation " +
        std::to_string(std::max(dev_a, dev_b)) + ")");
  Eigen::JacobiSVD<Matrix> solver(b.transpose() * a,
                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix w = solver.matrixU() * solver.matrixV().transpose();
  return (a - b * w).norm();
}

}  // namespace scca
