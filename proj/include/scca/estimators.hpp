#pragma once

// Canonical direction estimators: classical (full support), restricted to a
// given support pair, and sparse via exhaustive support enumeration.
//
// All three run through one subproblem solver (gather blocks, whiten with
// closed-form 1x1/2x2 or eigensolver inverse square roots, SVD of the
// whitened cross block), so a sparse scan, the final refit of its winner,
// and a direct restricted fit of the same supports agree bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "scca/errors.hpp"
#include "scca/matrix.hpp"
#include "scca/model.hpp"
#include "scca/sampler.hpp"

namespace scca {

struct DirectionEstimate {
  Matrix A;        // p x r, normalized so A' sx A = I
  Matrix B;        // m x r
  Matrix product;  // A B'
  double objective = 0.0;  // Tr(A' sxy B) = sum of fitted singular values
  Vector singular_values;  // top r of the whitened cross block
  std::vector<int> support_u;
  std::vector<int> support_v;
  Matrix fit_sx;  // covariance blocks the fit was normalized against
  Matrix fit_sy;
  // sparse_cca scan diagnostics; zero for direct fits
  std::uint64_t scan_evaluated = 0;
  std::uint64_t scan_skipped_singular = 0;
};

namespace detail {

// Inverse square root of a symmetric positive definite block, written into
// w. Returns {eigmin, eigmax}; w is only valid when the caller accepts
// eigmin against its ridge rule. Sizes 1 and 2 use closed forms.
inline std::pair<double, double> spd_invsqrt(const Matrix& s, Matrix& w) {
  const Eigen::Index k = s.rows();
  if (k == 1) {
    const double a = s(0, 0);
    if (a > 0.0) w(0, 0) = 1.0 / std::sqrt(a);
    return {a, a};
  }
  if (k == 2) {
    const double a = s(0, 0);
    const double b = s(1, 1);
    const double c = 0.5 * (s(0, 1) + s(1, 0));
    const double diff = a - b;
    const double disc = std::sqrt(diff * diff + 4.0 * c * c);
    const double lo = 0.5 * (a + b - disc);
    const double hi = 0.5 * (a + b + disc);
    if (lo > 0.0) {
      const double det_root = std::sqrt(a * b - c * c);
      const double trace_root = std::sqrt(a + b + 2.0 * det_root);
      const double scale = 1.0 / (det_root * trace_root);
      w(0, 0) = (b + det_root) * scale;
      w(1, 1) = (a + det_root) * scale;
      w(0, 1) = -c * scale;
      w(1, 0) = -c * scale;
    }
    return {lo, hi};
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  if (eig.info() != Eigen::Success)
    throw FactorizationError("spd_invsqrt: eigensolver did not converge");
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(k - 1);
  if (lo > 0.0)
    w = eig.eigenvectors() *
        eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        eig.eigenvectors().transpose();
  return {lo, hi};
}

// Reusable workspace for restricted canonical fits. factor() reports false
// when either marginal submatrix fails its ridge test (eigenvalue below
// 1e-10 times the block's largest eigenvalue).
class SubproblemSolver {
 public:
  bool factor(const SampleCov& cov, const std::vector<int>& rows,
              const std::vector<int>& cols, int r) {
    const int ku = static_cast<int>(rows.size());
    const int kv = static_cast<int>(cols.size());
    sxii_.resize(ku, ku);
    syjj_.resize(kv, kv);
    sxyij_.resize(ku, kv);
    for (int a = 0; a < ku; ++a)
      for (int b = 0; b < ku; ++b) sxii_(a, b) = cov.sx(rows[a], rows[b]);
    for (int a = 0; a < kv; ++a)
      for (int b = 0; b < kv; ++b) syjj_(a, b) = cov.sy(cols[a], cols[b]);
    for (int a = 0; a < ku; ++a)
      for (int b = 0; b < kv; ++b) sxyij_(a, b) = cov.sxy(rows[a], cols[b]);

    wx_.resize(ku, ku);
    wy_.resize(kv, kv);
    const auto ex = spd_invsqrt(sxii_, wx_);
    bad_eigenvalue_ = ex.first;
    if (!(ex.first > 0.0) || ex.first < 1e-10 * ex.second) return false;
    const auto ey = spd_invsqrt(syjj_, wy_);
    if (!(ey.first > 0.0) || ey.first < 1e-10 * ey.second) {
      bad_eigenvalue_ = ey.first;
      return false;
    }
    whitened_.noalias() = wx_ * sxyij_ * wy_;
    svd_.compute(whitened_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    objective_ = 0.0;
    for (int i = 0; i < r; ++i) objective_ += svd_.singularValues()(i);
    r_ = r;
    return true;
  }

  double objective() const { return objective_; }
  double bad_eigenvalue() const { return bad_eigenvalue_; }

  // Embed the factored solution into ambient dimensions and canonicalize
  // signs: each column of A gets a positive largest-magnitude entry, with
  // the matching column of B flipped jointly so the product is unchanged.
  DirectionEstimate build(const SampleCov& cov, const std::vector<int>& rows,
                          const std::vector<int>& cols) const {
    DirectionEstimate est;
    const int r = r_;
    est.A = Matrix::Zero(cov.p(), r);
    est.B = Matrix::Zero(cov.m(), r);
    const Matrix au = wx_ * svd_.matrixU().leftCols(r);
    const Matrix bv = wy_ * svd_.matrixV().leftCols(r);
    for (std::size_t a = 0; a < rows.size(); ++a)
      est.A.row(rows[a]) = au.row(static_cast<Eigen::Index>(a));
    for (std::size_t a = 0; a < cols.size(); ++a)
      est.B.row(cols[a]) = bv.row(static_cast<Eigen::Index>(a));
    for (int j = 0; j < r; ++j) {
      Eigen::Index arg = 0;
      est.A.col(j).cwiseAbs().maxCoeff(&arg);
      if (est.A(arg, j) < 0.0) {
        est.A.col(j) = -est.A.col(j);
        est.B.col(j) = -est.B.col(j);
      }
    }
    est.product.noalias() = est.A * est.B.transpose();
    est.objective = objective_;
    est.singular_values = svd_.singularValues().head(r);
    est.support_u = rows;
    est.support_v = cols;
    est.fit_sx = cov.sx;
    est.fit_sy = cov.sy;
    return est;
  }

 private:
  Matrix sxii_, syjj_, sxyij_, wx_, wy_, whitened_;
  Eigen::JacobiSVD<Matrix> svd_;
  double objective_ = 0.0;
  double bad_eigenvalue_ = 0.0;
  int r_ = 0;
};

inline std::vector<int> checked_support(std::vector<int> idx, int dim, int r,
                                        const char* side) {
  if (static_cast<int>(idx.size()) < r)
    throw ArgumentError(std::string("restricted_cca: support_") + side +
                        " needs at least r indices");
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
    throw ArgumentError(std::string("restricted_cca: support_") + side +
                        " has duplicate indices");
  if (idx.front() < 0 || idx.back() >= dim)
    throw ArgumentError(std::string("restricted_cca: support_") + side +
                        " index out of range");
  return idx;
}

inline std::string index_set_string(const std::vector<int>& idx) {
  std::string out = "{";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(idx[i]);
  }
  return out + "}";
}

}  // namespace detail

// Rank-r canonical fit restricted to the support pair (rows, cols): whitened
// SVD of the selected covariance blocks, embedded back into ambient
// dimensions with exact zeros off support.
inline DirectionEstimate restricted_cca(const SampleCov& cov,
                                        const std::vector<int>& rows,
                                        const std::vector<int>& cols, int r) {
  const auto I = detail::checked_support(rows, cov.p(), r, "u");
  const auto J = detail::checked_support(cols, cov.m(), r, "v");
  if (r < 1) throw ArgumentError("restricted_cca: rank must be positive");
  detail::SubproblemSolver solver;
  if (!solver.factor(cov, I, J, r))
    throw SupportConditioningError(
        "restricted_cca: covariance submatrix for supports " +
            detail::index_set_string(I) + " x " + detail::index_set_string(J) +
            " is singular (eigenvalue " +
            std::to_string(solver.bad_eigenvalue()) + ")",
        solver.bad_eigenvalue(), I, J);
  return solver.build(cov, I, J);
}

// Classical rank-r fit on the full index sets.
inline DirectionEstimate classical_cca(const SampleCov& cov, int r) {
  if (r < 1 || r > std::min(cov.p(), cov.m()))
    throw ArgumentError("classical_cca: rank out of range");
  std::vector<int> I(static_cast<std::size_t>(cov.p()));
  std::vector<int> J(static_cast<std::size_t>(cov.m()));
  for (int i = 0; i < cov.p(); ++i) I[static_cast<std::size_t>(i)] = i;
  for (int j = 0; j < cov.m(); ++j) J[static_cast<std::size_t>(j)] = j;
  detail::SubproblemSolver solver;
  if (!solver.factor(cov, I, J, r))
    throw SingularMatrixError(
        "classical_cca: a marginal covariance is singular (eigenvalue " +
            std::to_string(solver.bad_eigenvalue()) + ")",
        solver.bad_eigenvalue());
  return solver.build(cov, I, J);
}

namespace detail {

inline bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

inline std::vector<int> first_combination(int k) {
  std::vector<int> c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  return c;
}

// C(n, k) saturated at `cap` to keep budget checks overflow-safe.
inline std::uint64_t binomial_capped(int n, int k, std::uint64_t cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long double value = 1.0L;
  for (int i = 1; i <= k; ++i) {
    value *= static_cast<long double>(n - k + i);
    value /= static_cast<long double>(i);
    if (value > static_cast<long double>(cap) * 2.0L)
      return cap + 1 > cap ? cap + 1 : cap;
  }
  return static_cast<std::uint64_t>(value + 0.5L);
}

}  // namespace detail

// Sparse rank-r fit: enumerate every support pair of sizes (k_u, k_v) in
// lexicographic order, keep the pair with the largest restricted objective
// (strict improvement only, so ties resolve to the lexicographically
// smallest pair), and refit the winner. Pairs whose covariance submatrices
// are singular are skipped and counted in the scan diagnostics.
inline DirectionEstimate sparse_cca(const SampleCov& cov, int k_u, int k_v,
                                    int r,
                                    std::uint64_t budget = 10'000'000) {
  if (r < 1) throw ArgumentError("sparse_cca: rank must be positive");
  if (k_u < r || k_u > cov.p() || k_v < r || k_v > cov.m())
    throw ArgumentError(
        "sparse_cca: support sizes must satisfy r <= k_u <= p and "
        "r <= k_v <= m");
  const std::uint64_t count_u = detail::binomial_capped(cov.p(), k_u, budget);
  const std::uint64_t count_v = detail::binomial_capped(cov.m(), k_v, budget);
  // counts are saturated at budget + 1, so the product only overflows for
  // astronomically large budgets; saturate the report in that case too
  const bool overflow =
      count_v != 0 &&
      count_u > std::numeric_limits<std::uint64_t>::max() / count_v;
  const std::uint64_t required =
      overflow ? std::numeric_limits<std::uint64_t>::max()
               : count_u * count_v;
  if (required > budget)
    throw EnumerationBudgetError(
        "sparse_cca: enumeration needs " + std::to_string(count_u) + " x " +
            std::to_string(count_v) +
            " support pairs, which exceeds the budget of " +
            std::to_string(budget),
        required, budget);

  detail::SubproblemSolver solver;
  double best_objective = -1.0;
  std::vector<int> best_rows, best_cols;
  std::uint64_t evaluated = 0;
  std::uint64_t skipped = 0;
  std::vector<int> rows = detail::first_combination(k_u);
  do {
    std::vector<int> cols = detail::first_combination(k_v);
    do {
      if (!solver.factor(cov, rows, cols, r)) {
        ++skipped;
        continue;
      }
      ++evaluated;
      if (solver.objective() > best_objective) {
        best_objective = solver.objective();
        best_rows = rows;
        best_cols = cols;
      }
    } while (detail::next_combination(cols, cov.m()));
  } while (detail::next_combination(rows, cov.p()));

  if (best_rows.empty())
    throw EstimationFailureError(
        "sparse_cca: every candidate support pair was singular");
  DirectionEstimate est = restricted_cca(cov, best_rows, best_cols, r);
  est.scan_evaluated = evaluated;
  est.scan_skipped_singular = skipped;
  return est;
}

// Effective support of a direction matrix: indices of the k largest l2-norm
// rows; when fewer than k rows are nonzero, the zero rows with the smallest
// indices fill the remainder.
inline std::vector<int> effective_support(const Matrix& directions, int k) {
  if (k < 1 || k > directions.rows())
    throw ArgumentError("effective_support: k out of range");
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(static_cast<std::size_t>(directions.rows()));
  for (Eigen::Index i = 0; i < directions.rows(); ++i)
    ranked.emplace_back(directions.row(i).norm(), static_cast<int>(i));
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> support;
  support.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) support.push_back(ranked[i].second);
  std::sort(support.begin(), support.end());
  return support;
}

// Restricted fit on the true supports with the sample covariance.
inline DirectionEstimate oracle_estimator(const SampleCov& cov,
                                          const std::vector<int>& support_u,
                                          const std::vector<int>& support_v,
                                          int r) {
  return restricted_cca(cov, support_u, support_v, r);
}

// Population sparse approximation: the restricted fit computed on the
// population covariance blocks instead of a sample.
inline DirectionEstimate sparse_approximation(const CcaModel& model,
                                              const std::vector<int>& support_u,
                                              const std::vector<int>& support_v,
                                              int r) {
  return restricted_cca(population_cov(model), support_u, support_v, r);
}

struct TruncatedEstimate {
  Matrix product;
  bool truncated = false;
};

// Zero out estimates whose product norm exceeds 2 M sqrt(r); any true
// leading product obeys ||U1 V1'||_F <= M sqrt(r), so the zero matrix is
// closer than anything past the threshold.
inline TruncatedEstimate truncate(const DirectionEstimate& est, double M_bound,
                                  int r) {
  if (!(M_bound > 0.0))
    throw ArgumentError("truncate: M must be positive");
  TruncatedEstimate out;
  out.truncated = est.product.norm() > 2.0 * M_bound * std::sqrt(r);
  out.product =
      out.truncated ? Matrix::Zero(est.product.rows(), est.product.cols())
                    : est.product;
  return out;
}

// Squared Frobenius loss between a true product and an estimated one.
inline double loss(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
    throw ArgumentError("loss: shapes differ");
  return (truth - estimate).squaredNorm();
}

struct LossReport {
  double frobenius_sq = 0.0;
  double proj_loss_u = 0.0;  // squared projector distance, u side
  double proj_loss_v = 0.0;
};

inline LossReport loss(const Matrix& truth_product, const Matrix& truth_u1,
                       const Matrix& truth_v1, const DirectionEstimate& est) {
  LossReport report;
  report.frobenius_sq = loss(truth_product, est.product);
  const double du = projection_distance(truth_u1, est.A);
  const double dv = projection_distance(truth_v1, est.B);
  report.proj_loss_u = du * du;
  report.proj_loss_v = dv * dv;
  return report;
}

// Frobenius inner product <sxy, oracle.product - sparse.product>. The sparse
// fit maximizes Tr(A' sxy B) over all supports of its sizes, and the oracle
// support is one of them, so this is nonpositive up to roundoff.
inline double optimality_certificate(const SampleCov& cov,
                                     const DirectionEstimate& oracle_est,
                                     const DirectionEstimate& sparse_est) {
  return (cov.sxy.array() *
          (oracle_est.product - sparse_est.product).array())
      .sum();
}

}  // namespace scca
