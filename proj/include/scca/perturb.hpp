#pragma once

// Numerical checks of the perturbation machinery behind the risk analysis:
// the generalized sin-theta bound for singular subspaces, the rank-restricted
// sup statistic for empirical covariance deviations, the linear-loss
// sandwich, and the oracle loss decomposition with its optimality
// certificate.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scca/errors.hpp"
#include "scca/estimators.hpp"
#include "scca/matrix.hpp"
#include "scca/model.hpp"
#include "scca/rng.hpp"
#include "scca/sampler.hpp"

namespace scca {

enum class NormKind { frobenius, op };

inline const char* norm_kind_name(NormKind kind) {
  return kind == NormKind::frobenius ? "frobenius" : "operator";
}

struct SinThetaReport {
  // hypothesis quantities; delta = sigma_r(X) - sigma_{r+1}(Y)
  double eps = 0.0;
  double delta = 0.0;
  double d1 = 0.0;      // sigma_1(X)
  double d1_hat = 0.0;  // sigma_1(Y)
  // weighted bound: ||A1 D1 B1' - A1^ D1^ B1^'|| vs (sqrt(2)(d1+d1^)/delta + 1) eps
  double lhs_weighted = 0.0;
  double rhs_weighted = 0.0;
  // plain products: ||A1 B1' - A1^ B1^'|| and the empirical constant it implies
  double lhs_plain = 0.0;
  double ratio_plain = 0.0;  // lhs_plain * delta / eps
  NormKind norm_kind = NormKind::frobenius;
  bool hypothesis_ok = false;
  double margin() const { return rhs_weighted - lhs_weighted; }
};

namespace detail {

inline double matrix_norm(const Matrix& m, NormKind kind) {
  return kind == NormKind::frobenius ? m.norm() : op_norm(m);
}

}  // namespace detail

// Evaluate the sin-theta bound for the rank-r leading singular triplets of X
// against those of a perturbed Y. delta is chosen maximal for the
// hypothesis: sigma_r(X) - sigma_{r+1}(Y), which makes the residual spectrum
// condition ||D2^||_op <= d_r - delta hold with equality. A nonpositive
// delta is reported as a hypothesis violation, never asserted.
inline SinThetaReport sintheta_check(const Matrix& x, const Matrix& y, int r,
                                     NormKind kind) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw ArgumentError("sintheta_check: shapes differ");
  const int max_rank = static_cast<int>(std::min(x.rows(), x.cols()));
  if (r < 1 || r > max_rank)
    throw ArgumentError("sintheta_check: rank out of range");
  const SvdResult sx = svd(x);
  const SvdResult sy = svd(y);
  SinThetaReport rep;
  rep.norm_kind = kind;
  rep.d1 = sx.singular_values(0);
  rep.d1_hat = sy.singular_values(0);
  const double d_r = sx.singular_values(r - 1);
  const double resid = r < max_rank ? sy.singular_values(r) : 0.0;
  rep.delta = d_r - resid;
  rep.hypothesis_ok = rep.delta > 0.0;
  if (!rep.hypothesis_ok) return rep;

  const Matrix a1 = sx.left.leftCols(r);
  const Matrix b1 = sx.right.leftCols(r);
  const Matrix a1h = sy.left.leftCols(r);
  const Matrix b1h = sy.right.leftCols(r);
  const Matrix diff = x - y;
  rep.eps = std::max(detail::matrix_norm(a1.transpose() * diff, kind),
                     detail::matrix_norm(diff * b1, kind));
  const Matrix weighted =
      a1 * sx.singular_values.head(r).asDiagonal() * b1.transpose() -
      a1h * sy.singular_values.head(r).asDiagonal() * b1h.transpose();
  rep.lhs_weighted = detail::matrix_norm(weighted, kind);
  rep.rhs_weighted =
      (std::sqrt(2.0) * (rep.d1 + rep.d1_hat) / rep.delta + 1.0) * rep.eps;
  rep.lhs_plain =
      detail::matrix_norm(a1 * b1.transpose() - a1h * b1h.transpose(), kind);
  rep.ratio_plain = rep.eps > 0.0 ? rep.lhs_plain * rep.delta / rep.eps : 0.0;
  return rep;
}

// Rank-restricted sup statistic for a white sample: with n standard normal
// d-vectors z_i and W = (1/n) sum z_i z_i' - I, the supremum of <W, K> over
// unit-Frobenius K of rank <= r equals the Ky Fan 2-norm of order r of W.
inline double rank_sup_statistic(int n, int d, int r, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ArgumentError("rank_sup_statistic: bad sizes");
  if (r < 1 || r > d) throw ArgumentError("rank_sup_statistic: rank out of range");
  Philox rng(seed, /*stream=*/0x4A11Full);
  Matrix w = Matrix::Zero(d, d);
  Vector z(d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z(j) = rng.next_normal();
    w.selfadjointView<Eigen::Lower>().rankUpdate(z, 1.0);
  }
  w /= static_cast<double>(n);
  w.triangularView<Eigen::StrictlyUpper>() =
      w.triangularView<Eigen::StrictlyLower>().transpose();
  w -= Matrix::Identity(d, d);
  return kyfan2(w, r);
}

struct LinearLossReport {
  double d1 = 0.0;
  double d_r = 0.0;
  double lower = 0.0;  // (d_r / 2) ||AB' - EF'||_F^2
  double mid = 0.0;    // <A diag(d) B', AB' - EF'>
  double upper = 0.0;  // (d_1 / 2) ||AB' - EF'||_F^2
  bool lower_ok = false;
  bool upper_ok = false;
  bool ok() const { return lower_ok && upper_ok; }
};

// Sandwich for the linearized loss: for orthonormal A, B, E, F and positive
// nonincreasing d, (d_r/2)||AB'-EF'||_F^2 <= <A diag(d) B', AB'-EF'> <=
// (d_1/2)||AB'-EF'||_F^2, verified to tolerance 1e-10.
inline LinearLossReport linearloss_check(const Matrix& a, const Vector& d,
                                         const Matrix& b, const Matrix& e,
                                         const Matrix& f) {
  const Eigen::Index r = a.cols();
  if (b.cols() != r || e.cols() != r || f.cols() != r || d.size() != r)
    throw ArgumentError("linearloss_check: column counts must all equal r");
  if (e.rows() != a.rows() || f.rows() != b.rows())
    throw ArgumentError("linearloss_check: row counts differ");
  auto check_frame = [](const Matrix& m, const char* who) {
    const double dev =
        (m.transpose() * m - Matrix::Identity(m.cols(), m.cols()))
            .cwiseAbs()
            .maxCoeff();
    if (dev > 1e-8)
      throw ArgumentError(std::string("linearloss_check: ") + who +
                          " must have orthonormal columns");
  };
  check_frame(a, "A");
  check_frame(b, "B");
  check_frame(e, "E");
  check_frame(f, "F");
  for (Eigen::Index i = 0; i < r; ++i) {
    if (!(d(i) > 0.0))
      throw ArgumentError("linearloss_check: d must be positive");
    if (i > 0 && d(i) > d(i - 1) + 1e-15)
      throw ArgumentError("linearloss_check: d must be nonincreasing");
  }
  LinearLossReport rep;
  rep.d1 = d(0);
  rep.d_r = d(r - 1);
  const Matrix diff = a * b.transpose() - e * f.transpose();
  const double dist2 = diff.squaredNorm();
  rep.lower = 0.5 * rep.d_r * dist2;
  rep.upper = 0.5 * rep.d1 * dist2;
  rep.mid = ((a * d.asDiagonal() * b.transpose()).array() * diff.array()).sum();
  rep.lower_ok = rep.lower <= rep.mid + 1e-10;
  rep.upper_ok = rep.mid <= rep.upper + 1e-10;
  return rep;
}

struct DecompositionReport {
  double sparse_approx_term = 0.0;  // 3 ||approx - truth||_F^2
  double oracle_term = 0.0;         // 3 ||oracle - approx||_F^2
  double bias_term = 0.0;           // <Sx U2 L2 V2' Sy, oracle - sparse>
  double excess1_term = 0.0;        // <Sxy - sxy^, oracle - sparse>
  double excess2_term = 0.0;        // <sx^ U*1 L1 V*1' sy^ - Sx U1 L1 V1' Sy, oracle - sparse>
  double certificate = 0.0;         // <sxy^, oracle - sparse>, <= 0 up to roundoff
  double total_loss = 0.0;          // ||sparse - truth||_F^2
  double triangle_bound = 0.0;      // 3 (sparse_approx + oracle + ||sparse - oracle||_F^2)
};

// Constant-free loss decomposition around the oracle fit: the prefactors
// depending on the correlation floor are omitted, only the structural terms
// and the two inequalities that hold without constants are exposed
// (certificate <= 0 and total_loss <= triangle_bound, both up to roundoff).
inline DecompositionReport loss_decomposition(const CcaModel& model,
                                              const SampleCov& cov,
                                              const DirectionEstimate& sparse_est,
                                              const DirectionEstimate& oracle_est,
                                              const DirectionEstimate& approx_est) {
  if (sparse_est.A.cols() != model.r || oracle_est.A.cols() != model.r ||
      approx_est.A.cols() != model.r)
    throw ArgumentError("loss_decomposition: estimates must share the model rank");
  if (oracle_est.support_u != approx_est.support_u ||
      oracle_est.support_v != approx_est.support_v)
    throw ArgumentError(
        "loss_decomposition: oracle fit and population approximation must "
        "share supports");
  if (cov.p() != model.p() || cov.m() != model.m())
    throw ArgumentError("loss_decomposition: covariance does not match model");

  const Matrix truth = model.leading_product();
  const Matrix gap = oracle_est.product - sparse_est.product;
  auto inner = [](const Matrix& lhs, const Matrix& rhs) {
    return (lhs.array() * rhs.array()).sum();
  };

  DecompositionReport rep;
  rep.sparse_approx_term = 3.0 * (approx_est.product - truth).squaredNorm();
  rep.oracle_term = 3.0 * (oracle_est.product - approx_est.product).squaredNorm();
  if (model.r2() > 0) {
    Vector lambda2(model.r2());
    for (int i = 0; i < model.r2(); ++i)
      lambda2(i) = model.correlations[static_cast<std::size_t>(model.r + i)];
    const Matrix residual_cross = model.sigma_x * model.U2() *
                                  lambda2.asDiagonal() * model.V2().transpose() *
                                  model.sigma_y;
    rep.bias_term = inner(residual_cross, gap);
  }
  rep.excess1_term = inner(model.sigma_xy() - cov.sxy, gap);
  const Matrix fitted_cross = cov.sx * oracle_est.A *
                              model.lambda1().asDiagonal() *
                              oracle_est.B.transpose() * cov.sy;
  const Matrix true_cross = model.sigma_x * model.U1() *
                            model.lambda1().asDiagonal() *
                            model.V1().transpose() * model.sigma_y;
  rep.excess2_term = inner(fitted_cross - true_cross, gap);
  rep.certificate = inner(cov.sxy, gap);
  rep.total_loss = (sparse_est.product - truth).squaredNorm();
  rep.triangle_bound =
      3.0 * (rep.sparse_approx_term + rep.oracle_term +
             (sparse_est.product - oracle_est.product).squaredNorm());
  return rep;
}

// ---------------------------------------------------------------------------
// Randomized sweeps backing the verify subcommand and the test suites.

namespace detail {

inline Matrix random_gaussian(int rows, int cols, Philox& rng) {
  Matrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = rng.next_normal();
  return g;
}

inline Matrix random_orthonormal(int rows, int cols, Philox& rng) {
  const Matrix g = random_gaussian(rows, cols, rng);
  const Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  return q;
}

}  // namespace detail

// Hypothesis-satisfying sin-theta trials: random rectangular X, additive
// Gaussian perturbations over three decades of magnitude, keeping only
// pairs with a positive spectral gap. The norm alternates per trial unless
// a fixed kind is supplied.
inline std::vector<SinThetaReport> sintheta_sweep(
    int trials, std::uint64_t seed,
    std::optional<NormKind> fixed_kind = std::nullopt) {
  if (trials < 1) throw ArgumentError("sintheta_sweep: trials must be positive");
  std::vector<SinThetaReport> reports;
  reports.reserve(static_cast<std::size_t>(trials));
  std::uint64_t attempt = 0;
  while (static_cast<int>(reports.size()) < trials) {
    Philox rng(seed, derive_seed(0x51217u, attempt++));
    const int p = 3 + static_cast<int>(rng.next_below(8));
    const int m = 3 + static_cast<int>(rng.next_below(8));
    const int r = 1 + static_cast<int>(rng.next_below(
                          static_cast<std::uint64_t>(std::min(p, m) - 1)));
    const Matrix x = detail::random_gaussian(p, m, rng);
    Matrix e = detail::random_gaussian(p, m, rng);
    const double sigma_r =
        Eigen::JacobiSVD<Matrix>(x).singularValues()(r - 1);
    const double decades = 0.3 + 2.7 * rng.next_uniform();
    e *= std::pow(10.0, -decades) * sigma_r / op_norm(e);
    const NormKind kind =
        fixed_kind ? *fixed_kind
                   : (reports.size() % 2 == 0 ? NormKind::frobenius
                                              : NormKind::op);
    const SinThetaReport rep = sintheta_check(x, x + e, r, kind);
    if (rep.hypothesis_ok) reports.push_back(rep);
  }
  return reports;
}

struct RankSupRow {
  int n = 0;
  int d = 0;
  int r = 0;
  std::uint64_t seed = 0;
  double statistic = 0.0;
};

inline std::vector<RankSupRow> rank_sup_sweep(int trials, int n, int d, int r,
                                              std::uint64_t seed) {
  if (trials < 1) throw ArgumentError("rank_sup_sweep: trials must be positive");
  std::vector<RankSupRow> rows;
  rows.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, 0x4E57u, t);
    rows.push_back({n, d, r, trial_seed, rank_sup_statistic(n, d, r, trial_seed)});
  }
  return rows;
}

inline std::vector<LinearLossReport> linearloss_sweep(int trials,
                                                      std::uint64_t seed) {
  if (trials < 1)
    throw ArgumentError("linearloss_sweep: trials must be positive");
  std::vector<LinearLossReport> reports;
  reports.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Philox rng(seed, derive_seed(0x11LLu, t));
    const int pa = 2 + static_cast<int>(rng.next_below(7));
    const int pb = 2 + static_cast<int>(rng.next_below(7));
    const int r =
        1 + static_cast<int>(rng.next_below(
                static_cast<std::uint64_t>(std::min(pa, pb))));
    const Matrix a = detail::random_orthonormal(pa, r, rng);
    const Matrix b = detail::random_orthonormal(pb, r, rng);
    const Matrix e = detail::random_orthonormal(pa, r, rng);
    const Matrix f = detail::random_orthonormal(pb, r, rng);
    Vector d(r);
    for (int i = 0; i < r; ++i) d(i) = std::exp(rng.next_normal());
    std::sort(d.data(), d.data() + r, std::greater<double>());
    reports.push_back(linearloss_check(a, d, b, e, f));
  }
  return reports;
}

struct ProcrustesRow {
  double distance = 0.0;
  double bound = 0.0;  // ||AA' - BB'||_F
  bool ok = false;
};

// Procrustes alignment against the projector-difference bound.
inline std::vector<ProcrustesRow> procrustes_sweep(int trials,
                                                   std::uint64_t seed) {
  if (trials < 1)
    throw ArgumentError("procrustes_sweep: trials must be positive");
  std::vector<ProcrustesRow> rows;
  rows.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Philox rng(seed, derive_seed(0x9C0Du, t));
    const int n = 2 + static_cast<int>(rng.next_below(7));
    const int r = 1 + static_cast<int>(rng.next_below(
                          static_cast<std::uint64_t>(n)));
    const Matrix a = detail::random_orthonormal(n, r, rng);
    const Matrix b = detail::random_orthonormal(n, r, rng);
    ProcrustesRow row;
    row.distance = procrustes_distance(a, b);
    row.bound = (a * a.transpose() - b * b.transpose()).norm();
    row.ok = row.distance <= row.bound + 1e-10;
    rows.push_back(row);
  }
  return rows;
}

struct DecompositionTrial {
  DecompositionReport report;
  bool certificate_ok = false;
  bool triangle_ok = false;
};

// End-to-end decomposition trials on a small sparse model: fresh model and
// sample per trial, sparse scan against the effective-support oracle.
inline std::vector<DecompositionTrial> decomposition_sweep(int trials, int n,
                                                           std::uint64_t seed) {
  if (trials < 1)
    throw ArgumentError("decomposition_sweep: trials must be positive");
  ParamSpace space;
  space.p = 8;
  space.m = 8;
  space.r = 1;
  space.r2 = 0;
  space.q = 0.0;
  space.s_u = 2;
  space.s_v = 2;
  space.lambda = 0.9;
  std::vector<DecompositionTrial> rows;
  rows.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    Philox rng(seed, derive_seed(0xDEC0u, t));
    auto draw_support = [&](int dim, int size) {
      std::vector<int> all(static_cast<std::size_t>(dim));
      for (int i = 0; i < dim; ++i) all[static_cast<std::size_t>(i)] = i;
      for (int i = 0; i < size; ++i) {
        const int j =
            i + static_cast<int>(rng.next_below(
                    static_cast<std::uint64_t>(dim - i)));
        std::swap(all[static_cast<std::size_t>(i)],
                  all[static_cast<std::size_t>(j)]);
      }
      std::vector<int> sup(all.begin(), all.begin() + size);
      std::sort(sup.begin(), sup.end());
      return sup;
    };
    const auto sup_u = draw_support(space.p, 2);
    const auto sup_v = draw_support(space.m, 2);
    const CcaModel model =
        build_model(space, CovSpec{CovKind::identity, 0.0},
                    geometric_correlations(space, 0.0), sup_u, sup_v,
                    derive_seed(seed, 0x0DE1u, t));
    const DataSet data = sample(model, n, derive_seed(seed, 0xDA7Au, t));
    const SampleCov cov = sample_covariance(data);
    const EffectiveSparsity eff = effective_sparsity(space, n);
    const DirectionEstimate sparse_est =
        sparse_cca(cov, eff.k_u, eff.k_v, space.r);
    const auto eff_u = effective_support(model.U1(), eff.k_u);
    const auto eff_v = effective_support(model.V1(), eff.k_v);
    const DirectionEstimate oracle_est =
        oracle_estimator(cov, eff_u, eff_v, space.r);
    const DirectionEstimate approx_est =
        sparse_approximation(model, eff_u, eff_v, space.r);
    DecompositionTrial trial;
    trial.report = loss_decomposition(model, cov, sparse_est, oracle_est,
                                      approx_est);
    trial.certificate_ok = trial.report.certificate <= 1e-10;
    trial.triangle_ok =
        trial.report.total_loss <= trial.report.triangle_bound + 1e-9;
    rows.push_back(trial);
  }
  return rows;
}

}  // namespace scca
