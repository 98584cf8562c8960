#pragma once

// Population model: sparsity classes, effective sparsity, risk benchmarks,
// and construction of canonical-pair covariance models.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "scca/errors.hpp"
#include "scca/matrix.hpp"
#include "scca/rng.hpp"

namespace scca {

// Parameter point describing a sparsity class: weak-lq row radii s_u/s_v for
// the two direction matrices, ambient dimensions, leading rank r plus
// residual rank r2, correlation floor lambda with ceiling kappa*lambda, a
// spectral bound M on the marginal covariances and their inverses, the
// sparsity exponent q in [0, 2), and the gap margin c0 (kappa*lambda must
// stay below 1 - c0).
struct ParamSpace {
  double s_u = 0.0;
  double s_v = 0.0;
  int p = 0;
  int m = 0;
  int r = 1;
  int r2 = 0;
  double lambda = 0.5;
  double kappa = 1.05;
  double M_bound = 3.0;
  double q = 0.0;
  double c0 = 0.05;

  void validate() const {
    if (p < 1 || m < 1) throw ArgumentError("ParamSpace: dimensions must be positive");
    if (r < 1 || r + r2 > std::min(p, m) || r2 < 0)
      throw ArgumentError("ParamSpace: need 1 <= r and r + r2 <= min(p, m)");
    if (!(lambda > 0.0 && lambda < 1.0))
      throw ArgumentError("ParamSpace: lambda must lie in (0, 1)");
    if (!(kappa >= 1.0)) throw ArgumentError("ParamSpace: kappa must be >= 1");
    if (!(c0 > 0.0 && c0 < 1.0))
      throw ArgumentError("ParamSpace: c0 must lie in (0, 1)");
    if (!(kappa * lambda <= 1.0 - c0))
      throw ArgumentError("ParamSpace: kappa*lambda = " +
                          std::to_string(kappa * lambda) +
                          " exceeds 1 - c0 = " + std::to_string(1.0 - c0));
    if (!(M_bound > 1.0)) throw ArgumentError("ParamSpace: M must exceed 1");
    if (!(q >= 0.0 && q < 2.0))
      throw ArgumentError("ParamSpace: q must lie in [0, 2)");
    if (s_u < 0.0 || s_v < 0.0)
      throw ArgumentError("ParamSpace: radii must be nonnegative");
  }
};

// Weak-lq radius of the rows of U: with row l2 norms ordered nonincreasingly
// as n_(1) >= n_(2) >= ..., the radius is max_j j * n_(j)^q, with 0^q = 0.
// For q = 0 this counts rows with norm above 1e-12.
inline double weak_lq_radius(const Matrix& u, double q) {
  if (!(q >= 0.0 && q < 2.0))
    throw ArgumentError("weak_lq_radius: q must lie in [0, 2)");
  if (u.rows() == 0) return 0.0;
  std::vector<double> norms(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    norms[static_cast<std::size_t>(i)] = u.row(i).norm();
  std::sort(norms.begin(), norms.end(), std::greater<double>());
  if (q == 0.0) {
    double count = 0.0;
    for (double n : norms)
      if (n > 1e-12) count += 1.0;
    return count;
  }
  double radius = 0.0;
  for (std::size_t j = 0; j < norms.size(); ++j) {
    const double term =
        norms[j] > 0.0 ? static_cast<double>(j + 1) * std::pow(norms[j], q)
                       : 0.0;
    radius = std::max(radius, term);
  }
  return radius;
}

namespace detail {

// Largest x in [0, cap] with x <= bound(x). bound must be continuous and
// increasing on (0, cap], which makes the sign of bound(x) - x change at
// most once; bisection to absolute tolerance 1e-9, returning the feasible
// (lower) end of the final bracket.
template <class F>
double largest_feasible(F bound, double cap) {
  if (cap <= 0.0) return 0.0;
  auto feasible = [&](double x) { return x <= bound(x); };
  if (feasible(cap)) return cap;
  double lo = cap * 1e-15;
  if (!feasible(lo)) return 0.0;
  double hi = cap;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

struct EffectiveSparsity {
  int k_u = 0;
  int k_v = 0;
  double x_u = 0.0;  // continuous solutions behind the ceilings
  double x_v = 0.0;
};

// Effective sparsity at sample size n: the largest x in [0, dim] with
// x <= s * (n lambda^2 / (r + log(e dim / x)))^{q/2}, one per side, with
// k = ceil(x). For q = 0 the program reduces to x = min(s, dim).
inline EffectiveSparsity effective_sparsity(const ParamSpace& space, int n) {
  space.validate();
  if (n < 1) throw ArgumentError("effective_sparsity: n must be positive");
  const double nl2 = static_cast<double>(n) * space.lambda * space.lambda;
  auto solve_side = [&](double s, int dim) {
    const double cap = static_cast<double>(dim);
    if (space.q == 0.0) return std::min(s, cap);
    auto bound = [&](double x) {
      const double denom =
          static_cast<double>(space.r) + std::log(M_E * cap / x);
      return s * std::pow(nl2 / denom, 0.5 * space.q);
    };
    return detail::largest_feasible(bound, cap);
  };
  EffectiveSparsity eff;
  eff.x_u = solve_side(space.s_u, space.p);
  eff.x_v = solve_side(space.s_v, space.m);
  eff.k_u = static_cast<int>(std::ceil(eff.x_u));
  eff.k_v = static_cast<int>(std::ceil(eff.x_v));
  return eff;
}

// Risk benchmark: (r (k_u + k_v) + k_u log(e p / k_u) + k_v log(e m / k_v))
// divided by n lambda^2, with k from effective_sparsity.
inline double minimax_rate(const ParamSpace& space, int n) {
  const EffectiveSparsity eff = effective_sparsity(space, n);
  if (eff.k_u == 0 || eff.k_v == 0)
    throw DegenerateModelError(
        "minimax_rate: effective sparsity is zero, the parameter point is "
        "degenerate");
  const double nl2 = static_cast<double>(n) * space.lambda * space.lambda;
  const double ku = eff.k_u;
  const double kv = eff.k_v;
  return (space.r * (ku + kv) + ku * std::log(M_E * space.p / ku) +
          kv * std::log(M_E * space.m / kv)) /
         nl2;
}

// Benchmark for per-column sparsity t_u, t_v: the fixed point uses the
// denominator log(e p / (r y)) and y is capped at p / r so the log stays
// positive; the rate is r (j_u log(ep/(r j_u)) + j_v log(em/(r j_v))) over
// n lambda^2.
inline double minimax_rate_individual(const ParamSpace& space, int n,
                                      double t_u, double t_v) {
  space.validate();
  if (n < 1)
    throw ArgumentError("minimax_rate_individual: n must be positive");
  if (t_u < 0.0 || t_v < 0.0)
    throw ArgumentError("minimax_rate_individual: radii must be nonnegative");
  const double nl2 = static_cast<double>(n) * space.lambda * space.lambda;
  const double r = space.r;
  auto solve_side = [&](double t, int dim) {
    const double cap = static_cast<double>(dim) / r;
    if (space.q == 0.0) return std::min(t, cap);
    auto bound = [&](double y) {
      const double denom = std::log(M_E * dim / (r * y));
      return t * std::pow(nl2 / denom, 0.5 * space.q);
    };
    return detail::largest_feasible(bound, cap);
  };
  const int j_u = static_cast<int>(std::ceil(solve_side(t_u, space.p)));
  const int j_v = static_cast<int>(std::ceil(solve_side(t_v, space.m)));
  if (j_u == 0 || j_v == 0)
    throw DegenerateModelError(
        "minimax_rate_individual: effective column sparsity is zero");
  return r *
         (j_u * std::log(M_E * space.p / (r * j_u)) +
          j_v * std::log(M_E * space.m / (r * j_v))) /
         nl2;
}

// ---------------------------------------------------------------------------
// Covariance families

enum class CovKind { identity, ar1, random_spd };

struct CovSpec {
  CovKind kind = CovKind::identity;
  double param = 0.0;  // ar1: correlation rho; random_spd: condition number
};

inline Matrix identity_cov(int dim) { return Matrix::Identity(dim, dim); }

inline Matrix ar1_cov(int dim, double rho) {
  if (!(rho > -1.0 && rho < 1.0))
    throw ArgumentError("ar1_cov: rho must lie in (-1, 1)");
  Matrix s(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      s(i, j) = std::pow(rho, std::abs(i - j));
  return s;
}

// Random rotation times a fixed geometric spectrum on
// [1/sqrt(cond), sqrt(cond)], so both the matrix and its inverse have
// operator norm sqrt(cond).
inline Matrix random_spd_cov(int dim, double cond, std::uint64_t seed) {
  if (!(cond >= 1.0))
    throw ArgumentError("random_spd_cov: condition number must be >= 1");
  Philox rng(seed, /*stream=*/0x5bd1u);
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.next_normal();
  const Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  Vector eigs(dim);
  const double lo = 1.0 / std::sqrt(cond);
  const double hi = std::sqrt(cond);
  for (int i = 0; i < dim; ++i) {
    const double t = dim == 1 ? 0.0 : static_cast<double>(i) / (dim - 1);
    eigs(i) = lo * std::pow(hi / lo, t);
  }
  return q * eigs.asDiagonal() * q.transpose();
}

inline Matrix make_cov(const CovSpec& spec, int dim, std::uint64_t seed) {
  switch (spec.kind) {
    case CovKind::identity:
      return identity_cov(dim);
    case CovKind::ar1:
      return ar1_cov(dim, spec.param);
    case CovKind::random_spd:
      return random_spd_cov(dim, spec.param, seed);
  }
  throw ArgumentError("make_cov: unknown covariance kind");
}

// ---------------------------------------------------------------------------
// Model

// A population canonical-pair model. U and V carry all r + r2 direction
// columns (leading r first); correlations holds the matching canonical
// correlations. sigma_joint is the (p+m) x (p+m) joint covariance.
struct CcaModel {
  Matrix sigma_x;
  Matrix sigma_y;
  Matrix U;
  Matrix V;
  std::vector<double> correlations;
  int r = 1;
  std::vector<int> support_u;  // sorted; rows of the leading r columns of U
  std::vector<int> support_v;
  Matrix sigma_joint;

  int p() const { return static_cast<int>(sigma_x.rows()); }
  int m() const { return static_cast<int>(sigma_y.rows()); }
  int total_rank() const { return static_cast<int>(U.cols()); }
  int r2() const { return total_rank() - r; }

  Matrix U1() const { return U.leftCols(r); }
  Matrix V1() const { return V.leftCols(r); }
  Matrix U2() const { return U.rightCols(r2()); }
  Matrix V2() const { return V.rightCols(r2()); }
  Vector lambda1() const {
    Vector l(r);
    for (int i = 0; i < r; ++i) l(i) = correlations[static_cast<std::size_t>(i)];
    return l;
  }
  // The estimand: product of the leading direction matrices.
  Matrix leading_product() const { return U1() * V1().transpose(); }
  Matrix sigma_xy() const { return sigma_joint.topRightCorner(p(), m()); }
};

namespace detail {

inline void check_support(const std::vector<int>& support, int dim, int r,
                          const char* side) {
  if (static_cast<int>(support.size()) < r)
    throw ArgumentError(std::string("model: support_") + side +
                        " must contain at least r indices");
  std::vector<int> s = support;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw ArgumentError(std::string("model: support_") + side +
                        " has duplicate indices");
  if (s.front() < 0 || s.back() >= dim)
    throw ArgumentError(std::string("model: support_") + side +
                        " index out of range");
}

// Gram-Schmidt in the inner product <a, b> = a' Sigma b, columns processed
// in order so leading sparse columns never mix with later dense ones. Two
// passes per column keep the Gram matrix within 1e-14 of the identity.
inline Matrix sigma_orthonormalize(const Matrix& sigma, Matrix raw) {
  const Eigen::Index k = raw.cols();
  for (Eigen::Index j = 0; j < k; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double coef = raw.col(i).dot(sigma * raw.col(j));
        raw.col(j) -= coef * raw.col(i);
      }
    }
    const double norm2 = raw.col(j).dot(sigma * raw.col(j));
    if (!(norm2 > 1e-24))
      throw ModelConstructionError(
          "model: direction draw collapsed during orthonormalization");
    raw.col(j) /= std::sqrt(norm2);
  }
  return raw;
}

// Flip each column so its largest-magnitude entry is positive. Makes the
// constructed model independent of the sign of the raw Gaussian draw.
inline void canonicalize_column_signs(Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index arg = 0;
    m.col(j).cwiseAbs().maxCoeff(&arg);
    if (m(arg, j) < 0.0) m.col(j) = -m.col(j);
  }
}

}  // namespace detail

// Assemble and validate a model from explicit ingredients. Checks
// Sigma-orthonormality of U and V (within 1e-8), exact zeros outside the
// leading supports, admissible correlations, and positive semidefiniteness
// of the joint covariance (smallest eigenvalue >= -1e-8).
inline CcaModel assemble_model(Matrix sigma_x, Matrix sigma_y, Matrix U,
                               Matrix V, std::vector<double> correlations,
                               int r, std::vector<int> support_u,
                               std::vector<int> support_v) {
  const int p = static_cast<int>(sigma_x.rows());
  const int m = static_cast<int>(sigma_y.rows());
  const int rr = static_cast<int>(U.cols());
  if (sigma_x.cols() != p || sigma_y.cols() != m)
    throw ArgumentError("assemble_model: covariance blocks must be square");
  if (U.rows() != p || V.rows() != m || V.cols() != rr)
    throw ArgumentError("assemble_model: direction shapes do not match");
  if (r < 1 || r > rr)
    throw ArgumentError("assemble_model: leading rank out of range");
  if (static_cast<int>(correlations.size()) != rr)
    throw ArgumentError("assemble_model: need one correlation per column");
  for (int i = 0; i < rr; ++i) {
    if (!(correlations[i] >= 0.0 && correlations[i] < 1.0))
      throw ArgumentError("assemble_model: correlations must lie in [0, 1)");
    if (i > 0 && correlations[i] > correlations[i - 1] + 1e-15)
      throw ArgumentError("assemble_model: correlations must be nonincreasing");
  }
  detail::check_support(support_u, p, r, "u");
  detail::check_support(support_v, m, r, "v");
  std::sort(support_u.begin(), support_u.end());
  std::sort(support_v.begin(), support_v.end());

  auto check_gram = [](const Matrix& sigma, const Matrix& dir, const char* who) {
    const Matrix gram = dir.transpose() * sigma * dir;
    const double dev =
        (gram - Matrix::Identity(dir.cols(), dir.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-8)
      throw ModelConstructionError(
          std::string("assemble_model: ") + who +
          " is not Sigma-orthonormal (deviation " + std::to_string(dev) + ")");
  };
  check_gram(sigma_x, U, "U");
  check_gram(sigma_y, V, "V");

  auto check_zeros = [r](const Matrix& dir, const std::vector<int>& support,
                         const char* who) {
    std::vector<bool> in(static_cast<std::size_t>(dir.rows()), false);
    for (int idx : support) in[static_cast<std::size_t>(idx)] = true;
    for (Eigen::Index i = 0; i < dir.rows(); ++i) {
      if (in[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < r; ++j)
        if (dir(i, j) != 0.0)
          throw ModelConstructionError(
              std::string("assemble_model: ") + who +
              " has a nonzero entry outside its support");
    }
  };
  check_zeros(U, support_u, "U");
  check_zeros(V, support_v, "V");

  Vector lambda_all(rr);
  for (int i = 0; i < rr; ++i) lambda_all(i) = correlations[i];
  const Matrix cross = sigma_x * U * lambda_all.asDiagonal() *
                       V.transpose() * sigma_y;
  Matrix joint(p + m, p + m);
  joint.topLeftCorner(p, p) = sigma_x;
  joint.topRightCorner(p, m) = cross;
  joint.bottomLeftCorner(m, p) = cross.transpose();
  joint.bottomRightCorner(m, m) = sigma_y;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (joint + joint.transpose()),
                                            Eigen::EigenvaluesOnly);
  if (eig.eigenvalues()(0) < -1e-8)
    throw ModelConstructionError(
        "assemble_model: joint covariance is not positive semidefinite "
        "(smallest eigenvalue " +
        std::to_string(eig.eigenvalues()(0)) + ")");

  CcaModel model;
  model.sigma_x = std::move(sigma_x);
  model.sigma_y = std::move(sigma_y);
  model.U = std::move(U);
  model.V = std::move(V);
  model.correlations = std::move(correlations);
  model.r = r;
  model.support_u = std::move(support_u);
  model.support_v = std::move(support_v);
  model.sigma_joint = std::move(joint);
  return model;
}

// Draw a model at a parameter point: marginal covariances from the requested
// family, leading direction columns supported exactly on the given index
// sets, r2 dense residual columns, everything Sigma-orthonormalized in
// order and sign-canonicalized. Identical seeds give bit-identical models.
inline CcaModel build_model(const ParamSpace& space, const CovSpec& cov,
                            const std::vector<double>& correlations,
                            const std::vector<int>& support_u,
                            const std::vector<int>& support_v,
                            std::uint64_t seed) {
  space.validate();
  const int rr = space.r + space.r2;
  if (static_cast<int>(correlations.size()) != rr)
    throw ArgumentError("build_model: need r + r2 correlations");
  for (std::size_t i = 0; i < correlations.size(); ++i) {
    if (!(correlations[i] >= 0.0 && correlations[i] < 1.0))
      throw ArgumentError("build_model: correlations must lie in [0, 1)");
    if (i > 0 && correlations[i] > correlations[i - 1] + 1e-15)
      throw ArgumentError("build_model: correlations must be nonincreasing");
  }
  if (correlations[static_cast<std::size_t>(space.r - 1)] <
      space.lambda - 1e-12)
    throw ArgumentError("build_model: leading correlations fall below lambda");
  if (correlations[0] > space.kappa * space.lambda + 1e-12)
    throw ArgumentError("build_model: correlations exceed kappa*lambda");
  detail::check_support(support_u, space.p, space.r, "u");
  detail::check_support(support_v, space.m, space.r, "v");

  Matrix sigma_x = make_cov(cov, space.p, derive_seed(seed, 0xC0F0));
  Matrix sigma_y = make_cov(cov, space.m, derive_seed(seed, 0xC0F1));

  auto draw_directions = [&](int dim, const std::vector<int>& support,
                             std::uint64_t stream) {
    Philox rng(seed, stream);
    Matrix raw = Matrix::Zero(dim, rr);
    for (int j = 0; j < space.r; ++j)
      for (int idx : support) raw(idx, j) = rng.next_normal();
    for (int j = space.r; j < rr; ++j)
      for (int i = 0; i < dim; ++i) raw(i, j) = rng.next_normal();
    return raw;
  };
  Matrix u = detail::sigma_orthonormalize(
      sigma_x, draw_directions(space.p, support_u, 0xD17u));
  Matrix v = detail::sigma_orthonormalize(
      sigma_y, draw_directions(space.m, support_v, 0xD18u));
  detail::canonicalize_column_signs(u);
  detail::canonicalize_column_signs(v);

  return assemble_model(std::move(sigma_x), std::move(sigma_y), std::move(u),
                        std::move(v), correlations, space.r, support_u,
                        support_v);
}

// Leading correlations geometrically spaced from kappa*lambda down to
// lambda (a single value r = 1 sits at lambda), followed by r2 residual
// correlations at residual_fraction * lambda.
inline std::vector<double> geometric_correlations(const ParamSpace& space,
                                                  double residual_fraction) {
  std::vector<double> corr;
  corr.reserve(static_cast<std::size_t>(space.r + space.r2));
  const double top = space.kappa * space.lambda;
  for (int i = 0; i < space.r; ++i) {
    if (space.r == 1) {
      corr.push_back(space.lambda);
    } else {
      const double t = static_cast<double>(i) / (space.r - 1);
      corr.push_back(top * std::pow(space.lambda / top, t));
    }
  }
  for (int i = 0; i < space.r2; ++i)
    corr.push_back(residual_fraction * space.lambda);
  return corr;
}

// Per-condition membership report for a model against a parameter point.
// Reports rather than throws: harness code decides what to do with it.
struct MembershipReport {
  bool sparsity_u_ok = false;  // condition 1, u side
  bool sparsity_v_ok = false;  // condition 1, v side
  bool spectrum_ok = false;    // condition 2
  bool correlations_ok = false;  // condition 3
  double radius_u = 0.0;
  double radius_v = 0.0;
  double op_sigma_x = 0.0;
  double op_sigma_x_inv = 0.0;
  double op_sigma_y = 0.0;
  double op_sigma_y_inv = 0.0;
  std::vector<std::string> violations;
  bool all_ok() const {
    return sparsity_u_ok && sparsity_v_ok && spectrum_ok && correlations_ok;
  }
};

inline MembershipReport validate_membership(const CcaModel& model,
                                            const ParamSpace& space) {
  space.validate();
  MembershipReport rep;
  rep.radius_u = weak_lq_radius(model.U1(), space.q);
  rep.radius_v = weak_lq_radius(model.V1(), space.q);
  rep.sparsity_u_ok = rep.radius_u <= space.s_u + 1e-12;
  rep.sparsity_v_ok = rep.radius_v <= space.s_v + 1e-12;
  if (!rep.sparsity_u_ok)
    rep.violations.push_back("condition 1: weak-lq radius of U1 is " +
                             std::to_string(rep.radius_u) + " > s_u");
  if (!rep.sparsity_v_ok)
    rep.violations.push_back("condition 1: weak-lq radius of V1 is " +
                             std::to_string(rep.radius_v) + " > s_v");

  auto spectrum = [](const Matrix& sigma, double& op, double& op_inv) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(sigma.rows() - 1);
    op = std::abs(hi);
    op_inv = lo > 0.0 ? 1.0 / lo : std::numeric_limits<double>::infinity();
  };
  spectrum(model.sigma_x, rep.op_sigma_x, rep.op_sigma_x_inv);
  spectrum(model.sigma_y, rep.op_sigma_y, rep.op_sigma_y_inv);
  const double worst =
      std::max({rep.op_sigma_x, rep.op_sigma_x_inv, rep.op_sigma_y,
                rep.op_sigma_y_inv});
  rep.spectrum_ok = worst <= space.M_bound + 1e-12;
  if (!rep.spectrum_ok)
    rep.violations.push_back(
        "condition 2: covariance spectrum bound is " + std::to_string(worst) +
        " > M = " + std::to_string(space.M_bound));

  rep.correlations_ok = true;
  const auto& corr = model.correlations;
  if (model.r > static_cast<int>(corr.size())) {
    rep.correlations_ok = false;
    rep.violations.push_back("condition 3: fewer correlations than rank");
  } else {
    const double top = corr.front();
    const double bottom = corr[static_cast<std::size_t>(model.r - 1)];
    if (!(bottom >= space.lambda - 1e-12)) {
      rep.correlations_ok = false;
      rep.violations.push_back("condition 3: lambda_r = " +
                               std::to_string(bottom) + " falls below lambda");
    }
    if (!(top <= space.kappa * space.lambda + 1e-12)) {
      rep.correlations_ok = false;
      rep.violations.push_back("condition 3: lambda_1 = " +
                               std::to_string(top) +
                               " exceeds kappa*lambda");
    }
    if (!(space.kappa * space.lambda <= 1.0 - space.c0)) {
      rep.correlations_ok = false;
      rep.violations.push_back(
          "condition 3: kappa*lambda exceeds 1 - c0");
    }
    for (int i = 1; i < model.r; ++i)
      if (corr[i] > corr[i - 1] + 1e-15) {
        rep.correlations_ok = false;
        rep.violations.push_back("condition 3: correlations not nonincreasing");
        break;
      }
  }
  return rep;
}

}  // namespace scca
