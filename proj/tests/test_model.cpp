#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "scca/model.hpp"
#include "scca/rng.hpp"
#include "test_support.hpp"

using Catch::Approx;
using scca::Matrix;
using scca::ParamSpace;
using scca::Vector;

namespace {

ParamSpace base_space() {
  ParamSpace s;
  s.p = 16;
  s.m = 16;
  s.r = 1;
  s.q = 0.0;
  s.s_u = 2.0;
  s.s_v = 2.0;
  s.lambda = 0.9;
  return s;
}

}  // namespace

TEST_CASE("parameter space validation", "[model]") {
  ParamSpace s = base_space();
  REQUIRE_NOTHROW(s.validate());
  SECTION("rank bounds") {
    s.r = 10;
    s.r2 = 8;  // r + r2 > min(p, m)
    REQUIRE_THROWS_AS(s.validate(), scca::ArgumentError);
  }
  SECTION("lambda range") {
    s.lambda = 1.0;
    REQUIRE_THROWS_AS(s.validate(), scca::ArgumentError);
  }
  SECTION("gap margin") {
    s.lambda = 0.93;  // kappa * lambda = 0.9765 > 1 - c0 = 0.95
    REQUIRE_THROWS_AS(s.validate(), scca::ArgumentError);
  }
  SECTION("sparsity exponent") {
    s.q = 2.0;
    REQUIRE_THROWS_AS(s.validate(), scca::ArgumentError);
  }
  SECTION("spectral bound") {
    s.M_bound = 1.0;
    REQUIRE_THROWS_AS(s.validate(), scca::ArgumentError);
  }
}

TEST_CASE("weak lq radius", "[model]") {
  Matrix u = Matrix::Zero(5, 2);
  u(0, 0) = 2.0;        // row norms 2, 1, 0.5, 0, ~1e-13
  u(1, 1) = 1.0;
  u(2, 0) = 0.5;
  u(4, 0) = 1e-13;

  // q = 0 counts rows with norm above the zero threshold
  REQUIRE(scca::weak_lq_radius(u, 0.0) == Approx(3.0).margin(1e-15));

  // q = 1: max_j j * n_(j) over ordered norms {2, 1, 0.5, 1e-13, 0}
  REQUIRE(scca::weak_lq_radius(u, 1.0) == Approx(2.0).margin(1e-12));

  // q = 0.5: max of {sqrt(2), 2, 3 sqrt(0.5), ...}
  REQUIRE(scca::weak_lq_radius(u, 0.5) ==
          Approx(2.1213203435596424).margin(1e-12));

  REQUIRE(scca::weak_lq_radius(Matrix::Zero(4, 1), 0.0) == 0.0);
  REQUIRE_THROWS_AS(scca::weak_lq_radius(u, 2.0), scca::ArgumentError);
}

TEST_CASE("effective sparsity, exact support regime", "[model]") {
  ParamSpace s = base_space();
  s.p = 8;
  s.m = 8;
  for (int su = 1; su <= 10; ++su) {
    for (int sv = 1; sv <= 10; ++sv) {
      s.s_u = su;
      s.s_v = sv;
      const auto eff = scca::effective_sparsity(s, 1000);
      REQUIRE(eff.k_u == std::min(su, 8));
      REQUIRE(eff.k_v == std::min(sv, 8));
      REQUIRE(eff.x_u == Approx(std::min<double>(su, 8)).margin(0.0));
    }
  }
  REQUIRE_THROWS_AS(scca::effective_sparsity(s, 0), scca::ArgumentError);
}

TEST_CASE("effective sparsity, weak-l1 regime", "[model]") {
  ParamSpace s = base_space();
  s.q = 1.0;

  SECTION("strong signal saturates at the dimension") {
    // n lambda^2 = 810: the constraint is slack on all of (0, 16]
    const auto eff = scca::effective_sparsity(s, 1000);
    REQUIRE(eff.x_u == Approx(16.0).margin(0.0));
    REQUIRE(eff.k_u == 16);
    REQUIRE(eff.k_v == 16);
  }

  SECTION("weak signal has an interior fixed point") {
    // n lambda^2 = 8.1; root of x = 2 sqrt(8.1 / (1 + log(16 e / x))),
    // frozen from a grid search at step 1e-3 and refined independently
    const auto eff = scca::effective_sparsity(s, 10);
    REQUIRE(eff.x_u == Approx(2.9648983248538627).margin(1e-6));
    REQUIRE(eff.k_u == 3);
    // the returned point is feasible: x <= bound(x)
    const double bound =
        2.0 * std::sqrt(8.1 / (1.0 + std::log(16.0 * M_E / eff.x_u)));
    REQUIRE(eff.x_u <= bound + 1e-12);
  }

  SECTION("zero radius is degenerate") {
    s.s_u = 0.0;
    const auto eff = scca::effective_sparsity(s, 1000);
    REQUIRE(eff.k_u == 0);
    REQUIRE_THROWS_AS(scca::minimax_rate(s, 1000), scca::DegenerateModelError);
  }
}

TEST_CASE("risk benchmark values", "[model]") {
  ParamSpace s = base_space();

  // frozen reference: (r(k_u+k_v) + k_u log(ep/k_u) + k_v log(em/k_v)) / (n l^2)
  // at k = 2, p = m = 16, n = 1000, lambda = 0.9
  const double rate = scca::minimax_rate(s, 1000);
  REQUIRE(rate == Approx(0.02014539032928314).epsilon(1e-14));

  // p = m = 8 values used by the Monte Carlo benchmark grid
  ParamSpace s8 = s;
  s8.p = 8;
  s8.m = 8;
  REQUIRE(scca::minimax_rate(s8, 250) ==
          Approx(0.06688976515792378).epsilon(1e-14));
  REQUIRE(scca::minimax_rate(s8, 500) ==
          Approx(0.03344488257896189).epsilon(1e-14));
  REQUIRE(scca::minimax_rate(s8, 1000) ==
          Approx(0.016722441289480944).epsilon(1e-14));
  REQUIRE(scca::minimax_rate(s8, 2000) ==
          Approx(0.008361220644740472).epsilon(1e-14));

  // with q = 0 the effective support is n-free, so the rate halves exactly
  // when n doubles
  REQUIRE(scca::minimax_rate(s8, 2000) ==
          Approx(0.5 * scca::minimax_rate(s8, 1000)).epsilon(1e-15));

  // saturated weak-l1 point: k = p = 16 gives (32 + 32) / 810
  ParamSpace sq = s;
  sq.q = 1.0;
  REQUIRE(scca::minimax_rate(sq, 1000) ==
          Approx(64.0 / 810.0).epsilon(1e-14));

  SECTION("monotone in n and in dimension") {
    double prev = scca::minimax_rate(s8, 100);
    for (int n : {200, 400, 800, 1600}) {
      const double cur = scca::minimax_rate(s8, n);
      REQUIRE(cur < prev);
      prev = cur;
    }
    ParamSpace grow = s8;
    double prev_dim = scca::minimax_rate(grow, 1000);
    for (int dim : {16, 32, 64}) {
      grow.p = dim;
      grow.m = dim;
      const double cur = scca::minimax_rate(grow, 1000);
      REQUIRE(cur > prev_dim);
      prev_dim = cur;
    }
  }
}

TEST_CASE("joint and per-column benchmarks cross over", "[model]") {
  // at r = 1 and matching radii the two programs share their support size k,
  // and joint - individual = r (k_u + k_v) / (n lambda^2) exactly
  ParamSpace s = base_space();
  const double joint = scca::minimax_rate(s, 1000);
  const double individual = scca::minimax_rate_individual(s, 1000, 2.0, 2.0);
  const double nl2 = 1000 * 0.9 * 0.9;
  REQUIRE(joint - individual == Approx(4.0 / nl2).epsilon(1e-12));
  // each log factor is >= r = 1 here, so the individual rate keeps at least
  // half the joint rate
  REQUIRE(individual >= 0.5 * joint);
  REQUIRE(individual < joint);

  // higher rank with room to spare flips the order: the per-column program
  // pays the log term r times
  ParamSpace hi = s;
  hi.p = 100;
  hi.m = 100;
  hi.r = 4;
  hi.lambda = 0.5;
  hi.kappa = 1.0;
  const double joint_hi = scca::minimax_rate(hi, 1000);
  const double individual_hi =
      scca::minimax_rate_individual(hi, 1000, 2.0, 2.0);
  REQUIRE(individual_hi > joint_hi);
}

TEST_CASE("covariance families", "[model]") {
  const Matrix ar = scca::ar1_cov(16, 0.3);
  REQUIRE(ar(0, 0) == 1.0);
  REQUIRE(ar(3, 5) == Approx(0.09).margin(1e-15));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(ar, Eigen::EigenvaluesOnly);
  // spectrum of the rho = 0.3 family stays within the default M = 3 band
  REQUIRE(eig.eigenvalues()(0) > 1.0 / 3.0);
  REQUIRE(eig.eigenvalues()(15) < 3.0);
  REQUIRE_THROWS_AS(scca::ar1_cov(4, 1.0), scca::ArgumentError);

  const Matrix spd = scca::random_spd_cov(6, 4.0, 17);
  REQUIRE(testsup::max_abs_diff(spd, spd.transpose()) < 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> eig2(spd, Eigen::EigenvaluesOnly);
  REQUIRE(eig2.eigenvalues()(0) == Approx(0.5).margin(1e-10));
  REQUIRE(eig2.eigenvalues()(5) == Approx(2.0).margin(1e-10));
  // deterministic in the seed
  REQUIRE(testsup::max_abs_diff(spd, scca::random_spd_cov(6, 4.0, 17)) == 0.0);
  REQUIRE(testsup::max_abs_diff(spd, scca::random_spd_cov(6, 4.0, 18)) > 1e-3);
}

TEST_CASE("a two-dimensional model is explicit", "[model]") {
  ParamSpace s = base_space();
  s.p = 2;
  s.m = 2;
  s.s_u = 1.0;
  s.s_v = 1.0;
  s.lambda = 0.5;
  const scca::CcaModel model = scca::build_model(
      s, scca::CovSpec{}, {0.5}, {0}, {1}, 99);
  // sign canonicalization makes the directions +e1 and +e2, so the cross
  // block is exactly 0.5 e1 e2'
  REQUIRE(model.U(0, 0) == Approx(1.0).margin(1e-12));
  REQUIRE(model.U(1, 0) == 0.0);
  REQUIRE(model.V(0, 0) == 0.0);
  REQUIRE(model.V(1, 0) == Approx(1.0).margin(1e-12));
  const Matrix cross = model.sigma_xy();
  REQUIRE(cross(0, 1) == Approx(0.5).margin(1e-12));
  REQUIRE(std::abs(cross(0, 0)) < 1e-15);
  REQUIRE(std::abs(cross(1, 0)) < 1e-15);
  REQUIRE(std::abs(cross(1, 1)) < 1e-15);
}

TEST_CASE("built models satisfy their construction contract", "[model]") {
  ParamSpace s = base_space();
  s.p = 12;
  s.m = 10;
  s.r = 2;
  s.r2 = 1;
  s.s_u = 3.0;
  s.s_v = 3.0;
  s.lambda = 0.5;
  s.kappa = 1.2;
  const std::vector<int> sup_u{1, 5, 9};
  const std::vector<int> sup_v{0, 3, 7};
  const auto corr = scca::geometric_correlations(s, 0.1);
  const scca::CcaModel model = scca::build_model(
      s, scca::CovSpec{scca::CovKind::ar1, 0.3}, corr, sup_u, sup_v, 7);

  // Sigma-orthonormality of all r + r2 columns
  REQUIRE(testsup::max_abs_diff(
              model.U.transpose() * model.sigma_x * model.U,
              Matrix::Identity(3, 3)) < 1e-10);
  REQUIRE(testsup::max_abs_diff(
              model.V.transpose() * model.sigma_y * model.V,
              Matrix::Identity(3, 3)) < 1e-10);

  // leading columns are exactly zero off support
  for (int i = 0; i < 12; ++i) {
    if (i == 1 || i == 5 || i == 9) continue;
    REQUIRE(model.U(i, 0) == 0.0);
    REQUIRE(model.U(i, 1) == 0.0);
  }

  // the estimand never exceeds the truncation threshold scale M sqrt(r)
  REQUIRE(model.leading_product().norm() <= 3.0 * std::sqrt(2.0));

  // joint covariance is positive definite
  Eigen::SelfAdjointEigenSolver<Matrix> eig(model.sigma_joint,
                                            Eigen::EigenvaluesOnly);
  REQUIRE(eig.eigenvalues()(0) > 0.0);

  // deterministic in the seed
  const scca::CcaModel again = scca::build_model(
      s, scca::CovSpec{scca::CovKind::ar1, 0.3}, corr, sup_u, sup_v, 7);
  REQUIRE(testsup::max_abs_diff(model.U, again.U) == 0.0);
  REQUIRE(testsup::max_abs_diff(model.V, again.V) == 0.0);

  SECTION("correlation admissibility is enforced") {
    REQUIRE_THROWS_AS(
        scca::build_model(s, scca::CovSpec{}, {0.6, 0.4, 0.05}, sup_u, sup_v, 7),
        scca::ArgumentError);  // 0.4 falls below lambda
    REQUIRE_THROWS_AS(
        scca::build_model(s, scca::CovSpec{}, {0.7, 0.5, 0.05}, sup_u, sup_v, 7),
        scca::ArgumentError);  // 0.7 exceeds kappa * lambda
  }
}

TEST_CASE("assemble_model rejects broken ingredients", "[model]") {
  const Matrix id2 = Matrix::Identity(2, 2);
  Matrix u = Matrix::Zero(2, 1);
  Matrix v = Matrix::Zero(2, 1);
  u(0, 0) = 1.0;
  v(1, 0) = 1.0;
  REQUIRE_NOTHROW(scca::assemble_model(id2, id2, u, v, {0.5}, 1, {0}, {1}));

  SECTION("non-orthonormal directions") {
    Matrix long_u = 2.0 * u;
    REQUIRE_THROWS_AS(
        scca::assemble_model(id2, id2, long_u, v, {0.5}, 1, {0}, {1}),
        scca::ModelConstructionError);
  }
  SECTION("support leak") {
    REQUIRE_THROWS_AS(
        scca::assemble_model(id2, id2, u, v, {0.5}, 1, {1}, {1}),
        scca::ModelConstructionError);
  }
  SECTION("correlations out of range") {
    REQUIRE_THROWS_AS(
        scca::assemble_model(id2, id2, u, v, {1.0}, 1, {0}, {1}),
        scca::ArgumentError);
  }
  SECTION("increasing correlations") {
    Matrix u2(2, 2), v2(2, 2);
    u2 << 1, 0, 0, 1;
    v2 << 0, 1, 1, 0;
    REQUIRE_THROWS_AS(scca::assemble_model(id2, id2, u2, v2, {0.3, 0.5}, 1,
                                           {0}, {1}),
                      scca::ArgumentError);
  }
}

TEST_CASE("geometric correlation ladders", "[model]") {
  ParamSpace s = base_space();
  s.lambda = 0.5;
  REQUIRE(scca::geometric_correlations(s, 0.0) == std::vector<double>{0.5});

  s.r = 3;
  s.r2 = 2;
  s.kappa = 1.1;
  const auto corr = scca::geometric_correlations(s, 0.1);
  REQUIRE(corr.size() == 5);
  REQUIRE(corr[0] == Approx(0.55).margin(1e-15));
  REQUIRE(corr[1] == Approx(0.52440442408507577).margin(1e-12));
  REQUIRE(corr[2] == Approx(0.5).margin(1e-15));
  REQUIRE(corr[3] == Approx(0.05).margin(1e-15));
  REQUIRE(corr[4] == Approx(0.05).margin(1e-15));
}

TEST_CASE("membership report", "[model]") {
  ParamSpace s = base_space();
  s.p = 8;
  s.m = 8;
  s.lambda = 0.5;

  const scca::CcaModel model = scca::build_model(
      s, scca::CovSpec{}, {0.5}, {2, 6}, {1, 4}, 3);
  const auto rep = scca::validate_membership(model, s);
  REQUIRE(rep.all_ok());
  REQUIRE(rep.violations.empty());
  REQUIRE(rep.radius_u == Approx(2.0).margin(1e-12));
  REQUIRE(rep.op_sigma_x == Approx(1.0).margin(1e-12));

  SECTION("correlation ceiling violation is named") {
    // directly assembled model whose correlation exceeds kappa * lambda
    const Matrix id8 = Matrix::Identity(8, 8);
    Matrix u = Matrix::Zero(8, 1), v = Matrix::Zero(8, 1);
    u(2, 0) = 1.0;
    v(1, 0) = 1.0;
    const auto loud =
        scca::assemble_model(id8, id8, u, v, {0.8}, 1, {2}, {1});
    const auto bad = scca::validate_membership(loud, s);
    REQUIRE_FALSE(bad.correlations_ok);
    REQUIRE_FALSE(bad.all_ok());
    bool mentioned = false;
    for (const auto& msg : bad.violations)
      if (msg.find("condition 3") != std::string::npos) mentioned = true;
    REQUIRE(mentioned);
  }

  SECTION("spectral violation is named") {
    ParamSpace tight = s;
    const scca::CcaModel heavy = scca::build_model(
        tight, scca::CovSpec{scca::CovKind::ar1, 0.9}, {0.5}, {2, 6}, {1, 4},
        3);
    const auto bad = scca::validate_membership(heavy, tight);
    REQUIRE_FALSE(bad.spectrum_ok);
    bool mentioned = false;
    for (const auto& msg : bad.violations)
      if (msg.find("condition 2") != std::string::npos) mentioned = true;
    REQUIRE(mentioned);
  }

  SECTION("ar1 at rho 0.3 passes the default spectral bound") {
    const scca::CcaModel mild = scca::build_model(
        s, scca::CovSpec{scca::CovKind::ar1, 0.3}, {0.5}, {2, 6}, {1, 4}, 3);
    const auto rep2 = scca::validate_membership(mild, s);
    REQUIRE(rep2.spectrum_ok);
    REQUIRE(rep2.op_sigma_x < 3.0);
    REQUIRE(rep2.op_sigma_x_inv < 3.0);
  }
}
