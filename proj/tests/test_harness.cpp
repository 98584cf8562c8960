#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scca/harness.hpp"
#include "test_support.hpp"

using Catch::Approx;
using scca::EstimatorKind;
using scca::ExperimentConfig;
using scca::RiskRow;
using scca::RiskTable;
using scca::Vary;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.space.p = 6;
  c.space.m = 6;
  c.space.r = 1;
  c.space.q = 0.0;
  c.space.s_u = 2.0;
  c.space.s_v = 2.0;
  c.space.lambda = 0.9;
  c.n_grid = {100, 200};
  c.replicates = 3;
  c.estimators = {EstimatorKind::sparse, EstimatorKind::classical};
  c.base_seed = 5;
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RiskTable synthetic_table(double c, const std::vector<int>& ns,
                          int reps = 2) {
  RiskTable t;
  for (int n : ns) {
    for (int rep = 0; rep < reps; ++rep) {
      RiskRow row;
      row.n = n;
      row.p = 6;
      row.m = 6;
      row.estimator = "sparse";
      row.replicate = rep;
      row.loss = c / n;
      row.eps_n_sq = c / n;
      t.rows.push_back(row);
    }
  }
  return t;
}

}  // namespace

TEST_CASE("experiment config validation", "[harness]") {
  auto c = small_config();
  REQUIRE_NOTHROW(c.validate());

  SECTION("replicates") {
    c.replicates = 1;
    REQUIRE_THROWS_AS(c.validate(), scca::ArgumentError);
  }
  SECTION("empty n grid") {
    c.n_grid.clear();
    REQUIRE_THROWS_AS(c.validate(), scca::ArgumentError);
  }
  SECTION("tiny n") {
    c.n_grid = {100, 1};
    REQUIRE_THROWS_AS(c.validate(), scca::ArgumentError);
  }
  SECTION("no estimators") {
    c.estimators.clear();
    REQUIRE_THROWS_AS(c.validate(), scca::ArgumentError);
  }
  SECTION("residual fraction must stay below the ceiling") {
    c.residual.r2 = 1;
    c.residual.lambda_fraction = 0.25;  // ceiling defaults to 0.2
    REQUIRE_THROWS_AS(c.validate(), scca::ArgumentError);
    c.residual.lambda_fraction = 0.1;
    REQUIRE_NOTHROW(c.validate());
  }
  SECTION("every grid point must define a valid space") {
    c.dim_grid = {{6, 6}, {0, 6}};  // zero dimension is rejected per point
    REQUIRE_THROWS_AS(c.validate(), scca::ArgumentError);
    c.dim_grid = {{6, 6}, {1, 6}};  // p = 1 merely clamps the support size
    REQUIRE_NOTHROW(c.validate());
  }
}

TEST_CASE("experiment results do not depend on the worker count",
          "[harness]") {
  const auto config = small_config();
  setenv("SPARSE_CCA_THREADS", "1", 1);
  const auto serial = scca::run_experiment(config);
  setenv("SPARSE_CCA_THREADS", "4", 1);
  const auto parallel = scca::run_experiment(config);
  unsetenv("SPARSE_CCA_THREADS");

  REQUIRE(serial.rows.size() == parallel.rows.size());
  REQUIRE(serial.rows.size() == 12);  // 2 n * 3 reps * 2 estimators
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    REQUIRE(serial.rows[i].estimator == parallel.rows[i].estimator);
    REQUIRE(serial.rows[i].n == parallel.rows[i].n);
    REQUIRE(serial.rows[i].seed == parallel.rows[i].seed);
    REQUIRE(serial.rows[i].loss == parallel.rows[i].loss);
    REQUIRE(serial.rows[i].proj_loss_u == parallel.rows[i].proj_loss_u);
    REQUIRE(serial.rows[i].support_exact == parallel.rows[i].support_exact);
  }
  REQUIRE(serial.max_certificate == parallel.max_certificate);
  REQUIRE(serial.certificates_checked == parallel.certificates_checked);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "scca_harness_threads";
  fs::create_directories(dir);
  scca::write_risks_csv(dir / "a.csv", serial);
  scca::write_risks_csv(dir / "b.csv", parallel);
  REQUIRE(read_file(dir / "a.csv") == read_file(dir / "b.csv"));
  fs::remove_all(dir);
}

TEST_CASE("slope fit recovers an exact power law", "[harness]") {
  const auto t = synthetic_table(3.7, {100, 200, 400});
  const auto fit = scca::fit_rate_slope(t, EstimatorKind::sparse, Vary::n);
  REQUIRE(fit.slope == Approx(-1.0).margin(1e-12));
  REQUIRE(fit.ratio.min == Approx(1.0).margin(1e-12));
  REQUIRE(fit.ratio.median == Approx(1.0).margin(1e-12));
  REQUIRE(fit.ratio.max == Approx(1.0).margin(1e-12));

  // against log eps the same table is a perfect unit-slope line
  const auto dim_fit =
      scca::fit_rate_slope(t, EstimatorKind::sparse, Vary::dimension);
  REQUIRE(dim_fit.slope == Approx(1.0).margin(1e-12));
}

TEST_CASE("slope fit input validation", "[harness]") {
  SECTION("needs three grid points") {
    const auto t = synthetic_table(1.0, {100, 200});
    REQUIRE_THROWS_AS(scca::fit_rate_slope(t, EstimatorKind::sparse, Vary::n),
                      scca::ArgumentError);
  }
  SECTION("needs positive mean losses") {
    auto t = synthetic_table(0.0, {100, 200, 400});
    REQUIRE_THROWS_AS(scca::fit_rate_slope(t, EstimatorKind::sparse, Vary::n),
                      scca::ArgumentError);
  }
  SECTION("rejects collinear regressors") {
    auto t = synthetic_table(2.0, {100});
    auto more = synthetic_table(2.0, {100});
    for (auto& row : more.rows) row.p = 8;
    auto third = synthetic_table(2.0, {100});
    for (auto& row : third.rows) row.p = 12;
    t.rows.insert(t.rows.end(), more.rows.begin(), more.rows.end());
    t.rows.insert(t.rows.end(), third.rows.begin(), third.rows.end());
    REQUIRE_THROWS_AS(scca::fit_rate_slope(t, EstimatorKind::sparse, Vary::n),
                      scca::ArgumentError);
  }
  SECTION("error rows are excluded") {
    auto t = synthetic_table(3.7, {100, 200, 400});
    const auto clean = scca::fit_rate_slope(t, EstimatorKind::sparse, Vary::n);
    RiskRow bad;
    bad.n = 100;
    bad.p = 6;
    bad.m = 6;
    bad.estimator = "sparse";
    bad.loss = 999.0;
    bad.eps_n_sq = 0.037;
    bad.error = "synthetic failure";
    t.rows.push_back(bad);
    const auto refit = scca::fit_rate_slope(t, EstimatorKind::sparse, Vary::n);
    REQUIRE(refit.slope == clean.slope);
    REQUIRE(refit.ratio.max == clean.ratio.max);
  }
}

TEST_CASE("rows carry the benchmark rate of their own grid point",
          "[harness]") {
  auto config = small_config();
  config.estimators = {EstimatorKind::classical};
  config.dim_grid = {{6, 6}, {8, 8}};
  const auto table = scca::run_experiment(config);
  REQUIRE(table.rows.size() == 12);  // 2 n * 2 dims * 3 reps
  REQUIRE(table.failed_rows == 0);
  for (const auto& row : table.rows) {
    const auto space = config.space_at(row.p, row.m);
    REQUIRE(row.eps_n_sq == scca::minimax_rate(space, row.n));
    REQUIRE_FALSE(row.support_exact);  // classical support is everything
  }
}

TEST_CASE("oracle rows sit on the true support at exact sparsity",
          "[harness]") {
  auto config = small_config();
  config.estimators = {EstimatorKind::oracle};
  const auto table = scca::run_experiment(config);
  REQUIRE(table.failed_rows == 0);
  REQUIRE(table.certificates_checked == 0);  // no sparse fits requested
  for (const auto& row : table.rows) {
    REQUIRE(row.error.empty());
    REQUIRE(row.support_exact);
    REQUIRE(row.loss >= 0.0);
    REQUIRE(std::isfinite(row.loss));
  }
}

TEST_CASE("budget failures are tagged per row and leave the rest running",
          "[harness]") {
  auto config = small_config();
  config.budget = 1;
  const auto table = scca::run_experiment(config);
  std::size_t sparse_rows = 0;
  for (const auto& row : table.rows) {
    if (row.estimator == "sparse") {
      ++sparse_rows;
      REQUIRE(row.error.find("budget") != std::string::npos);
      REQUIRE(std::isfinite(row.eps_n_sq));  // the benchmark rate still known
    } else {
      REQUIRE(row.error.empty());
    }
  }
  REQUIRE(sparse_rows == 6);
  REQUIRE(table.failed_rows == 6);
  REQUIRE(table.certificates_checked == 0);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "scca_harness_budget";
  fs::create_directories(dir);
  scca::write_risks_csv(dir / "risks.csv", table);
  const std::string text = read_file(dir / "risks.csv");
  REQUIRE(text.rfind("n,p,m,s_u,s_v,r,q,lambda,estimator,replicate,seed,loss,"
                     "proj_loss_u,proj_loss_v,truncated,support_exact,"
                     "eps_n_sq,error\n",
                     0) == 0);
  // error rows leave the numeric result fields empty
  REQUIRE(text.find(",,,,,") != std::string::npos);
  REQUIRE(text.find("exceeds the budget") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("bootstrap interval for the mean", "[harness]") {
  const std::vector<double> flat(12, 2.5);
  const auto c = scca::bootstrap_mean_ci(flat, 99);
  REQUIRE(c.mean == 2.5);
  REQUIRE(c.lo == 2.5);
  REQUIRE(c.hi == 2.5);

  std::vector<double> values;
  for (int i = 1; i <= 10; ++i) values.push_back(static_cast<double>(i));
  const auto a = scca::bootstrap_mean_ci(values, 7);
  const auto b = scca::bootstrap_mean_ci(values, 7);
  REQUIRE(a.lo == b.lo);
  REQUIRE(a.hi == b.hi);
  REQUIRE(a.lo <= a.mean);
  REQUIRE(a.mean <= a.hi);
  REQUIRE(a.lo < a.hi);

  REQUIRE_THROWS_AS(scca::bootstrap_mean_ci({}, 1), scca::ArgumentError);
}

TEST_CASE("worker count env override", "[harness]") {
  setenv("SPARSE_CCA_THREADS", "3", 1);
  REQUIRE(scca::worker_count() == 3);
  setenv("SPARSE_CCA_THREADS", "0", 1);
  REQUIRE(scca::worker_count() >= 1);
  setenv("SPARSE_CCA_THREADS", "pelican", 1);
  REQUIRE(scca::worker_count() >= 1);
  unsetenv("SPARSE_CCA_THREADS");
  REQUIRE(scca::worker_count() >= 1);
}

TEST_CASE("residual spectrum propagates into the grid spaces", "[harness]") {
  auto config = small_config();
  config.space.p = 8;
  config.space.m = 8;
  config.estimators = {EstimatorKind::oracle};
  config.residual.r2 = 1;
  config.residual.lambda_fraction = 0.1;
  REQUIRE(config.space_at(8, 8).r2 == 1);
  const auto table = scca::run_experiment(config);
  REQUIRE(table.failed_rows == 0);
  for (const auto& row : table.rows) REQUIRE(row.error.empty());
}
