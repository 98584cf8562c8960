#pragma once

// Monte Carlo workbench: run estimator grids over (n, dimension) points with
// fresh models per replicate, collect a risk table, and fit log-log rate
// slopes against the theoretical benchmark.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "scca/csv.hpp"
#include "scca/errors.hpp"
#include "scca/estimators.hpp"
#include "scca/model.hpp"
#include "scca/rng.hpp"
#include "scca/sampler.hpp"

namespace scca {

enum class EstimatorKind { sparse, oracle, classical };

inline const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::sparse: return "sparse";
    case EstimatorKind::oracle: return "oracle";
    case EstimatorKind::classical: return "classical";
  }
  return "?";
}

inline EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "sparse") return EstimatorKind::sparse;
  if (name == "oracle") return EstimatorKind::oracle;
  if (name == "classical") return EstimatorKind::classical;
  throw ArgumentError("unknown estimator '" + name +
                      "' (expected sparse, oracle, or classical)");
}

struct ResidualSpec {
  int r2 = 0;
  double lambda_fraction = 0.0;  // residual correlations at fraction * lambda
};

struct ExperimentConfig {
  ParamSpace space;
  std::vector<int> n_grid;
  std::vector<std::pair<int, int>> dim_grid;  // optional (p, m) sweep
  int replicates = 2;
  std::vector<EstimatorKind> estimators;
  CovSpec cov;
  ResidualSpec residual;
  std::uint64_t base_seed = 1;
  std::uint64_t budget = 10'000'000;
  double ass2_c = 0.2;  // admissible ceiling for the residual fraction

  void validate() const {
    if (replicates < 2)
      throw ArgumentError("experiment: replicates must be at least 2");
    if (n_grid.empty())
      throw ArgumentError("experiment: n_grid must not be empty");
    for (int n : n_grid)
      if (n < 2) throw ArgumentError("experiment: every n must be at least 2");
    if (estimators.empty())
      throw ArgumentError("experiment: at least one estimator is required");
    if (!(ass2_c > 0.0 && ass2_c <= 1.0))
      throw ArgumentError("experiment: the residual ceiling must lie in (0, 1]");
    if (residual.r2 < 0)
      throw ArgumentError("experiment: residual rank must be nonnegative");
    if (residual.r2 > 0) {
      if (!(residual.lambda_fraction > 0.0 &&
            residual.lambda_fraction < ass2_c))
        throw ArgumentError(
            "experiment: residual fraction must lie in (0, " +
            std::to_string(ass2_c) + ")");
    }
    for (const auto& point : grid_points()) {
      ParamSpace s = space_at(point.p, point.m);
      s.validate();
    }
    if (budget < 1) throw ArgumentError("experiment: budget must be positive");
  }

  struct GridPoint {
    int n = 0;
    int p = 0;
    int m = 0;
  };

  std::vector<GridPoint> grid_points() const {
    std::vector<std::pair<int, int>> dims = dim_grid;
    if (dims.empty()) dims.push_back({space.p, space.m});
    std::vector<GridPoint> points;
    for (int n : n_grid)
      for (const auto& d : dims) points.push_back({n, d.first, d.second});
    return points;
  }

  ParamSpace space_at(int p, int m) const {
    ParamSpace s = space;
    s.p = p;
    s.m = m;
    s.r2 = residual.r2;
    return s;
  }
};

struct RiskRow {
  int n = 0;
  int p = 0;
  int m = 0;
  double s_u = 0.0;
  double s_v = 0.0;
  int r = 0;
  double q = 0.0;
  double lambda = 0.0;
  std::string estimator;
  int replicate = 0;
  std::uint64_t seed = 0;  // the replicate's sampling seed
  double loss = std::numeric_limits<double>::quiet_NaN();
  double proj_loss_u = std::numeric_limits<double>::quiet_NaN();
  double proj_loss_v = std::numeric_limits<double>::quiet_NaN();
  bool truncated = false;
  bool support_exact = false;
  double eps_n_sq = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success
};

struct RiskTable {
  std::vector<RiskRow> rows;
  // optimality certificates <sxy, oracle - sparse> gathered wherever the
  // sparse estimator ran; all must be <= 0 up to roundoff
  double max_certificate = -std::numeric_limits<double>::infinity();
  std::uint64_t certificates_checked = 0;
  std::uint64_t failed_rows = 0;
};

inline int worker_count() {
  if (const char* env = std::getenv("SPARSE_CCA_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace detail {

inline std::vector<int> draw_support(int dim, int size, Philox& rng) {
  std::vector<int> all(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) all[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < size; ++i) {
    const int j = i + static_cast<int>(
                          rng.next_below(static_cast<std::uint64_t>(dim - i)));
    std::swap(all[static_cast<std::size_t>(i)],
              all[static_cast<std::size_t>(j)]);
  }
  std::vector<int> support(all.begin(), all.begin() + size);
  std::sort(support.begin(), support.end());
  return support;
}

struct ReplicateResult {
  std::vector<RiskRow> rows;
  double certificate = 0.0;
  bool has_certificate = false;
};

}  // namespace detail

// Run the full grid. Each (grid point, replicate) pair is an independent job
// with seeds derived from (base_seed, point index, replicate index), so the
// table is identical no matter how many workers run (SPARSE_CCA_THREADS
// caps the pool). Estimator failures are recorded as row error tags and the
// run continues.
inline RiskTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto points = config.grid_points();
  const int reps = config.replicates;
  const std::size_t total_jobs = points.size() * static_cast<std::size_t>(reps);
  std::vector<detail::ReplicateResult> results(total_jobs);

  auto run_job = [&](std::size_t job) {
    const std::size_t point_idx = job / static_cast<std::size_t>(reps);
    const int replicate = static_cast<int>(job % static_cast<std::size_t>(reps));
    const auto& point = points[point_idx];
    const ParamSpace space = config.space_at(point.p, point.m);
    detail::ReplicateResult& out = results[job];

    const std::uint64_t sample_seed =
        derive_seed(config.base_seed, 3, point_idx, replicate);
    RiskRow base;
    base.n = point.n;
    base.p = point.p;
    base.m = point.m;
    base.s_u = space.s_u;
    base.s_v = space.s_v;
    base.r = space.r;
    base.q = space.q;
    base.lambda = space.lambda;
    base.replicate = replicate;
    base.seed = sample_seed;

    try {
      base.eps_n_sq = minimax_rate(space, point.n);
    } catch (const std::exception& ex) {
      for (EstimatorKind kind : config.estimators) {
        RiskRow row = base;
        row.estimator = estimator_name(kind);
        row.error = ex.what();
        out.rows.push_back(std::move(row));
      }
      return;
    }

    CcaModel model;
    SampleCov cov;
    EffectiveSparsity eff;
    try {
      Philox support_rng(derive_seed(config.base_seed, 2, point_idx, replicate),
                         0x5EED5u);
      const int size_u = std::max(
          space.r, static_cast<int>(std::llround(
                       std::min(space.s_u, static_cast<double>(space.p)))));
      const int size_v = std::max(
          space.r, static_cast<int>(std::llround(
                       std::min(space.s_v, static_cast<double>(space.m)))));
      const auto support_u = detail::draw_support(space.p, size_u, support_rng);
      const auto support_v = detail::draw_support(space.m, size_v, support_rng);
      model = build_model(
          space, config.cov,
          geometric_correlations(space, config.residual.lambda_fraction),
          support_u, support_v,
          derive_seed(config.base_seed, 1, point_idx, replicate));
      cov = sample_covariance(sample(model, point.n, sample_seed));
      eff = effective_sparsity(space, point.n);
    } catch (const std::exception& ex) {
      for (EstimatorKind kind : config.estimators) {
        RiskRow row = base;
        row.estimator = estimator_name(kind);
        row.error = ex.what();
        out.rows.push_back(std::move(row));
      }
      return;
    }

    const Matrix truth = model.leading_product();
    const bool want_sparse =
        std::find(config.estimators.begin(), config.estimators.end(),
                  EstimatorKind::sparse) != config.estimators.end();

    // The effective-support oracle doubles as the certificate reference for
    // the sparse fit, so compute it once when either needs it.
    DirectionEstimate oracle_est;
    bool have_oracle = false;
    std::string oracle_error;
    const bool want_oracle =
        std::find(config.estimators.begin(), config.estimators.end(),
                  EstimatorKind::oracle) != config.estimators.end();
    if (want_oracle || want_sparse) {
      try {
        const auto eff_u = effective_support(model.U1(), eff.k_u);
        const auto eff_v = effective_support(model.V1(), eff.k_v);
        oracle_est = oracle_estimator(cov, eff_u, eff_v, space.r);
        have_oracle = true;
      } catch (const std::exception& ex) {
        oracle_error = ex.what();
      }
    }

    for (EstimatorKind kind : config.estimators) {
      RiskRow row = base;
      row.estimator = estimator_name(kind);
      try {
        DirectionEstimate est;
        switch (kind) {
          case EstimatorKind::sparse:
            est = sparse_cca(cov, eff.k_u, eff.k_v, space.r, config.budget);
            if (have_oracle) {
              out.certificate = optimality_certificate(cov, oracle_est, est);
              out.has_certificate = true;
            }
            break;
          case EstimatorKind::oracle:
            if (!have_oracle) throw EstimationFailureError(oracle_error);
            est = oracle_est;
            break;
          case EstimatorKind::classical:
            est = classical_cca(cov, space.r);
            break;
        }
        const TruncatedEstimate trunc = truncate(est, space.M_bound, space.r);
        row.loss = loss(truth, trunc.product);
        row.truncated = trunc.truncated;
        const LossReport rep = loss(truth, model.U1(), model.V1(), est);
        row.proj_loss_u = rep.proj_loss_u;
        row.proj_loss_v = rep.proj_loss_v;
        row.support_exact = est.support_u == model.support_u &&
                            est.support_v == model.support_v;
      } catch (const std::exception& ex) {
        row.error = ex.what();
      }
      out.rows.push_back(std::move(row));
    }
  };

  const int workers =
      std::min<int>(worker_count(), static_cast<int>(total_jobs));
  if (workers <= 1) {
    for (std::size_t job = 0; job < total_jobs; ++job) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t job = next.fetch_add(1);
          if (job >= total_jobs) return;
          run_job(job);
        }
      });
    for (auto& t : pool) t.join();
  }

  RiskTable table;
  for (auto& result : results) {
    if (result.has_certificate) {
      table.max_certificate = std::max(table.max_certificate, result.certificate);
      ++table.certificates_checked;
    }
    for (auto& row : result.rows) {
      if (!row.error.empty()) ++table.failed_rows;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Aggregation

enum class Vary { n, dimension };

inline const char* vary_name(Vary v) { return v == Vary::n ? "n" : "dimension"; }

struct RatioStats {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  RatioStats ratio;
};

namespace detail {

struct GroupStat {
  double x = 0.0;        // regressor: log n or log eps_n_sq
  double mean_loss = 0.0;
  double eps_n_sq = 0.0;
  std::vector<double> losses;
};

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace detail

// Least-squares slope of log(mean loss) against log(n) (vary = n) or
// log(eps_n_sq) (vary = dimension), plus min/median/max of the per-point
// ratio mean loss / eps_n_sq. Error rows are excluded; at least three grid
// points are required.
inline SlopeFit fit_rate_slope(const RiskTable& table,
                               EstimatorKind estimator, Vary vary) {
  const std::string name = estimator_name(estimator);
  std::vector<std::tuple<int, int, int>> keys;
  std::vector<detail::GroupStat> groups;
  for (const auto& row : table.rows) {
    if (row.estimator != name || !row.error.empty()) continue;
    const std::tuple<int, int, int> key{row.n, row.p, row.m};
    std::size_t g = 0;
    for (; g < keys.size(); ++g)
      if (keys[g] == key) break;
    if (g == keys.size()) {
      keys.push_back(key);
      groups.emplace_back();
      groups.back().eps_n_sq = row.eps_n_sq;
    }
    groups[g].losses.push_back(row.loss);
  }
  if (groups.size() < 3)
    throw ArgumentError(
        "fit_rate_slope: need at least three grid points with successful "
        "rows, got " +
        std::to_string(groups.size()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& group = groups[g];
    double sum = 0.0;
    for (double l : group.losses) sum += l;
    group.mean_loss = sum / static_cast<double>(group.losses.size());
    if (!(group.mean_loss > 0.0))
      throw ArgumentError(
          "fit_rate_slope: mean loss must be positive to fit a log-log "
          "slope");
    group.x = vary == Vary::n
                  ? std::log(static_cast<double>(std::get<0>(keys[g])))
                  : std::log(group.eps_n_sq);
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double k = static_cast<double>(groups.size());
  for (const auto& group : groups) {
    const double y = std::log(group.mean_loss);
    sx += group.x;
    sy += y;
    sxx += group.x * group.x;
    sxy += group.x * y;
  }
  const double denom = k * sxx - sx * sx;
  if (!(std::abs(denom) > 1e-12))
    throw ArgumentError("fit_rate_slope: grid points are collinear in x");
  SlopeFit fit;
  fit.slope = (k * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / k;

  std::vector<double> ratios;
  ratios.reserve(groups.size());
  for (const auto& group : groups)
    ratios.push_back(group.mean_loss / group.eps_n_sq);
  fit.ratio.min = *std::min_element(ratios.begin(), ratios.end());
  fit.ratio.max = *std::max_element(ratios.begin(), ratios.end());
  fit.ratio.median = detail::median_of(ratios);
  return fit;
}

// ---------------------------------------------------------------------------
// Bootstrap

struct BootstrapInterval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Basic (reflected percentile) bootstrap interval for the mean,
// deterministic in the seed.
inline BootstrapInterval bootstrap_mean_ci(const std::vector<double>& values,
                                           std::uint64_t seed,
                                           int resamples = 1000) {
  if (values.empty())
    throw ArgumentError("bootstrap_mean_ci: no values");
  BootstrapInterval out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  Philox rng(seed, /*stream=*/0xB007u);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
      s += values[rng.next_below(values.size())];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(
        std::llround(q * static_cast<double>(resamples - 1)));
    return means[idx];
  };
  out.lo = 2.0 * out.mean - quantile(0.975);
  out.hi = 2.0 * out.mean - quantile(0.025);
  return out;
}

// ---------------------------------------------------------------------------
// CSV outputs

inline void write_risks_csv(const std::filesystem::path& path,
                            const RiskTable& table) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("write_risks_csv: cannot open " + path.string());
  out << "n,p,m,s_u,s_v,r,q,lambda,estimator,replicate,seed,loss,"
         "proj_loss_u,proj_loss_v,truncated,support_exact,eps_n_sq,error\n";
  for (const auto& row : table.rows) {
    const bool ok = row.error.empty();
    out << row.n << ',' << row.p << ',' << row.m << ','
        << format_double(row.s_u) << ',' << format_double(row.s_v) << ','
        << row.r << ',' << format_double(row.q) << ','
        << format_double(row.lambda) << ',' << csv_quote(row.estimator) << ','
        << row.replicate << ',' << row.seed << ','
        << (ok ? format_double(row.loss) : std::string()) << ','
        << (ok ? format_double(row.proj_loss_u) : std::string()) << ','
        << (ok ? format_double(row.proj_loss_v) : std::string()) << ','
        << (ok ? (row.truncated ? "1" : "0") : "") << ','
        << (ok ? (row.support_exact ? "1" : "0") : "") << ','
        << (std::isnan(row.eps_n_sq) ? std::string()
                                     : format_double(row.eps_n_sq))
        << ',' << csv_quote(row.error) << '\n';
  }
}

struct SlopeRow {
  std::string estimator;
  std::string vary;
  SlopeFit fit;
};

inline void write_slopes_csv(const std::filesystem::path& path,
                             const std::vector<SlopeRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("write_slopes_csv: cannot open " + path.string());
  out << "estimator,vary,slope,intercept,ratio_min,ratio_median,ratio_max\n";
  for (const auto& row : rows)
    out << csv_quote(row.estimator) << ',' << csv_quote(row.vary) << ','
        << format_double(row.fit.slope) << ','
        << format_double(row.fit.intercept) << ','
        << format_double(row.fit.ratio.min) << ','
        << format_double(row.fit.ratio.median) << ','
        << format_double(row.fit.ratio.max) << '\n';
}

// Group means with 95% basic bootstrap intervals (1000 resamples), one row
// per (estimator, grid point).
inline void write_means_csv(const std::filesystem::path& path,
                            const RiskTable& table, std::uint64_t seed) {
  struct Group {
    std::string estimator;
    int n = 0, p = 0, m = 0;
    double eps_n_sq = 0.0;
    std::vector<double> losses;
  };
  std::vector<Group> groups;
  for (const auto& row : table.rows) {
    if (!row.error.empty()) continue;
    std::size_t g = 0;
    for (; g < groups.size(); ++g)
      if (groups[g].estimator == row.estimator && groups[g].n == row.n &&
          groups[g].p == row.p && groups[g].m == row.m)
        break;
    if (g == groups.size()) {
      groups.push_back({row.estimator, row.n, row.p, row.m, row.eps_n_sq, {}});
    }
    groups[g].losses.push_back(row.loss);
  }
  std::ofstream out(path);
  if (!out) throw ArgumentError("write_means_csv: cannot open " + path.string());
  out << "estimator,n,p,m,replicates,mean_loss,boot_lo,boot_hi,eps_n_sq\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& group = groups[g];
    const BootstrapInterval ci =
        bootstrap_mean_ci(group.losses, derive_seed(seed, 0xC1u, g));
    out << csv_quote(group.estimator) << ',' << group.n << ',' << group.p
        << ',' << group.m << ',' << group.losses.size() << ','
        << format_double(ci.mean) << ',' << format_double(ci.lo) << ','
        << format_double(ci.hi) << ',' << format_double(group.eps_n_sq)
        << '\n';
  }
}

}  // namespace scca
