// Command line workbench around the sparse CCA library.
//
// Exit codes: 0 success, 1 argument or configuration errors, 2 numerical
// failures (including verify sweeps that find a violated bound).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scca/scca.hpp"

namespace fs = std::filesystem;
using scca::format_double;

namespace {

// Thrown by verify when a sweep finds a violated bound; maps to exit 2.
struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out)
    throw scca::ArgumentError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

std::vector<double> to_std(const scca::Vector& v) {
  return {v.data(), v.data() + v.size()};
}

// --- rate -----------------------------------------------------------------

struct RateArgs {
  scca::ParamSpace space;
  int n = 0;
};

void run_rate(const RateArgs& args) {
  const double rate = scca::minimax_rate(args.space, args.n);
  std::printf("%s\n", format_double(rate).c_str());
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string config_path;
  int n = 0;
  std::uint64_t seed = 1;
  std::string out_dir;
};

void run_simulate(const SimulateArgs& args) {
  const scca::ModelConfig config =
      scca::parse_model_config(scca::load_json_file(args.config_path));
  const scca::CcaModel model =
      scca::build_model(config.space, config.cov, config.correlations,
                        config.support_u, config.support_v, config.seed);
  const scca::DataSet data = scca::sample(model, args.n, args.seed);
  const fs::path dir(args.out_dir);
  scca::export_model(model, dir);
  scca::export_dataset(data, dir);
  nlohmann::json meta;
  meta["n"] = args.n;
  meta["p"] = config.space.p;
  meta["m"] = config.space.m;
  meta["r"] = config.space.r;
  meta["r2"] = config.space.r2;
  meta["correlations"] = config.correlations;
  meta["support_u"] = model.support_u;
  meta["support_v"] = model.support_v;
  meta["model_seed"] = config.seed;
  meta["sample_seed"] = args.seed;
  write_json(dir / "meta.json", meta);
  std::printf("wrote model and %d samples to %s\n", args.n,
              dir.string().c_str());
}

// --- estimate ---------------------------------------------------------------

struct EstimateArgs {
  std::string data_dir;
  std::string mode = "sparse";
  int rank = 1;
  int k_u = 0;
  int k_v = 0;
  std::vector<int> support_u;
  std::vector<int> support_v;
  std::uint64_t budget = 10'000'000;
  double truncate_M = 0.0;
  bool truncate_set = false;
  std::string out_dir;
};

void run_estimate(const EstimateArgs& args) {
  const scca::DataSet data = scca::import_dataset(args.data_dir);
  const scca::SampleCov cov = scca::sample_covariance(data);
  scca::DirectionEstimate est;
  if (args.mode == "sparse") {
    if (args.k_u < 1 || args.k_v < 1)
      throw scca::ArgumentError(
          "estimate: sparse mode requires --k-u and --k-v");
    est = scca::sparse_cca(cov, args.k_u, args.k_v, args.rank, args.budget);
  } else if (args.mode == "oracle") {
    if (args.support_u.empty() || args.support_v.empty())
      throw scca::ArgumentError(
          "estimate: oracle mode requires --support-u and --support-v "
          "(comma-separated 0-based row indices)");
    est = scca::oracle_estimator(cov, args.support_u, args.support_v,
                                 args.rank);
  } else if (args.mode == "classical") {
    est = scca::classical_cca(cov, args.rank);
  } else {
    throw scca::ArgumentError(
        "estimate: mode must be sparse, oracle, or classical");
  }

  scca::Matrix product = est.product;
  bool truncated = false;
  if (args.truncate_set) {
    const scca::TruncatedEstimate t =
        scca::truncate(est, args.truncate_M, args.rank);
    product = t.product;
    truncated = t.truncated;
  }

  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  scca::write_matrix_csv(dir / "A.csv", est.A);
  scca::write_matrix_csv(dir / "B.csv", est.B);
  scca::write_matrix_csv(dir / "product.csv", product);
  nlohmann::json meta;
  meta["mode"] = args.mode;
  meta["n"] = data.n();
  meta["p"] = cov.p();
  meta["m"] = cov.m();
  meta["rank"] = args.rank;
  meta["objective"] = est.objective;
  meta["singular_values"] = to_std(est.singular_values);
  meta["support_u"] = est.support_u;
  meta["support_v"] = est.support_v;
  if (args.mode == "sparse") {
    meta["k_u"] = args.k_u;
    meta["k_v"] = args.k_v;
    meta["budget"] = args.budget;
    meta["scan_evaluated"] = est.scan_evaluated;
    meta["scan_skipped_singular"] = est.scan_skipped_singular;
  }
  if (args.truncate_set) {
    meta["truncate_M"] = args.truncate_M;
    meta["truncated"] = truncated;
  }
  write_json(dir / "meta.json", meta);
  std::printf("objective %s, wrote estimate to %s\n",
              format_double(est.objective).c_str(), dir.string().c_str());
}

// --- experiment ---------------------------------------------------------------

struct ExperimentArgs {
  std::string config_path;
  std::string out_dir;
};

void run_experiment_cmd(const ExperimentArgs& args) {
  const scca::ExperimentConfig config =
      scca::parse_experiment_config(scca::load_json_file(args.config_path));
  const scca::RiskTable table = scca::run_experiment(config);

  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  scca::write_risks_csv(dir / "risks.csv", table);
  scca::write_means_csv(dir / "means.csv", table, config.base_seed);

  // Slopes are only meaningful along a one-dimensional grid: vary n with a
  // single (p, m), or vary (p, m) at a single n.
  std::vector<int> ns = config.n_grid;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  auto dims = config.dim_grid;
  if (dims.empty()) dims.push_back({config.space.p, config.space.m});
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());

  std::vector<scca::SlopeRow> slope_rows;
  std::vector<scca::EstimatorKind> seen;
  for (scca::EstimatorKind kind : config.estimators) {
    if (std::find(seen.begin(), seen.end(), kind) != seen.end()) continue;
    seen.push_back(kind);
    if (ns.size() >= 3 && dims.size() == 1) {
      try {
        slope_rows.push_back({scca::estimator_name(kind),
                              scca::vary_name(scca::Vary::n),
                              scca::fit_rate_slope(table, kind, scca::Vary::n)});
      } catch (const scca::ArgumentError&) {
      }
    }
    if (dims.size() >= 3 && ns.size() == 1) {
      try {
        slope_rows.push_back(
            {scca::estimator_name(kind), scca::vary_name(scca::Vary::dimension),
             scca::fit_rate_slope(table, kind, scca::Vary::dimension)});
      } catch (const scca::ArgumentError&) {
      }
    }
  }
  scca::write_slopes_csv(dir / "slopes.csv", slope_rows);

  std::printf("rows=%zu failed=%llu\n", table.rows.size(),
              static_cast<unsigned long long>(table.failed_rows));
  if (table.certificates_checked > 0)
    std::printf("certificates checked=%llu max=%s\n",
                static_cast<unsigned long long>(table.certificates_checked),
                format_double(table.max_certificate).c_str());
  std::printf("wrote risks.csv, means.csv, slopes.csv to %s\n",
              dir.string().c_str());
}

// --- verify ---------------------------------------------------------------

struct VerifyArgs {
  std::string check;
  int trials = 100;
  std::uint64_t seed = 1;
  std::string out_path;
  int n = 0;  // 0 means per-check default
  int d = 10;
  int r = 2;
};

void run_verify(const VerifyArgs& args) {
  std::ofstream out(args.out_path);
  if (!out)
    throw scca::ArgumentError("cannot open " + args.out_path + " for writing");
  int violations = 0;

  if (args.check == "sintheta") {
    const auto reports = scca::sintheta_sweep(args.trials, args.seed);
    out << "trial,norm,eps,delta,d1,d1_hat,lhs_weighted,rhs_weighted,"
           "lhs_plain,ratio_plain,margin\n";
    for (std::size_t t = 0; t < reports.size(); ++t) {
      const auto& rep = reports[t];
      if (rep.margin() < -1e-9) ++violations;
      out << t << ',' << scca::norm_kind_name(rep.norm_kind) << ','
          << format_double(rep.eps) << ',' << format_double(rep.delta) << ','
          << format_double(rep.d1) << ',' << format_double(rep.d1_hat) << ','
          << format_double(rep.lhs_weighted) << ','
          << format_double(rep.rhs_weighted) << ','
          << format_double(rep.lhs_plain) << ','
          << format_double(rep.ratio_plain) << ','
          << format_double(rep.margin()) << '\n';
    }
  } else if (args.check == "ranksup") {
    const int n = args.n > 0 ? args.n : 1000;
    const auto rows = scca::rank_sup_sweep(args.trials, n, args.d, args.r,
                                           args.seed);
    out << "trial,n,d,r,seed,statistic\n";
    for (std::size_t t = 0; t < rows.size(); ++t)
      out << t << ',' << rows[t].n << ',' << rows[t].d << ',' << rows[t].r
          << ',' << rows[t].seed << ',' << format_double(rows[t].statistic)
          << '\n';
  } else if (args.check == "linearloss") {
    const auto reports = scca::linearloss_sweep(args.trials, args.seed);
    out << "trial,d1,d_r,lower,mid,upper,lower_ok,upper_ok\n";
    for (std::size_t t = 0; t < reports.size(); ++t) {
      const auto& rep = reports[t];
      if (!rep.ok()) ++violations;
      out << t << ',' << format_double(rep.d1) << ','
          << format_double(rep.d_r) << ',' << format_double(rep.lower) << ','
          << format_double(rep.mid) << ',' << format_double(rep.upper) << ','
          << (rep.lower_ok ? 1 : 0) << ',' << (rep.upper_ok ? 1 : 0) << '\n';
    }
  } else if (args.check == "procrustes") {
    const auto rows = scca::procrustes_sweep(args.trials, args.seed);
    out << "trial,distance,bound,ok\n";
    for (std::size_t t = 0; t < rows.size(); ++t) {
      if (!rows[t].ok) ++violations;
      out << t << ',' << format_double(rows[t].distance) << ','
          << format_double(rows[t].bound) << ',' << (rows[t].ok ? 1 : 0)
          << '\n';
    }
  } else if (args.check == "decomposition") {
    const int n = args.n > 0 ? args.n : 500;
    const auto trials = scca::decomposition_sweep(args.trials, n, args.seed);
    out << "trial,sparse_approx_term,oracle_term,bias_term,excess1_term,"
           "excess2_term,certificate,total_loss,triangle_bound,"
           "certificate_ok,triangle_ok\n";
    for (std::size_t t = 0; t < trials.size(); ++t) {
      const auto& trial = trials[t];
      if (!trial.certificate_ok || !trial.triangle_ok) ++violations;
      const auto& rep = trial.report;
      out << t << ',' << format_double(rep.sparse_approx_term) << ','
          << format_double(rep.oracle_term) << ','
          << format_double(rep.bias_term) << ','
          << format_double(rep.excess1_term) << ','
          << format_double(rep.excess2_term) << ','
          << format_double(rep.certificate) << ','
          << format_double(rep.total_loss) << ','
          << format_double(rep.triangle_bound) << ','
          << (trial.certificate_ok ? 1 : 0) << ','
          << (trial.triangle_ok ? 1 : 0) << '\n';
    }
  } else {
    throw scca::ArgumentError(
        "verify: check must be one of sintheta, ranksup, linearloss, "
        "procrustes, decomposition");
  }

  out.close();
  std::printf("%s: %d trials, %d violations, wrote %s\n", args.check.c_str(),
              args.trials, violations, args.out_path.c_str());
  if (violations > 0)
    throw CheckFailure(args.check + ": " + std::to_string(violations) +
                       " of " + std::to_string(args.trials) +
                       " trials violated the bound");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse canonical correlation workbench"};
  app.require_subcommand(1);

  RateArgs rate_args;
  CLI::App* rate = app.add_subcommand(
      "rate", "print the theoretical squared-loss benchmark for a design");
  rate->add_option("--q", rate_args.space.q, "sparsity exponent in [0, 2)")
      ->required();
  rate->add_option("--r", rate_args.space.r, "leading rank")->required();
  rate->add_option("--su", rate_args.space.s_u, "row-sparsity radius for U")
      ->required();
  rate->add_option("--sv", rate_args.space.s_v, "row-sparsity radius for V")
      ->required();
  rate->add_option("--p", rate_args.space.p, "dimension of x")->required();
  rate->add_option("--m", rate_args.space.m, "dimension of y")->required();
  rate->add_option("--n", rate_args.n, "sample size")->required();
  rate->add_option("--lambda", rate_args.space.lambda,
                   "smallest leading canonical correlation")
      ->required();
  rate->add_option("--kappa", rate_args.space.kappa,
                   "spectral spread bound (lambda_1 <= kappa * lambda)");
  rate->add_option("--M", rate_args.space.M_bound,
                   "operator norm bound on the marginal covariances");
  rate->add_option("--c0", rate_args.space.c0,
                   "gap constant (kappa * lambda <= 1 - c0)");
  rate->add_option("--r2", rate_args.space.r2, "residual rank");
  rate->callback([&]() { run_rate(rate_args); });

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "draw a dataset from a configured model");
  sim->add_option("--config", sim_args.config_path, "model JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--n", sim_args.n, "number of samples")->required();
  sim->add_option("--seed", sim_args.seed, "sampling seed");
  sim->add_option("--out", sim_args.out_dir, "output directory")->required();
  sim->callback([&]() { run_simulate(sim_args); });

  EstimateArgs est_args;
  CLI::App* est = app.add_subcommand(
      "estimate", "fit canonical directions to an exported dataset");
  est->add_option("--data-dir", est_args.data_dir,
                  "directory holding x.csv and y.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  est->add_option("--mode", est_args.mode, "sparse, oracle, or classical");
  est->add_option("--rank", est_args.rank, "number of direction pairs");
  est->add_option("--k-u", est_args.k_u, "support size for U (sparse mode)");
  est->add_option("--k-v", est_args.k_v, "support size for V (sparse mode)");
  est->add_option("--support-u", est_args.support_u,
                  "0-based row indices for U (oracle mode)")
      ->delimiter(',');
  est->add_option("--support-v", est_args.support_v,
                  "0-based row indices for V (oracle mode)")
      ->delimiter(',');
  est->add_option("--budget", est_args.budget,
                  "maximum number of support pairs to enumerate");
  est->add_option("--truncate-M", est_args.truncate_M,
                  "zero the estimate when its scaled norm exceeds this bound");
  est->add_option("--out", est_args.out_dir, "output directory")->required();
  est->callback([&]() {
    est_args.truncate_set = est->count("--truncate-M") > 0;
    run_estimate(est_args);
  });

  ExperimentArgs exp_args;
  CLI::App* exp = app.add_subcommand(
      "experiment", "run a Monte Carlo risk grid from a JSON description");
  exp->add_option("--config", exp_args.config_path, "experiment JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  exp->add_option("--out", exp_args.out_dir, "output directory")->required();
  exp->callback([&]() { run_experiment_cmd(exp_args); });

  VerifyArgs ver_args;
  CLI::App* ver = app.add_subcommand(
      "verify", "run randomized checks of the perturbation bounds");
  ver->add_option("--check", ver_args.check,
                  "sintheta, ranksup, linearloss, procrustes, or decomposition")
      ->required();
  ver->add_option("--trials", ver_args.trials, "number of trials");
  ver->add_option("--seed", ver_args.seed, "sweep seed");
  ver->add_option("--out", ver_args.out_path, "report CSV path")->required();
  ver->add_option("--n", ver_args.n, "sample size (ranksup, decomposition)");
  ver->add_option("--d", ver_args.d, "ambient dimension (ranksup)");
  ver->add_option("--r", ver_args.r, "rank (ranksup)");
  ver->callback([&]() { run_verify(ver_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  } catch (const scca::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const scca::EnumerationBudgetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
