#pragma once

// JSON wiring for model and experiment descriptions. Kept separate from the
// numeric headers so the library core does not depend on the JSON vendor.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scca/errors.hpp"
#include "scca/harness.hpp"
#include "scca/model.hpp"

namespace scca {

using json = nlohmann::json;

// Everything `simulate` needs: a parameter space, covariance bases, the
// canonical correlations, and explicit supports (0-based row indices).
struct ModelConfig {
  ParamSpace space;
  CovSpec cov;
  std::vector<double> correlations;
  std::vector<int> support_u;
  std::vector<int> support_v;
  std::uint64_t seed = 1;
};

namespace detail {

inline void check_keys(const json& j, const char* where,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw ArgumentError(std::string(where) + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        ok = true;
        break;
      }
    if (!ok)
      throw ArgumentError(std::string(where) + ": unknown key '" + it.key() +
                          "'");
  }
}

inline const json& require(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw ArgumentError(std::string(where) + ": missing required key '" + key +
                        "'");
  return *it;
}

inline CovSpec parse_cov(const json& j, const char* where) {
  check_keys(j, where, {"kind", "param"});
  CovSpec cov;
  const std::string kind = require(j, "kind", where).get<std::string>();
  if (kind == "identity") {
    cov.kind = CovKind::identity;
  } else if (kind == "ar1") {
    cov.kind = CovKind::ar1;
    cov.param = require(j, "param", where).get<double>();
  } else if (kind == "random_spd") {
    cov.kind = CovKind::random_spd;
    cov.param = require(j, "param", where).get<double>();
  } else {
    throw ArgumentError(std::string(where) +
                        ": cov kind must be identity, ar1, or random_spd");
  }
  return cov;
}

inline ParamSpace parse_space(const json& j, const char* where,
                              bool allow_r2) {
  check_keys(j, where,
             {"p", "m", "r", "r2", "q", "s_u", "s_v", "lambda", "kappa", "M",
              "c0"});
  ParamSpace space;
  space.p = require(j, "p", where).get<int>();
  space.m = require(j, "m", where).get<int>();
  space.r = require(j, "r", where).get<int>();
  space.q = require(j, "q", where).get<double>();
  space.s_u = require(j, "s_u", where).get<double>();
  space.s_v = require(j, "s_v", where).get<double>();
  space.lambda = require(j, "lambda", where).get<double>();
  if (j.contains("r2")) {
    if (!allow_r2)
      throw ArgumentError(std::string(where) +
                          ": set the residual rank in the residual block, "
                          "not in the space");
    space.r2 = j["r2"].get<int>();
  }
  space.kappa = j.value("kappa", space.kappa);
  space.M_bound = j.value("M", space.M_bound);
  space.c0 = j.value("c0", space.c0);
  return space;
}

}  // namespace detail

inline ModelConfig parse_model_config(const json& j) {
  detail::check_keys(j, "model",
                     {"space", "cov", "correlations", "support_u", "support_v",
                      "seed"});
  ModelConfig config;
  config.space = detail::parse_space(detail::require(j, "space", "model"),
                                     "model.space", /*allow_r2=*/true);
  if (j.contains("cov")) config.cov = detail::parse_cov(j["cov"], "model.cov");
  config.correlations =
      detail::require(j, "correlations", "model").get<std::vector<double>>();
  config.support_u =
      detail::require(j, "support_u", "model").get<std::vector<int>>();
  config.support_v =
      detail::require(j, "support_v", "model").get<std::vector<int>>();
  config.seed = j.value("seed", config.seed);
  config.space.validate();
  return config;
}

inline ExperimentConfig parse_experiment_config(const json& j) {
  detail::check_keys(j, "experiment",
                     {"space", "n_grid", "dim_grid", "replicates", "estimators",
                      "cov", "residual", "seed", "budget", "ass2_c"});
  ExperimentConfig config;
  config.space = detail::parse_space(detail::require(j, "space", "experiment"),
                                     "experiment.space", /*allow_r2=*/false);
  config.n_grid =
      detail::require(j, "n_grid", "experiment").get<std::vector<int>>();
  if (j.contains("dim_grid")) {
    for (const auto& pair : j["dim_grid"]) {
      if (!pair.is_array() || pair.size() != 2)
        throw ArgumentError("experiment.dim_grid: entries must be [p, m]");
      config.dim_grid.push_back({pair[0].get<int>(), pair[1].get<int>()});
    }
  }
  config.replicates =
      detail::require(j, "replicates", "experiment").get<int>();
  for (const auto& name : detail::require(j, "estimators", "experiment"))
    config.estimators.push_back(estimator_from_name(name.get<std::string>()));
  if (j.contains("cov"))
    config.cov = detail::parse_cov(j["cov"], "experiment.cov");
  if (j.contains("residual")) {
    const json& res = j["residual"];
    detail::check_keys(res, "experiment.residual", {"r2", "lambda_fraction"});
    config.residual.r2 = detail::require(res, "r2", "experiment.residual")
                             .get<int>();
    config.residual.lambda_fraction =
        detail::require(res, "lambda_fraction", "experiment.residual")
            .get<double>();
  }
  config.base_seed = j.value("seed", config.base_seed);
  config.budget = j.value("budget", config.budget);
  config.ass2_c = j.value("ass2_c", config.ass2_c);
  config.validate();
  return config;
}

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ArgumentError("failed to parse " + path.string() + ": " + ex.what());
  }
  return j;
}

}  // namespace scca
