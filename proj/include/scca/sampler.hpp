#pragma once

// Gaussian sampling from a model and empirical covariance formation.

#include <Eigen/Cholesky>
#include <filesystem>
#include <utility>

#include "scca/csv.hpp"
#include "scca/errors.hpp"
#include "scca/matrix.hpp"
#include "scca/model.hpp"
#include "scca/rng.hpp"

namespace scca {

struct DataSet {
  Matrix x;  // n x p
  Matrix y;  // n x m
  int n() const { return static_cast<int>(x.rows()); }
};

// Covariance blocks used by every estimator. n = 0 marks population input.
struct SampleCov {
  Matrix sx;
  Matrix sy;
  Matrix sxy;
  int n = 0;
  int p() const { return static_cast<int>(sx.rows()); }
  int m() const { return static_cast<int>(sy.rows()); }
};

inline SampleCov population_cov(const CcaModel& model) {
  return SampleCov{model.sigma_x, model.sigma_y, model.sigma_xy(), 0};
}

// Draw n joint observations: rows are L z with L the Cholesky factor of the
// joint covariance and z standard normal (Philox stream keyed by `seed`,
// normals via the inverse CDF; see rng.hpp). Deterministic per seed.
inline DataSet sample(const CcaModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw ArgumentError("sample: n must be positive");
  const int d = model.p() + model.m();
  Eigen::LLT<Matrix> llt(model.sigma_joint);
  if (llt.info() != Eigen::Success)
    throw ModelConstructionError(
        "sample: joint covariance is not positive definite enough for a "
        "Cholesky factorization");
  const Matrix l = llt.matrixL();
  Philox rng(seed, /*stream=*/0x5A3D1Eull);
  Matrix z(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) z(i, j) = rng.next_normal();
  const Matrix joint = z * l.transpose();
  DataSet data;
  data.x = joint.leftCols(model.p());
  data.y = joint.rightCols(model.m());
  return data;
}

// Uncentered empirical covariance blocks (1/n) sums of outer products. The
// model has mean zero, so no centering term appears.
inline SampleCov sample_covariance(const DataSet& data) {
  const int n = data.n();
  if (n < 2) throw ArgumentError("sample_covariance: need at least 2 rows");
  if (data.y.rows() != n)
    throw ArgumentError("sample_covariance: x and y row counts differ");
  SampleCov cov;
  const double inv = 1.0 / static_cast<double>(n);
  cov.sx = inv * (data.x.transpose() * data.x);
  cov.sy = inv * (data.y.transpose() * data.y);
  cov.sxy = inv * (data.x.transpose() * data.y);
  cov.n = n;
  return cov;
}

inline void export_dataset(const DataSet& data,
                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "x.csv", data.x);
  write_matrix_csv(dir / "y.csv", data.y);
}

// Load x.csv / y.csv; column counts are validated when expected dimensions
// are supplied (pass 0 to skip).
inline DataSet import_dataset(const std::filesystem::path& dir,
                              int expected_p = 0, int expected_m = 0) {
  DataSet data;
  data.x = read_matrix_csv(dir / "x.csv");
  data.y = read_matrix_csv(dir / "y.csv");
  if (data.x.rows() != data.y.rows())
    throw ArgumentError("import_dataset: x and y row counts differ");
  if (expected_p > 0 && data.x.cols() != expected_p)
    throw ArgumentError("import_dataset: x has " +
                        std::to_string(data.x.cols()) + " columns, expected " +
                        std::to_string(expected_p));
  if (expected_m > 0 && data.y.cols() != expected_m)
    throw ArgumentError("import_dataset: y has " +
                        std::to_string(data.y.cols()) + " columns, expected " +
                        std::to_string(expected_m));
  return data;
}

inline void export_model(const CcaModel& model,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "sigma_x.csv", model.sigma_x);
  write_matrix_csv(dir / "sigma_y.csv", model.sigma_y);
  write_matrix_csv(dir / "U.csv", model.U);
  write_matrix_csv(dir / "V.csv", model.V);
  Matrix lambda(static_cast<Eigen::Index>(model.correlations.size()), 1);
  for (std::size_t i = 0; i < model.correlations.size(); ++i)
    lambda(static_cast<Eigen::Index>(i), 0) = model.correlations[i];
  write_matrix_csv(dir / "lambda.csv", lambda);
}

}  // namespace scca
