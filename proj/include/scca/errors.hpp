#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace scca {

// Caller-supplied arguments are out of contract (shapes, ranges, modes).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An iterative factorization failed to converge.
struct FactorizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A matrix that must be numerically positive definite is not. Carries the
// offending eigenvalue so callers can report how close to singular it was.
struct SingularMatrixError : std::runtime_error {
  SingularMatrixError(const std::string& msg, double eigenvalue)
      : std::runtime_error(msg), offending_eigenvalue(eigenvalue) {}
  double offending_eigenvalue;
};

// A covariance submatrix selected by a support pair is too ill-conditioned
// to whiten. Carries the supports that triggered it.
struct SupportConditioningError : SingularMatrixError {
  SupportConditioningError(const std::string& msg, double eigenvalue,
                           std::vector<int> rows, std::vector<int> cols)
      : SingularMatrixError(msg, eigenvalue),
        support_u(std::move(rows)),
        support_v(std::move(cols)) {}
  std::vector<int> support_u;
  std::vector<int> support_v;
};

// The support enumeration would exceed the configured budget.
struct EnumerationBudgetError : std::runtime_error {
  EnumerationBudgetError(const std::string& msg, std::uint64_t required,
                         std::uint64_t allowed)
      : std::runtime_error(msg), required_count(required), budget(allowed) {}
  std::uint64_t required_count;
  std::uint64_t budget;
};

// No admissible estimate could be produced (e.g. every candidate support was
// skipped as singular).
struct EstimationFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A model could not be assembled or violates its construction invariants.
struct ModelConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A parameter point with no usable signal (zero effective sparsity).
struct DegenerateModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace scca
