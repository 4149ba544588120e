#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icstat/dataset.hpp"
#include "icstat/error.hpp"
#include "icstat/types.hpp"

namespace icstat {

// Design matrix and outcome vector of one cluster.
struct DesignedCluster {
  Matrix X;  // N_i x p
  Vector y;  // N_i
};

// Designs from a univariate sample, optionally prepending an intercept column.
std::vector<DesignedCluster> design_clusters(const ClusteredSample& sample, bool intercept);

struct RegressionFit {
  Vector beta;
  Matrix covariance;   // sandwich (or naive, for pooled OLS)
  Vector std_errors;
  Vector residuals;    // cluster-major, at the reported coefficients
  Vector mc_std_errors;  // resampling noise of the averaged coefficients (wcr only)
  std::optional<double> scale;  // sigma of the M fit
  int iterations = 0;
  bool converged = true;
  std::string method;
  std::vector<std::string> warnings;
};

// Thrown when the iterative fit hits the iteration cap; carries the last
// iterate for inspection.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, RegressionFit last);
  const RegressionFit& last_fit() const { return last_; }

 private:
  RegressionFit last_;
};

// Inverse-cluster-size weighted least squares with the robust sandwich
// covariance built from per-cluster score contributions.
RegressionFit icswls_fit(const std::vector<DesignedCluster>& clusters);

// Pooled least squares ignoring the clustering, with the naive
// sigma^2 (X'X)^-1 covariance. For bias comparisons only.
RegressionFit ols_fit(const std::vector<DesignedCluster>& clusters);

struct HuberConfig {
  double c = 1.5;
  double d = 1.0;
  double tol = 1e-8;
  int max_iter = 200;
};

// Inverse-cluster-size weighted Huber regression by iterative reweighting of
// the coefficient and scale updates, with the weighted sandwich covariance.
RegressionFit huber_icw_fit(const std::vector<DesignedCluster>& clusters,
                            const HuberConfig& config = {});

struct WcrRegressionConfig {
  long long replicates = 1000;  // B
  std::uint64_t seed = 0;
  long long exact_cap = 1'000'000;
};

// Within-cluster resampling regression: one observation per cluster, pooled
// OLS per replicate, coefficients averaged. Covariance combines the mean
// per-replicate OLS covariance with the across-replicate coefficient spread;
// negative diagonal entries are clamped to zero with a warning.
RegressionFit wcr_regression(const std::vector<DesignedCluster>& clusters,
                             const WcrRegressionConfig& config);

}  // namespace icstat
