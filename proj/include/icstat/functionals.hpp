#pragma once

#include <optional>
#include <string>

#include "icstat/dataset.hpp"
#include "icstat/ecdf.hpp"
#include "icstat/types.hpp"

namespace icstat {

struct Estimate {
  double value = 0.0;
  std::optional<double> variance;  // variance of the estimate, when a formula exists
  WeightingScheme scheme = WeightingScheme::InverseClusterSize;
  Index n_clusters = 0;
};

// Weighted marginal mean. Under InverseClusterSize the variance field holds
// tau^2/M with tau^2 the empirical second moment of the cluster means minus
// the squared estimate; under FirstObservation it holds the empirical
// variance of the first observations divided by M.
Estimate marginal_mean(const ClusteredSample& sample, WeightingScheme scheme);

// Weighted second moment about the matching-scheme mean. No finite-sample
// bias correction is applied.
Estimate marginal_variance(const ClusteredSample& sample, WeightingScheme scheme);

// Mass each observation of cluster i with 1/(M*N_i).
double tau_squared(const ClusteredSample& sample);

Estimate weighted_median(const ClusteredSample& sample);

// Inverse-cluster-size trimmed mean. Cut points are the weighted quantiles at
// alpha/2 and 1 - alpha/2; the trimming interval is closed on both sides, and
// the per-cluster normalization is 1/((1 - alpha) * N_i).
Estimate trimmed_mean(const ClusteredSample& sample, double alpha);

enum class CovarianceEstimator {
  Correct,                  // cluster-weighted cross products about the weighted mean
  NaivePooled,              // pooled cross products about the pooled mean
  WeightedCrossNaiveCenter  // cluster-weighted cross products about the pooled mean
};

std::string to_string(CovarianceEstimator estimator);

// Marginal covariance of a bivariate outcome. Only Correct targets a
// population functional; the other two exist for bias diagnostics.
Estimate marginal_covariance(const ClusteredSample& sample, CovarianceEstimator estimator);

// Correct covariance standardized by the product of the weighted marginal
// standard deviations of the two components.
Estimate marginal_correlation(const ClusteredSample& sample);

enum class HodgesLehmannVariant {
  FirstObservation,       // pairwise averages of the first observations
  InverseClusterSizePairs // all cross-cluster pairs, weighted by 1/(N_i N_i')
};

// Location estimate from pairwise averages across distinct clusters; the
// weighted median of the averages uses the same inf-quantile convention as
// weighted_median.
Estimate hodges_lehmann(const ClusteredSample& sample, HodgesLehmannVariant variant);

}  // namespace icstat
