#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "icstat/dataset.hpp"
#include "icstat/types.hpp"

namespace icstat {

struct WcrConfig {
  long long replicates = 1000;  // B
  std::uint64_t seed = 0;
  // Enumerate all one-per-cluster selections exactly when the number of
  // combinations is at most this cap; 0 disables enumeration.
  long long exact_enumeration_cap = 1'000'000;
};

// A statistic of an i.i.d. sample (one observation per cluster), plus an
// optional variance formula for it. `variance` may be left empty.
struct IidStatistic {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<double(const Vector&)> variance;
};

// One uniformly drawn within-cluster row index per cluster, independent
// across clusters.
std::vector<Index> wcr_draw(const ClusteredSample& sample, std::mt19937_64& rng);

// Outcome component `component` at the drawn rows, in cluster order.
Vector select_outcomes(const ClusteredSample& sample, const std::vector<Index>& rows,
                       Index component = 0);

struct WcrOutput {
  double point = 0.0;                       // weighted average of the replicate values
  std::vector<double> replicate_values;     // statistic per selection
  std::vector<double> replicate_variances;  // empty when the statistic has no formula
  std::vector<double> replicate_weights;    // empty: uniform 1/B
  bool exact = false;
};

// Number of one-per-cluster selections (product of cluster sizes), or -1 when
// it exceeds `cap`.
long long enumeration_count(const ClusteredSample& sample, long long cap);

// Average of `statistic` over one-per-cluster selections: exact enumeration
// with product weights when feasible, otherwise a seeded Monte Carlo average
// over `replicates` draws.
WcrOutput wcr_estimate(const ClusteredSample& sample, const IidStatistic& statistic,
                       const WcrConfig& config);

struct VarianceEstimate {
  double value = 0.0;
  bool clamped = false;  // the raw formula went negative and was clamped to 0
};

// Resampling variance of the averaged statistic: mean per-replicate variance
// minus the across-replicate spread of the values.
VarianceEstimate wcr_variance(const WcrOutput& output);

// Empirical variance (denominator B - 1) of `statistic` over B resamples of
// whole clusters drawn with replacement. Replicates are drawn against the
// id-sorted cluster order, so the value does not depend on input ordering.
double cluster_bootstrap_variance(const ClusteredSample& sample,
                                  const std::function<double(const ClusteredSample&)>& statistic,
                                  long long replicates, std::uint64_t seed);

}  // namespace icstat
