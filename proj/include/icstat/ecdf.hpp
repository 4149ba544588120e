#pragma once

#include <vector>

#include "icstat/types.hpp"

namespace icstat {

class ClusteredSample;

// Right-continuous step CDF with weighted jumps. Quantiles follow the
// inf{y : F(y) >= alpha} convention, with kTol of slack so that exact
// rational masses survive accumulated rounding.
class WeightedEcdf {
 public:
  WeightedEcdf(const std::vector<double>& values, const std::vector<double>& weights);

  double operator()(double y) const;
  double quantile(double alpha) const;

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& cumulative() const { return cumulative_; }

  static constexpr double kTol = 1e-12;

 private:
  std::vector<double> support_;     // sorted distinct values
  std::vector<double> cumulative_;  // nondecreasing, last entry 1
};

// Cluster-weighted ECDF: each observation of cluster i carries mass
// 1/(M*N_i). With `absolute`, jumps sit at |value| instead.
WeightedEcdf weighted_ecdf(const ClusteredSample& sample, bool absolute = false);

double quantile(const WeightedEcdf& ecdf, double alpha);

}  // namespace icstat
