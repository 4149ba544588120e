#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "icstat/dataset.hpp"
#include "icstat/regression.hpp"
#include "icstat/rng.hpp"

namespace icstat::testing {

// Builds a univariate sample from per-cluster value lists, ids c1, c2, ...
inline ClusteredSample make_sample(const std::vector<std::vector<double>>& clusters) {
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    Cluster cl;
    cl.id = "c" + std::to_string(i + 1);
    const Index ni = static_cast<Index>(clusters[i].size());
    cl.outcomes.resize(ni, 1);
    for (Index j = 0; j < ni; ++j) cl.outcomes(j, 0) = clusters[i][static_cast<std::size_t>(j)];
    cl.covariates.resize(ni, 0);
    out.push_back(std::move(cl));
  }
  return ClusteredSample(std::move(out));
}

// Bivariate sample from per-cluster lists of (y1, y2) pairs.
inline ClusteredSample make_bivariate(
    const std::vector<std::vector<std::pair<double, double>>>& clusters) {
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    Cluster cl;
    cl.id = "c" + std::to_string(i + 1);
    const Index ni = static_cast<Index>(clusters[i].size());
    cl.outcomes.resize(ni, 2);
    for (Index j = 0; j < ni; ++j) {
      cl.outcomes(j, 0) = clusters[i][static_cast<std::size_t>(j)].first;
      cl.outcomes(j, 1) = clusters[i][static_cast<std::size_t>(j)].second;
    }
    cl.covariates.resize(ni, 0);
    out.push_back(std::move(cl));
  }
  return ClusteredSample(std::move(out));
}

// Visits every one-per-cluster selection of `sample` (own mixed-radix
// counter, independent of the library's enumeration).
inline void for_each_selection(const ClusteredSample& sample,
                               const std::function<void(const std::vector<double>&)>& visit) {
  const Index m = sample.num_clusters();
  std::vector<Index> rows(static_cast<std::size_t>(m), 0);
  std::vector<double> values(static_cast<std::size_t>(m));
  while (true) {
    for (Index i = 0; i < m; ++i)
      values[static_cast<std::size_t>(i)] =
          sample.cluster(i).outcomes(rows[static_cast<std::size_t>(i)], 0);
    visit(values);
    Index i = 0;
    for (; i < m; ++i) {
      if (++rows[static_cast<std::size_t>(i)] < sample.cluster(i).size()) break;
      rows[static_cast<std::size_t>(i)] = 0;
    }
    if (i == m) return;
  }
}

// Classical ECDF of `values` at y.
inline double classical_ecdf(const std::vector<double>& values, double y) {
  double count = 0.0;
  for (double v : values)
    if (v <= y) count += 1.0;
  return count / static_cast<double>(values.size());
}

// Classical one-sample signed rank: mean of sign(z) * rank(|z|)/m with ranks
// counting ties by upper count (self included).
inline double classical_signed_rank(const std::vector<double>& values, double theta0) {
  const std::size_t m = values.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double zi = values[i] - theta0;
    double rank = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      if (std::abs(values[k] - theta0) <= std::abs(zi)) rank += 1.0;
    const double sign = zi > 0.0 ? 1.0 : (zi < 0.0 ? -1.0 : 0.0);
    sum += sign * rank / static_cast<double>(m);
  }
  return sum / static_cast<double>(m);
}

// Lower weighted median by direct cumulative scan over sorted value/weight
// pairs, with the same 1e-12 slack the library gives itself.
inline double weighted_median_oracle(std::vector<std::pair<double, double>> value_weight) {
  std::sort(value_weight.begin(), value_weight.end());
  double total = 0.0;
  for (const auto& [v, w] : value_weight) total += w;
  double running = 0.0;
  for (const auto& [v, w] : value_weight) {
    running += w;
    if (running / total >= 0.5 - 1e-12) return v;
  }
  return value_weight.back().first;
}

// Regression sample with informative cluster size: the cluster level enters
// the outcome and decides the size, so pooled fits are biased in the
// intercept while the slope stays clean.
//   y_ij = b0 + b1 * x_ij + level_i + noise,  N_i = (level_i < 0 ? na : nb)
inline std::vector<DesignedCluster> make_ics_regression(int m, int na, int nb, double b0,
                                                        double b1, std::uint64_t seed) {
  std::mt19937_64 rng = substream(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DesignedCluster> clusters;
  clusters.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double level = normal(rng);
    const Index ni = level < 0.0 ? na : nb;
    DesignedCluster cl;
    cl.X.resize(ni, 2);
    cl.y.resize(ni);
    for (Index j = 0; j < ni; ++j) {
      const double x = normal(rng);
      cl.X(j, 0) = 1.0;
      cl.X(j, 1) = x;
      cl.y[j] = b0 + b1 * x + level + normal(rng);
    }
    clusters.push_back(std::move(cl));
  }
  return clusters;
}

}  // namespace icstat::testing
