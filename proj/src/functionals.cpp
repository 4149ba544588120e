#include "icstat/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "icstat/error.hpp"

namespace icstat {

namespace {

void require_univariate(const ClusteredSample& sample, const char* what) {
  if (sample.outcome_dim() != 1)
    throw InvalidArgumentError(std::string(what) + " requires a univariate outcome");
}

void require_bivariate(const ClusteredSample& sample, const char* what) {
  if (sample.outcome_dim() != 2)
    throw InvalidArgumentError(std::string(what) + " requires a bivariate outcome");
}

// Per-cluster means of one outcome component.
Vector cluster_means(const ClusteredSample& sample, Index component) {
  Vector means(sample.num_clusters());
  for (Index i = 0; i < sample.num_clusters(); ++i)
    means[i] = sample.cluster(i).outcomes.col(component).mean();
  return means;
}

double pooled_mean(const ClusteredSample& sample, Index component) {
  double sum = 0.0;
  for (const Cluster& cl : sample.clusters()) sum += cl.outcomes.col(component).sum();
  return sum / static_cast<double>(sample.total_observations());
}

double scheme_mean(const ClusteredSample& sample, WeightingScheme scheme) {
  switch (scheme) {
    case WeightingScheme::FirstObservation: {
      double sum = 0.0;
      for (const Cluster& cl : sample.clusters()) sum += cl.outcomes(0, 0);
      return sum / static_cast<double>(sample.num_clusters());
    }
    case WeightingScheme::InverseClusterSize:
      return cluster_means(sample, 0).mean();
    case WeightingScheme::NaivePooled:
      return pooled_mean(sample, 0);
  }
  return 0.0;
}

}  // namespace

std::string to_string(CovarianceEstimator estimator) {
  switch (estimator) {
    case CovarianceEstimator::Correct: return "correct";
    case CovarianceEstimator::NaivePooled: return "naive";
    case CovarianceEstimator::WeightedCrossNaiveCenter: return "weighted-naive-center";
  }
  return "?";
}

double tau_squared(const ClusteredSample& sample) {
  const Vector means = cluster_means(sample, 0);
  const double t2 = means.mean();
  const double second_moment = means.squaredNorm() / static_cast<double>(means.size());
  // Nonnegative in exact arithmetic; rounding can leave a tiny negative.
  return std::max(0.0, second_moment - t2 * t2);
}

Estimate marginal_mean(const ClusteredSample& sample, WeightingScheme scheme) {
  require_univariate(sample, "marginal mean");
  const double m = static_cast<double>(sample.num_clusters());
  Estimate est;
  est.scheme = scheme;
  est.n_clusters = sample.num_clusters();
  est.value = scheme_mean(sample, scheme);
  if (scheme == WeightingScheme::InverseClusterSize) {
    est.variance = tau_squared(sample) / m;
  } else if (scheme == WeightingScheme::FirstObservation) {
    double ss = 0.0;
    for (const Cluster& cl : sample.clusters()) {
      const double dev = cl.outcomes(0, 0) - est.value;
      ss += dev * dev;
    }
    est.variance = ss / m / m;
  }
  return est;
}

Estimate marginal_variance(const ClusteredSample& sample, WeightingScheme scheme) {
  require_univariate(sample, "marginal variance");
  const double center = scheme_mean(sample, scheme);
  const double m = static_cast<double>(sample.num_clusters());
  double value = 0.0;
  switch (scheme) {
    case WeightingScheme::FirstObservation:
      for (const Cluster& cl : sample.clusters()) {
        const double dev = cl.outcomes(0, 0) - center;
        value += dev * dev;
      }
      value /= m;
      break;
    case WeightingScheme::InverseClusterSize:
      for (const Cluster& cl : sample.clusters())
        value += (cl.outcomes.col(0).array() - center).square().mean();
      value /= m;
      break;
    case WeightingScheme::NaivePooled:
      for (const Cluster& cl : sample.clusters())
        value += (cl.outcomes.col(0).array() - center).square().sum();
      value /= static_cast<double>(sample.total_observations());
      break;
  }
  Estimate est;
  est.value = value;
  est.scheme = scheme;
  est.n_clusters = sample.num_clusters();
  return est;
}

Estimate weighted_median(const ClusteredSample& sample) {
  require_univariate(sample, "weighted median");
  Estimate est;
  est.value = weighted_ecdf(sample).quantile(0.5);
  est.scheme = WeightingScheme::InverseClusterSize;
  est.n_clusters = sample.num_clusters();
  return est;
}

Estimate trimmed_mean(const ClusteredSample& sample, double alpha) {
  require_univariate(sample, "trimmed mean");
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw InvalidArgumentError("trimming fraction must lie in [0, 1)");

  Estimate est;
  est.scheme = WeightingScheme::InverseClusterSize;
  est.n_clusters = sample.num_clusters();
  if (alpha == 0.0) {
    est.value = marginal_mean(sample, WeightingScheme::InverseClusterSize).value;
    return est;
  }

  const WeightedEcdf ecdf = weighted_ecdf(sample);
  const double lo = ecdf.quantile(alpha / 2.0);
  const double hi = ecdf.quantile(1.0 - alpha / 2.0);

  double value = 0.0;
  double retained = 0.0;
  const double m = static_cast<double>(sample.num_clusters());
  for (const Cluster& cl : sample.clusters()) {
    const double ni = static_cast<double>(cl.size());
    double sum = 0.0;
    for (Index j = 0; j < cl.size(); ++j) {
      const double y = cl.outcomes(j, 0);
      if (y >= lo && y <= hi) {
        sum += y;
        retained += 1.0 / (m * ni);
      }
    }
    value += sum / ((1.0 - alpha) * ni);
  }
  if (retained <= 0.0)
    throw DegenerateError("trimming removed the entire sample");
  est.value = value / m;
  return est;
}

Estimate marginal_covariance(const ClusteredSample& sample, CovarianceEstimator estimator) {
  require_bivariate(sample, "marginal covariance");
  const double m = static_cast<double>(sample.num_clusters());
  const double n = static_cast<double>(sample.total_observations());

  double c0 = 0.0, c1 = 0.0;
  if (estimator == CovarianceEstimator::Correct) {
    c0 = cluster_means(sample, 0).mean();
    c1 = cluster_means(sample, 1).mean();
  } else {
    c0 = pooled_mean(sample, 0);
    c1 = pooled_mean(sample, 1);
  }

  double value = 0.0;
  for (const Cluster& cl : sample.clusters()) {
    const double cross =
        ((cl.outcomes.col(0).array() - c0) * (cl.outcomes.col(1).array() - c1)).sum();
    if (estimator == CovarianceEstimator::NaivePooled)
      value += cross;
    else
      value += cross / static_cast<double>(cl.size());
  }
  value /= (estimator == CovarianceEstimator::NaivePooled) ? n : m;

  Estimate est;
  est.value = value;
  est.scheme = estimator == CovarianceEstimator::NaivePooled ? WeightingScheme::NaivePooled
                                                             : WeightingScheme::InverseClusterSize;
  est.n_clusters = sample.num_clusters();
  return est;
}

namespace {

// Weighted variance of one component of a bivariate sample, centered at its
// weighted mean.
double component_variance(const ClusteredSample& sample, Index component) {
  const double center = cluster_means(sample, component).mean();
  double value = 0.0;
  for (const Cluster& cl : sample.clusters())
    value += (cl.outcomes.col(component).array() - center).square().mean();
  return value / static_cast<double>(sample.num_clusters());
}

}  // namespace

Estimate marginal_correlation(const ClusteredSample& sample) {
  require_bivariate(sample, "marginal correlation");
  const double cov = marginal_covariance(sample, CovarianceEstimator::Correct).value;
  const double v0 = component_variance(sample, 0);
  const double v1 = component_variance(sample, 1);
  if (!(v0 > 0.0) || !(v1 > 0.0))
    throw DegenerateError("correlation undefined: a component has zero weighted variance");
  double r = cov / std::sqrt(v0 * v1);
  if (std::abs(r) > 1.0 + 1e-12)
    throw Error("correlation overshoots [-1, 1] beyond rounding; inconsistent inputs");
  r = std::clamp(r, -1.0, 1.0);
  Estimate est;
  est.value = r;
  est.scheme = WeightingScheme::InverseClusterSize;
  est.n_clusters = sample.num_clusters();
  return est;
}

Estimate hodges_lehmann(const ClusteredSample& sample, HodgesLehmannVariant variant) {
  require_univariate(sample, "Hodges-Lehmann estimate");
  const Index m = sample.num_clusters();
  if (m < 2)
    throw InvalidArgumentError("Hodges-Lehmann estimate needs at least two clusters");

  std::vector<double> averages;
  std::vector<double> weights;
  if (variant == HodgesLehmannVariant::FirstObservation) {
    averages.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (Index i = 0; i < m; ++i)
      for (Index k = i + 1; k < m; ++k) {
        averages.push_back(0.5 * (sample.cluster(i).outcomes(0, 0) +
                                  sample.cluster(k).outcomes(0, 0)));
        weights.push_back(1.0);
      }
  } else {
    for (Index i = 0; i < m; ++i) {
      const Cluster& a = sample.cluster(i);
      for (Index k = i + 1; k < m; ++k) {
        const Cluster& b = sample.cluster(k);
        const double w = 1.0 / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
        for (Index ja = 0; ja < a.size(); ++ja)
          for (Index jb = 0; jb < b.size(); ++jb) {
            averages.push_back(0.5 * (a.outcomes(ja, 0) + b.outcomes(jb, 0)));
            weights.push_back(w);
          }
      }
    }
  }

  Estimate est;
  est.value = WeightedEcdf(averages, weights).quantile(0.5);
  est.scheme = variant == HodgesLehmannVariant::FirstObservation
                   ? WeightingScheme::FirstObservation
                   : WeightingScheme::InverseClusterSize;
  est.n_clusters = m;
  return est;
}

}  // namespace icstat
