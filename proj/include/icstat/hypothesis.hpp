#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icstat/dataset.hpp"
#include "icstat/resampling.hpp"
#include "icstat/types.hpp"

namespace icstat {

enum class ReferenceDistribution { StandardNormal, ChiSquare1 };
enum class Alternative { TwoSided, Greater, Less };

std::string to_string(ReferenceDistribution reference);
std::string to_string(Alternative alternative);

struct TestResult {
  double statistic = 0.0;
  double variance = 0.0;     // estimate of Var(sqrt(M) * statistic)
  double standardized = 0.0; // z value, or the chi-square quadratic form
  ReferenceDistribution reference = ReferenceDistribution::StandardNormal;
  double p_value = 1.0;
  std::string method;
  Alternative alternative = Alternative::TwoSided;
  std::optional<long long> replicates;  // B, when resampling was involved
  std::vector<std::string> warnings;
};

double normal_cdf(double z);
double chi_square1_survival(double x);

// Statistic values alone (no variance, no reference); defined for any M >= 1.
double sign_statistic(const ClusteredSample& sample, double theta0);
double signed_rank_statistic(const ClusteredSample& sample, double theta0);

// Cluster-weighted sign test of location theta0. The quadratic form
// M * S^2 / v is referred to chi-square with one degree of freedom, with v
// the empirical second moment of the per-cluster sign means.
TestResult sign_test(const ClusteredSample& sample, double theta0 = 0.0);

// Weighted signed-rank test: ranks are sign(Y - theta0) * F+(|Y - theta0|)
// with F+ the cluster-weighted ECDF of the absolute centered values.
TestResult signed_rank_test(const ClusteredSample& sample, double theta0 = 0.0);

// Same statistic, but the null variance comes from a cluster bootstrap of
// the statistic instead of the per-cluster second moment.
TestResult signed_rank_test_bootstrap(const ClusteredSample& sample, double theta0,
                                      long long bootstrap_replicates, std::uint64_t seed);

// Weighted one-sample t test: sqrt(M) * T2 / sigma with sigma^2 the empirical
// second moment of the per-cluster means about mu0.
TestResult modified_t_test(const ClusteredSample& sample, double mu0 = 0.0,
                           Alternative alternative = Alternative::TwoSided);

enum class VarianceMethod { Analytic, MonteCarloFormula, ClusterBootstrap };

std::string to_string(VarianceMethod method);
VarianceMethod variance_method_from_string(const std::string& name);  // "analytic"|"mc"|"bootstrap"

struct WcrTestConfig {
  long long replicates = 1000;
  std::uint64_t seed = 0;
  VarianceMethod variance_method = VarianceMethod::MonteCarloFormula;
  long long exact_cap = 1'000'000;
  long long bootstrap_replicates = 500;
  Alternative alternative = Alternative::TwoSided;
};

// Stable statistic names accepted by wcr_test: "mean", "sign", "signed-rank", "t".
const std::vector<std::string>& registered_statistics();

// The i.i.d.-sample statistic (with its variance formula, when one exists)
// behind a registry name, centered at theta0.
IidStatistic make_iid_statistic(const std::string& name, double theta0);

// Generic test built from within-cluster resampling: averages the registry
// statistic over one-per-cluster selections and standardizes with the chosen
// variance method.
TestResult wcr_test(const ClusteredSample& sample, const std::string& statistic, double theta0,
                    const WcrTestConfig& config);

}  // namespace icstat
