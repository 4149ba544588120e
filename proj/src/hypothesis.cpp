#include "icstat/hypothesis.hpp"

#include <algorithm>
#include <cmath>

#include "icstat/ecdf.hpp"
#include "icstat/error.hpp"
#include "icstat/functionals.hpp"
#include "icstat/rng.hpp"

namespace icstat {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_testable(const ClusteredSample& sample, const char* what) {
  if (sample.outcome_dim() != 1)
    throw InvalidArgumentError(std::string(what) + " requires a univariate outcome");
  if (sample.num_clusters() < 2)
    throw InvalidArgumentError(std::string(what) + " needs at least two clusters");
}

// Per-cluster means of sign(Y - theta0).
Vector sign_summaries(const ClusteredSample& sample, double theta0) {
  Vector g(sample.num_clusters());
  for (Index i = 0; i < sample.num_clusters(); ++i) {
    const auto& y = sample.cluster(i).outcomes.col(0);
    double sum = 0.0;
    for (Index j = 0; j < y.size(); ++j) sum += sgn(y[j] - theta0);
    g[i] = sum / static_cast<double>(y.size());
  }
  return g;
}

// Per-cluster means of sign(Z) * F+(|Z|), Z = Y - theta0.
Vector signed_rank_summaries(const ClusteredSample& sample, double theta0) {
  std::vector<double> values;
  std::vector<double> weights;
  const double m = static_cast<double>(sample.num_clusters());
  for (const Cluster& cl : sample.clusters()) {
    const double w = 1.0 / (m * static_cast<double>(cl.size()));
    for (Index j = 0; j < cl.size(); ++j) {
      values.push_back(std::abs(cl.outcomes(j, 0) - theta0));
      weights.push_back(w);
    }
  }
  const WeightedEcdf fplus(values, weights);

  Vector g(sample.num_clusters());
  for (Index i = 0; i < sample.num_clusters(); ++i) {
    const auto& y = sample.cluster(i).outcomes.col(0);
    double sum = 0.0;
    for (Index j = 0; j < y.size(); ++j) {
      const double z = y[j] - theta0;
      sum += sgn(z) * fplus(std::abs(z));
    }
    g[i] = sum / static_cast<double>(y.size());
  }
  return g;
}

Vector mean_summaries(const ClusteredSample& sample, double theta0) {
  Vector g(sample.num_clusters());
  for (Index i = 0; i < sample.num_clusters(); ++i)
    g[i] = sample.cluster(i).outcomes.col(0).mean() - theta0;
  return g;
}

// Quadratic-form test from i.i.d. cluster summaries with mean zero under the
// null: statistic is the summary mean, the null variance their second moment.
TestResult chi_square_test(const Vector& g, const std::string& method) {
  const double m = static_cast<double>(g.size());
  TestResult result;
  result.method = method;
  result.statistic = g.mean();
  result.variance = g.squaredNorm() / m;
  if (!(result.variance > 0.0))
    throw DegenerateError(method + " test is degenerate: all cluster summaries are zero");
  result.standardized = m * result.statistic * result.statistic / result.variance;
  result.reference = ReferenceDistribution::ChiSquare1;
  result.p_value = chi_square1_survival(result.standardized);
  return result;
}

double normal_p_value(double z, Alternative alternative) {
  switch (alternative) {
    case Alternative::TwoSided: return std::erfc(std::abs(z) / kSqrt2);
    case Alternative::Greater: return 1.0 - normal_cdf(z);
    case Alternative::Less: return normal_cdf(z);
  }
  return 1.0;
}

}  // namespace

std::string to_string(ReferenceDistribution reference) {
  return reference == ReferenceDistribution::StandardNormal ? "standard-normal" : "chi-square-1";
}

std::string to_string(Alternative alternative) {
  switch (alternative) {
    case Alternative::TwoSided: return "two-sided";
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
  }
  return "?";
}

std::string to_string(VarianceMethod method) {
  switch (method) {
    case VarianceMethod::Analytic: return "analytic";
    case VarianceMethod::MonteCarloFormula: return "mc";
    case VarianceMethod::ClusterBootstrap: return "bootstrap";
  }
  return "?";
}

VarianceMethod variance_method_from_string(const std::string& name) {
  if (name == "analytic") return VarianceMethod::Analytic;
  if (name == "mc") return VarianceMethod::MonteCarloFormula;
  if (name == "bootstrap") return VarianceMethod::ClusterBootstrap;
  throw InvalidArgumentError("unknown variance method '" + name +
                             "' (expected analytic|mc|bootstrap)");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double chi_square1_survival(double x) {
  if (x <= 0.0) return 1.0;
  return std::erfc(std::sqrt(x / 2.0));
}

double sign_statistic(const ClusteredSample& sample, double theta0) {
  if (sample.outcome_dim() != 1)
    throw InvalidArgumentError("sign statistic requires a univariate outcome");
  return sign_summaries(sample, theta0).mean();
}

double signed_rank_statistic(const ClusteredSample& sample, double theta0) {
  if (sample.outcome_dim() != 1)
    throw InvalidArgumentError("signed-rank statistic requires a univariate outcome");
  return signed_rank_summaries(sample, theta0).mean();
}

TestResult sign_test(const ClusteredSample& sample, double theta0) {
  require_testable(sample, "sign test");
  return chi_square_test(sign_summaries(sample, theta0), "sign");
}

TestResult signed_rank_test(const ClusteredSample& sample, double theta0) {
  require_testable(sample, "signed-rank test");
  return chi_square_test(signed_rank_summaries(sample, theta0), "signed-rank");
}

TestResult signed_rank_test_bootstrap(const ClusteredSample& sample, double theta0,
                                      long long bootstrap_replicates, std::uint64_t seed) {
  require_testable(sample, "signed-rank test");
  const double m = static_cast<double>(sample.num_clusters());
  TestResult result;
  result.method = "signed-rank (bootstrap variance)";
  result.statistic = signed_rank_statistic(sample, theta0);
  result.variance =
      m * cluster_bootstrap_variance(
              sample,
              [theta0](const ClusteredSample& s) { return signed_rank_statistic(s, theta0); },
              bootstrap_replicates, seed);
  result.replicates = bootstrap_replicates;
  if (!(result.variance > 0.0))
    throw DegenerateError("signed-rank test is degenerate: bootstrap variance is zero");
  result.standardized = m * result.statistic * result.statistic / result.variance;
  result.reference = ReferenceDistribution::ChiSquare1;
  result.p_value = chi_square1_survival(result.standardized);
  return result;
}

TestResult modified_t_test(const ClusteredSample& sample, double mu0, Alternative alternative) {
  require_testable(sample, "t test");
  const Vector g = mean_summaries(sample, mu0);
  const double m = static_cast<double>(g.size());
  TestResult result;
  result.method = "t";
  result.alternative = alternative;
  result.statistic = g.mean();
  result.variance = g.squaredNorm() / m;
  if (!(result.variance > 0.0))
    throw DegenerateError("t test is degenerate: zero second moment about mu0");
  result.standardized = std::sqrt(m) * result.statistic / std::sqrt(result.variance);
  result.reference = ReferenceDistribution::StandardNormal;
  result.p_value = normal_p_value(result.standardized, alternative);
  return result;
}

const std::vector<std::string>& registered_statistics() {
  static const std::vector<std::string> names{"mean", "sign", "signed-rank", "t"};
  return names;
}

IidStatistic make_iid_statistic(const std::string& name, double theta0) {
  IidStatistic st;
  st.name = name;
  if (name == "mean") {
    st.value = [theta0](const Vector& y) { return y.mean() - theta0; };
    st.variance = [](const Vector& y) {
      const Index m = y.size();
      if (m < 2) return 0.0;
      const double mean = y.mean();
      const double ss = (y.array() - mean).square().sum();
      return ss / static_cast<double>(m - 1) / static_cast<double>(m);
    };
  } else if (name == "sign") {
    st.value = [theta0](const Vector& y) {
      double sum = 0.0;
      for (Index i = 0; i < y.size(); ++i) sum += sgn(y[i] - theta0);
      return sum / static_cast<double>(y.size());
    };
    st.variance = [theta0](const Vector& y) {
      double sum = 0.0;
      for (Index i = 0; i < y.size(); ++i) sum += y[i] != theta0 ? 1.0 : 0.0;
      const double m = static_cast<double>(y.size());
      return sum / (m * m);
    };
  } else if (name == "signed-rank") {
    // Classical one-sample signed rank on the selection: ranks of |Z| scaled
    // to (0, 1] by the sample size, self included.
    auto ranks = [theta0](const Vector& y) {
      const Index m = y.size();
      std::vector<double> absz(static_cast<std::size_t>(m));
      for (Index i = 0; i < m; ++i) absz[static_cast<std::size_t>(i)] = std::abs(y[i] - theta0);
      std::vector<double> sorted = absz;
      std::sort(sorted.begin(), sorted.end());
      Vector r(m);
      for (Index i = 0; i < m; ++i) {
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(),
                                         absz[static_cast<std::size_t>(i)]);
        r[i] = static_cast<double>(hi - sorted.begin()) / static_cast<double>(m);
      }
      return r;
    };
    st.value = [theta0, ranks](const Vector& y) {
      const Vector r = ranks(y);
      double sum = 0.0;
      for (Index i = 0; i < y.size(); ++i) sum += sgn(y[i] - theta0) * r[i];
      return sum / static_cast<double>(y.size());
    };
    st.variance = [theta0, ranks](const Vector& y) {
      const Vector r = ranks(y);
      double sum = 0.0;
      for (Index i = 0; i < y.size(); ++i)
        if (y[i] != theta0) sum += r[i] * r[i];
      const double m = static_cast<double>(y.size());
      return sum / (m * m);
    };
  } else if (name == "t") {
    st.value = [theta0](const Vector& y) {
      const Index m = y.size();
      if (m < 2) throw DegenerateError("t statistic needs at least two selected values");
      const double mean = y.mean();
      const double s2 = (y.array() - mean).square().sum() / static_cast<double>(m - 1);
      if (!(s2 > 0.0))
        throw DegenerateError("t statistic is degenerate: constant selection");
      return std::sqrt(static_cast<double>(m)) * (mean - theta0) / std::sqrt(s2);
    };
    st.variance = [](const Vector&) { return 1.0; };
  } else {
    throw InvalidArgumentError("unknown statistic '" + name +
                               "' (expected mean|sign|signed-rank|t)");
  }
  return st;
}

TestResult wcr_test(const ClusteredSample& sample, const std::string& statistic, double theta0,
                    const WcrTestConfig& config) {
  require_testable(sample, "resampling test");
  const IidStatistic st = make_iid_statistic(statistic, theta0);

  WcrConfig rcfg;
  rcfg.replicates = config.replicates;
  rcfg.seed = config.seed;
  rcfg.exact_enumeration_cap = config.exact_cap;
  const WcrOutput out = wcr_estimate(sample, st, rcfg);
  if (!out.exact && config.replicates < 2)
    throw InvalidArgumentError("resampling test needs at least two replicates");

  const double m = static_cast<double>(sample.num_clusters());
  TestResult result;
  result.method = "wcr:" + statistic + (out.exact ? " (exact)" : "");
  result.alternative = config.alternative;
  result.statistic = out.point;
  result.replicates = static_cast<long long>(out.replicate_values.size());

  switch (config.variance_method) {
    case VarianceMethod::Analytic: {
      Vector g;
      if (statistic == "mean")
        g = mean_summaries(sample, theta0);
      else if (statistic == "sign")
        g = sign_summaries(sample, theta0);
      else if (statistic == "signed-rank")
        g = signed_rank_summaries(sample, theta0);
      else
        throw InvalidArgumentError("analytic variance is unavailable for statistic '" +
                                   statistic + "'");
      result.variance = g.squaredNorm() / m;
      break;
    }
    case VarianceMethod::MonteCarloFormula: {
      const VarianceEstimate ve = wcr_variance(out);
      if (ve.clamped)
        result.warnings.push_back("resampling variance was negative and clamped to zero");
      result.variance = m * ve.value;
      break;
    }
    case VarianceMethod::ClusterBootstrap: {
      std::function<double(const ClusteredSample&)> eval;
      if (statistic == "mean") {
        eval = [theta0](const ClusteredSample& s) {
          return marginal_mean(s, WeightingScheme::InverseClusterSize).value - theta0;
        };
      } else if (statistic == "sign") {
        eval = [theta0](const ClusteredSample& s) { return sign_statistic(s, theta0); };
      } else if (statistic == "signed-rank") {
        eval = [theta0](const ClusteredSample& s) { return signed_rank_statistic(s, theta0); };
      } else {
        // No closed clustered form; re-average the resampled statistic.
        eval = [&st, &rcfg](const ClusteredSample& s) {
          return wcr_estimate(s, st, rcfg).point;
        };
      }
      result.variance = m * cluster_bootstrap_variance(sample, eval, config.bootstrap_replicates,
                                                       splitmix64(config.seed) + 0x626f6f74ULL);
      break;
    }
  }

  if (!(result.variance > 0.0))
    throw DegenerateError("resampling test is degenerate: estimated variance is zero");

  if (statistic == "sign" || statistic == "signed-rank") {
    result.reference = ReferenceDistribution::ChiSquare1;
    result.standardized = m * result.statistic * result.statistic / result.variance;
    result.p_value = chi_square1_survival(result.standardized);
  } else {
    result.reference = ReferenceDistribution::StandardNormal;
    result.standardized = std::sqrt(m) * result.statistic / std::sqrt(result.variance);
    result.p_value = normal_p_value(result.standardized, config.alternative);
  }
  return result;
}

}  // namespace icstat
