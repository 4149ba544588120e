#include "icstat/simulate.hpp"

#include <cmath>
#include <utility>

#include "icstat/error.hpp"
#include "icstat/functionals.hpp"
#include "icstat/rng.hpp"

namespace icstat {

namespace {

double param(const GeneratorSpec& spec, const std::string& key, double fallback) {
  const auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

int int_param(const GeneratorSpec& spec, const std::string& key, int fallback) {
  return static_cast<int>(std::llround(param(spec, key, fallback)));
}

std::string cluster_id(int i) { return "c" + std::to_string(i + 1); }

void require_positive_clusters(int n_clusters) {
  if (n_clusters < 1) throw InvalidArgumentError("generator needs at least one cluster");
}

}  // namespace

GeneratorSpec::Mechanism mechanism_from_string(const std::string& name) {
  if (name == "size-first") return GeneratorSpec::Mechanism::SizeFirst;
  if (name == "recurrent") return GeneratorSpec::Mechanism::OutcomeFirstRecurrent;
  if (name == "latent") return GeneratorSpec::Mechanism::Latent;
  if (name == "example-mean") return GeneratorSpec::Mechanism::ExampleMean;
  if (name == "example-correlation") return GeneratorSpec::Mechanism::ExampleCorrelation;
  throw InvalidArgumentError(
      "unknown mechanism '" + name +
      "' (expected size-first|recurrent|latent|example-mean|example-correlation)");
}

std::string to_string(GeneratorSpec::Mechanism mechanism) {
  switch (mechanism) {
    case GeneratorSpec::Mechanism::SizeFirst: return "size-first";
    case GeneratorSpec::Mechanism::OutcomeFirstRecurrent: return "recurrent";
    case GeneratorSpec::Mechanism::Latent: return "latent";
    case GeneratorSpec::Mechanism::ExampleMean: return "example-mean";
    case GeneratorSpec::Mechanism::ExampleCorrelation: return "example-correlation";
  }
  return "?";
}

ClusteredSample gen_example_mean(int n_clusters, int n_a, int n_b, std::uint64_t seed) {
  require_positive_clusters(n_clusters);
  if (n_a < 1 || n_b < 1) throw InvalidArgumentError("cluster sizes must be at least 1");
  std::mt19937_64 rng = substream(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Cluster> clusters;
  clusters.reserve(static_cast<std::size_t>(n_clusters));
  for (int i = 0; i < n_clusters; ++i) {
    const double mu = normal(rng);
    const Index ni = mu < 0.0 ? n_a : n_b;
    Cluster cl;
    cl.id = cluster_id(i);
    cl.outcomes.resize(ni, 1);
    for (Index j = 0; j < ni; ++j) cl.outcomes(j, 0) = mu + normal(rng);
    cl.covariates.resize(ni, 0);
    clusters.push_back(std::move(cl));
  }
  return ClusteredSample::from_valid(std::move(clusters));
}

ClusteredSample gen_example_correlation(int n_clusters, int n_a, int n_b, std::uint64_t seed) {
  require_positive_clusters(n_clusters);
  if (n_a < 1 || n_b < n_a)
    throw InvalidArgumentError("correlation generator needs 1 <= n_a <= n_b");
  std::mt19937_64 rng = substream(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Cluster> clusters;
  clusters.reserve(static_cast<std::size_t>(n_clusters));
  for (int i = 0; i < n_clusters; ++i) {
    const double mu1 = normal(rng);
    const double mu2 = normal(rng);
    const Index ni = n_a + ((mu1 > 1.0 && mu2 > 1.0) ? (n_b - n_a) : 0);
    Cluster cl;
    cl.id = cluster_id(i);
    cl.outcomes.resize(ni, 2);
    for (Index j = 0; j < ni; ++j) {
      cl.outcomes(j, 0) = mu1 + normal(rng);
      cl.outcomes(j, 1) = mu2 + normal(rng);
    }
    cl.covariates.resize(ni, 0);
    clusters.push_back(std::move(cl));
  }
  return ClusteredSample::from_valid(std::move(clusters));
}

ClusteredSample gen_recurrent_events(int n_clusters, double followup, GapDistribution gaps,
                                     std::uint64_t seed) {
  require_positive_clusters(n_clusters);
  if (!(followup > 0.0)) throw InvalidArgumentError("follow-up length must be positive");
  if (!(gaps.value > 0.0)) throw InvalidArgumentError("gap distribution parameter must be positive");

  std::mt19937_64 rng = substream(seed, 0);
  std::exponential_distribution<double> exponential(
      gaps.kind == GapDistribution::Kind::Exponential ? gaps.value : 1.0);
  auto draw_gap = [&]() {
    return gaps.kind == GapDistribution::Kind::Exponential ? exponential(rng) : gaps.value;
  };

  std::vector<Cluster> clusters;
  clusters.reserve(static_cast<std::size_t>(n_clusters));
  for (int i = 0; i < n_clusters; ++i) {
    std::vector<double> observed;
    double cumulative = 0.0;
    while (true) {
      const double gap = draw_gap();
      if (cumulative + gap >= followup) {
        observed.push_back(followup - cumulative);  // truncated final gap
        break;
      }
      cumulative += gap;
      observed.push_back(gap);
    }
    Cluster cl;
    cl.id = cluster_id(i);
    const Index ni = static_cast<Index>(observed.size());
    cl.outcomes.resize(ni, 1);
    for (Index j = 0; j < ni; ++j) cl.outcomes(j, 0) = observed[static_cast<std::size_t>(j)];
    cl.covariates.resize(ni, 0);
    cl.censored.assign(static_cast<std::size_t>(ni), 0);
    cl.censored.back() = 1;
    clusters.push_back(std::move(cl));
  }
  return ClusteredSample::from_valid(std::move(clusters));
}

ClusteredSample gen_latent(int n_clusters, const LatentLinks& links, std::uint64_t seed) {
  require_positive_clusters(n_clusters);
  if (!(links.outcome_sd > 0.0)) throw InvalidArgumentError("outcome noise scale must be positive");
  std::mt19937_64 rng = substream(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Cluster> clusters;
  clusters.reserve(static_cast<std::size_t>(n_clusters));
  for (int i = 0; i < n_clusters; ++i) {
    const double xi = normal(rng);
    const double mean_extra = std::exp(links.size_a + links.size_b * xi);
    if (!std::isfinite(mean_extra))
      throw InvalidArgumentError("latent size link overflowed; reduce size_a/size_b");
    std::poisson_distribution<Index> poisson(mean_extra);
    const Index ni = 1 + poisson(rng);
    Cluster cl;
    cl.id = cluster_id(i);
    cl.outcomes.resize(ni, 1);
    for (Index j = 0; j < ni; ++j) cl.outcomes(j, 0) = xi + links.outcome_sd * normal(rng);
    cl.covariates.resize(ni, 0);
    clusters.push_back(std::move(cl));
  }
  return ClusteredSample::from_valid(std::move(clusters));
}

ClusteredSample gen_size_first(int n_clusters, double mean_size, double size_coef,
                               std::uint64_t seed) {
  require_positive_clusters(n_clusters);
  if (!(mean_size >= 1.0)) throw InvalidArgumentError("mean cluster size must be at least 1");
  std::mt19937_64 rng = substream(seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Cluster> clusters;
  clusters.reserve(static_cast<std::size_t>(n_clusters));
  for (int i = 0; i < n_clusters; ++i) {
    Index ni = 1;
    if (mean_size > 1.0) {
      std::poisson_distribution<Index> poisson(mean_size - 1.0);
      ni = 1 + poisson(rng);
    }
    Cluster cl;
    cl.id = cluster_id(i);
    cl.outcomes.resize(ni, 1);
    for (Index j = 0; j < ni; ++j)
      cl.outcomes(j, 0) = size_coef * static_cast<double>(ni) + normal(rng);
    cl.covariates.resize(ni, 0);
    clusters.push_back(std::move(cl));
  }
  return ClusteredSample::from_valid(std::move(clusters));
}

ClusteredSample generate(const GeneratorSpec& spec) {
  switch (spec.mechanism) {
    case GeneratorSpec::Mechanism::ExampleMean:
      return gen_example_mean(spec.n_clusters, int_param(spec, "na", 5), int_param(spec, "nb", 50),
                              spec.seed);
    case GeneratorSpec::Mechanism::ExampleCorrelation:
      return gen_example_correlation(spec.n_clusters, int_param(spec, "na", 1),
                                     int_param(spec, "nb", 10), spec.seed);
    case GeneratorSpec::Mechanism::OutcomeFirstRecurrent: {
      GapDistribution gaps = spec.params.count("gap")
                                 ? GapDistribution::fixed(param(spec, "gap", 1.0))
                                 : GapDistribution::exponential(param(spec, "rate", 1.0));
      return gen_recurrent_events(spec.n_clusters, param(spec, "followup", 3.0), gaps, spec.seed);
    }
    case GeneratorSpec::Mechanism::Latent: {
      LatentLinks links;
      links.size_a = param(spec, "size_a", 0.7);
      links.size_b = param(spec, "size_b", 1.0);
      links.outcome_sd = param(spec, "outcome_sd", 1.0);
      return gen_latent(spec.n_clusters, links, spec.seed);
    }
    case GeneratorSpec::Mechanism::SizeFirst:
      return gen_size_first(spec.n_clusters, param(spec, "mean_size", 4.0),
                            param(spec, "size_coef", 0.5), spec.seed);
  }
  throw InvalidArgumentError("unknown mechanism");
}

std::vector<SweepRow> bias_sweep(const GeneratorSpec& base,
                                 const std::vector<WeightingScheme>& estimators,
                                 const std::vector<int>& cluster_counts, int replications,
                                 std::uint64_t seed) {
  if (replications < 100)
    throw InvalidArgumentError("bias sweep needs at least 100 replications");
  if (estimators.empty() || cluster_counts.empty())
    throw InvalidArgumentError("bias sweep needs estimators and cluster counts");

  std::vector<SweepRow> rows;
  std::uint64_t dataset_index = 0;
  for (int m : cluster_counts) {
    std::vector<double> sums(estimators.size(), 0.0);
    std::vector<double> sumsqs(estimators.size(), 0.0);
    for (int r = 0; r < replications; ++r) {
      GeneratorSpec spec = base;
      spec.n_clusters = m;
      spec.seed = splitmix64(seed) + dataset_index++;
      const ClusteredSample sample = generate(spec);
      for (std::size_t e = 0; e < estimators.size(); ++e) {
        const double value = marginal_mean(sample, estimators[e]).value;
        sums[e] += value;
        sumsqs[e] += value * value;
      }
    }
    const double n = static_cast<double>(replications);
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      SweepRow row;
      row.n_clusters = m;
      row.estimator = to_string(estimators[e]);
      row.mean = sums[e] / n;
      const double var = std::max(0.0, (sumsqs[e] - n * row.mean * row.mean) / (n - 1.0));
      row.mc_se = std::sqrt(var / n);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace icstat
