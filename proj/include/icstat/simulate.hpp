#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "icstat/dataset.hpp"
#include "icstat/types.hpp"

namespace icstat {

// Synthetic-data mechanisms. SizeFirst draws the cluster size first and the
// outcomes conditionally on it; OutcomeFirstRecurrent truncates an event
// sequence at a fixed follow-up; Latent drives both size and outcomes from a
// shared latent variable. ExampleMean and ExampleCorrelation are the two
// concrete bias showcases used throughout the test suites.
struct GeneratorSpec {
  enum class Mechanism { SizeFirst, OutcomeFirstRecurrent, Latent, ExampleMean, ExampleCorrelation };

  Mechanism mechanism = Mechanism::ExampleMean;
  int n_clusters = 100;  // M
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
};

GeneratorSpec::Mechanism mechanism_from_string(const std::string& name);
std::string to_string(GeneratorSpec::Mechanism mechanism);

// Dispatches on the mechanism; validates mechanism-specific parameters.
ClusteredSample generate(const GeneratorSpec& spec);

// mu_i standard normal; N_i = n_a when mu_i < 0 and n_b otherwise;
// Y_ij = mu_i + standard normal noise.
ClusteredSample gen_example_mean(int n_clusters, int n_a, int n_b, std::uint64_t seed);

// Bivariate: mu_i and the noise are standard bivariate normal with identity
// covariance; N_i = n_a unless both components of mu_i exceed 1, in which
// case N_i = n_b.
ClusteredSample gen_example_correlation(int n_clusters, int n_a, int n_b, std::uint64_t seed);

struct GapDistribution {
  enum class Kind { Exponential, Fixed };
  Kind kind = Kind::Exponential;
  double value = 1.0;  // rate, or the fixed gap length

  static GapDistribution exponential(double rate) { return {Kind::Exponential, rate}; }
  static GapDistribution fixed(double gap) { return {Kind::Fixed, gap}; }
};

// Gap times drawn i.i.d. until their running sum reaches the follow-up c;
// the final gap is truncated at c and flagged censored.
ClusteredSample gen_recurrent_events(int n_clusters, double followup, GapDistribution gaps,
                                     std::uint64_t seed);

struct LatentLinks {
  double size_a = 0.7;     // log mean-size intercept
  double size_b = 1.0;     // log mean-size slope on the latent variable
  double outcome_sd = 1.0; // noise scale around the latent level
};

// xi_i standard normal; N_i = 1 + Poisson(exp(a + b xi_i));
// Y_ij = xi_i + Normal(0, outcome_sd), i.i.d. given xi_i.
ClusteredSample gen_latent(int n_clusters, const LatentLinks& links, std::uint64_t seed);

// N_i = 1 + Poisson(mean_size - 1) drawn first; Y_ij = size_coef * N_i +
// standard normal noise, so outcomes depend on the realized size.
ClusteredSample gen_size_first(int n_clusters, double mean_size, double size_coef,
                               std::uint64_t seed);

struct SweepRow {
  int n_clusters = 0;
  std::string estimator;  // "first", "ics", "naive"
  double mean = 0.0;
  double mc_se = 0.0;
};

// Monte Carlo mean (with its standard error) of each weighted-mean estimator,
// for each cluster count in `cluster_counts`. Datasets are independent across
// cells and replications.
std::vector<SweepRow> bias_sweep(const GeneratorSpec& base,
                                 const std::vector<WeightingScheme>& estimators,
                                 const std::vector<int>& cluster_counts, int replications,
                                 std::uint64_t seed);

}  // namespace icstat
