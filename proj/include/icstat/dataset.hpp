#pragma once

#include <string>
#include <vector>

#include "icstat/types.hpp"

namespace icstat {

// One cluster of observations. Rows of `outcomes` (and `covariates`, when
// present) are in within-cluster order; the 1-based row position is the
// within-cluster index.
struct Cluster {
  std::string id;
  Matrix outcomes;             // size x d, d in {1, 2}
  Matrix covariates;           // size x p, p == 0 when absent
  std::vector<char> censored;  // empty, or one flag per observation

  Index size() const { return outcomes.rows(); }
};

// Immutable sample of independent clusters. Validation happens once at
// construction; afterwards the object is safe to share across readers.
class ClusteredSample {
 public:
  explicit ClusteredSample(std::vector<Cluster> clusters);

  // Skips the per-value validation pass. For callers that construct clusters
  // from already-validated data (generators, bootstrap resampling).
  static ClusteredSample from_valid(std::vector<Cluster> clusters);

  const std::vector<Cluster>& clusters() const { return clusters_; }
  const Cluster& cluster(Index i) const { return clusters_[static_cast<std::size_t>(i)]; }

  Index num_clusters() const { return static_cast<Index>(clusters_.size()); }
  Index total_observations() const { return total_; }
  Index outcome_dim() const { return outcome_dim_; }
  Index covariate_dim() const { return covariate_dim_; }
  bool has_censored() const { return has_censored_; }

 private:
  ClusteredSample() = default;
  void finalize();
  void validate() const;

  std::vector<Cluster> clusters_;
  Index total_ = 0;
  Index outcome_dim_ = 0;
  Index covariate_dim_ = 0;
  bool has_censored_ = false;
};

// Flattened per-observation weights in cluster-major order. Weights sum to 1
// for every scheme.
Vector observation_weights(const ClusteredSample& sample, WeightingScheme scheme);

// Removes censored observations; clusters left empty are dropped entirely.
// Throws EmptyInputError when nothing remains.
ClusteredSample drop_censored(const ClusteredSample& sample);

// Throws InvalidArgumentError when the sample carries censored observations.
void require_uncensored(const ClusteredSample& sample);

struct SizeGroup {
  std::string label;    // cluster size as text, or "other" for pooled rare sizes
  Index n_clusters = 0;
  Index n_obs = 0;
  double mean = 0.0;    // within-group mean with equal weight per cluster
  Vector ecdf;          // group ECDF evaluated on the shared grid
};

struct DiagnosticTable {
  Vector grid;  // shared evaluation grid (deciles of the weighted ECDF)
  std::vector<SizeGroup> groups;
  bool size_constant = false;
};

// Descriptive comparison of the outcome distribution across cluster-size
// groups. Sizes represented by fewer than two clusters are pooled into an
// "other" bucket. No test decision is attached.
DiagnosticTable informativeness_diagnostic(const ClusteredSample& sample);

}  // namespace icstat
