#include "icstat/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "icstat/error.hpp"
#include "icstat/rng.hpp"

namespace icstat {

std::vector<Index> wcr_draw(const ClusteredSample& sample, std::mt19937_64& rng) {
  std::vector<Index> rows(static_cast<std::size_t>(sample.num_clusters()));
  for (Index i = 0; i < sample.num_clusters(); ++i) {
    const Index ni = sample.cluster(i).size();
    if (ni == 1) {
      rows[static_cast<std::size_t>(i)] = 0;
    } else {
      std::uniform_int_distribution<Index> pick(0, ni - 1);
      rows[static_cast<std::size_t>(i)] = pick(rng);
    }
  }
  return rows;
}

Vector select_outcomes(const ClusteredSample& sample, const std::vector<Index>& rows,
                       Index component) {
  Vector out(sample.num_clusters());
  for (Index i = 0; i < sample.num_clusters(); ++i)
    out[i] = sample.cluster(i).outcomes(rows[static_cast<std::size_t>(i)], component);
  return out;
}

long long enumeration_count(const ClusteredSample& sample, long long cap) {
  if (cap < 1) return -1;
  long long count = 1;
  for (const Cluster& cl : sample.clusters()) {
    count *= static_cast<long long>(cl.size());
    if (count > cap) return -1;
  }
  return count;
}

WcrOutput wcr_estimate(const ClusteredSample& sample, const IidStatistic& statistic,
                       const WcrConfig& config) {
  if (!statistic.value) throw InvalidArgumentError("resampling statistic has no value function");

  WcrOutput output;
  const bool has_variance = static_cast<bool>(statistic.variance);
  const Index m = sample.num_clusters();

  const long long combos = enumeration_count(sample, config.exact_enumeration_cap);
  if (combos > 0) {
    output.exact = true;
    output.replicate_values.reserve(static_cast<std::size_t>(combos));
    output.replicate_weights.reserve(static_cast<std::size_t>(combos));
    if (has_variance) output.replicate_variances.reserve(static_cast<std::size_t>(combos));

    double inv_combo_weight = 1.0;
    for (const Cluster& cl : sample.clusters())
      inv_combo_weight *= static_cast<double>(cl.size());
    const double weight = 1.0 / inv_combo_weight;

    std::vector<Index> rows(static_cast<std::size_t>(m), 0);
    Vector selected(m);
    for (Index i = 0; i < m; ++i) selected[i] = sample.cluster(i).outcomes(0, 0);
    double point = 0.0;
    while (true) {
      const double value = statistic.value(selected);
      output.replicate_values.push_back(value);
      output.replicate_weights.push_back(weight);
      if (has_variance) output.replicate_variances.push_back(statistic.variance(selected));
      point += weight * value;

      // Mixed-radix increment over within-cluster indices.
      Index i = 0;
      for (; i < m; ++i) {
        auto& r = rows[static_cast<std::size_t>(i)];
        if (++r < sample.cluster(i).size()) {
          selected[i] = sample.cluster(i).outcomes(r, 0);
          break;
        }
        r = 0;
        selected[i] = sample.cluster(i).outcomes(0, 0);
      }
      if (i == m) break;
    }
    output.point = point;
    return output;
  }

  if (config.replicates < 1)
    throw InvalidArgumentError("Monte Carlo resampling needs at least one replicate");
  output.replicate_values.reserve(static_cast<std::size_t>(config.replicates));
  if (has_variance) output.replicate_variances.reserve(static_cast<std::size_t>(config.replicates));
  double sum = 0.0;
  for (long long b = 0; b < config.replicates; ++b) {
    std::mt19937_64 rng = substream(config.seed, static_cast<std::uint64_t>(b));
    const std::vector<Index> rows = wcr_draw(sample, rng);
    const Vector selected = select_outcomes(sample, rows);
    const double value = statistic.value(selected);
    output.replicate_values.push_back(value);
    if (has_variance) output.replicate_variances.push_back(statistic.variance(selected));
    sum += value;
  }
  output.point = sum / static_cast<double>(config.replicates);
  return output;
}

VarianceEstimate wcr_variance(const WcrOutput& output) {
  if (output.replicate_variances.empty())
    throw InvalidArgumentError("resampling variance needs per-replicate variance values");
  const std::size_t b = output.replicate_values.size();

  double mean_variance = 0.0;
  double spread = 0.0;
  if (output.exact) {
    for (std::size_t k = 0; k < b; ++k) {
      const double w = output.replicate_weights[k];
      mean_variance += w * output.replicate_variances[k];
      const double dev = output.replicate_values[k] - output.point;
      spread += w * dev * dev;
    }
  } else {
    if (b < 2)
      throw InvalidArgumentError("Monte Carlo variance formula needs at least two replicates");
    for (std::size_t k = 0; k < b; ++k) {
      mean_variance += output.replicate_variances[k];
      const double dev = output.replicate_values[k] - output.point;
      spread += dev * dev;
    }
    mean_variance /= static_cast<double>(b);
    spread /= static_cast<double>(b - 1);
  }

  VarianceEstimate est;
  est.value = mean_variance - spread;
  if (est.value < 0.0) {
    est.value = 0.0;
    est.clamped = true;
  }
  return est;
}

double cluster_bootstrap_variance(const ClusteredSample& sample,
                                  const std::function<double(const ClusteredSample&)>& statistic,
                                  long long replicates, std::uint64_t seed) {
  if (!statistic) throw InvalidArgumentError("bootstrap statistic is empty");
  if (replicates < 2)
    throw InvalidArgumentError("cluster bootstrap needs at least two replicates");

  const Index m = sample.num_clusters();
  // Canonical id order, so the result does not depend on cluster ordering.
  std::vector<Index> canonical(static_cast<std::size_t>(m));
  std::iota(canonical.begin(), canonical.end(), Index{0});
  std::sort(canonical.begin(), canonical.end(), [&](Index a, Index b) {
    return sample.cluster(a).id < sample.cluster(b).id;
  });

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(replicates));
  for (long long b = 0; b < replicates; ++b) {
    std::mt19937_64 rng = substream(seed, static_cast<std::uint64_t>(b));
    std::uniform_int_distribution<Index> pick(0, m - 1);
    std::vector<Cluster> drawn;
    drawn.reserve(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) {
      drawn.push_back(sample.cluster(canonical[static_cast<std::size_t>(pick(rng))]));
      drawn.back().id = "b" + std::to_string(i);
    }
    values.push_back(statistic(ClusteredSample::from_valid(std::move(drawn))));
  }
  if (std::all_of(values.begin(), values.end(),
                  [&](double v) { return v == values.front(); }))
    return 0.0;
  const double n = static_cast<double>(replicates);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / (n - 1.0);
}

}  // namespace icstat
