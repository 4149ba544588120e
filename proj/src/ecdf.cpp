#include "icstat/ecdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "icstat/dataset.hpp"
#include "icstat/error.hpp"

namespace icstat {

WeightedEcdf::WeightedEcdf(const std::vector<double>& values, const std::vector<double>& weights) {
  if (values.empty()) throw EmptyInputError("cannot build an ECDF from no values");
  if (values.size() != weights.size())
    throw InvalidArgumentError("ECDF values and weights differ in length");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgumentError("ECDF weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgumentError("ECDF weights sum to zero");

  support_.reserve(values.size());
  cumulative_.reserve(values.size());
  double running = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double v = values[order[k]];
    running += weights[order[k]];
    if (!support_.empty() && support_.back() == v)
      cumulative_.back() = running / total;
    else {
      support_.push_back(v);
      cumulative_.push_back(running / total);
    }
  }
  cumulative_.back() = 1.0;
}

double WeightedEcdf::operator()(double y) const {
  const auto it = std::upper_bound(support_.begin(), support_.end(), y);
  if (it == support_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double WeightedEcdf::quantile(double alpha) const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgumentError("quantile level must lie strictly between 0 and 1");
  for (std::size_t k = 0; k < support_.size(); ++k)
    if (cumulative_[k] >= alpha - kTol) return support_[k];
  return support_.back();
}

WeightedEcdf weighted_ecdf(const ClusteredSample& sample, bool absolute) {
  if (sample.outcome_dim() != 1)
    throw InvalidArgumentError("weighted ECDF requires a univariate outcome");
  std::vector<double> values;
  std::vector<double> weights;
  values.reserve(static_cast<std::size_t>(sample.total_observations()));
  weights.reserve(values.capacity());
  const double m = static_cast<double>(sample.num_clusters());
  for (const Cluster& cl : sample.clusters()) {
    const double w = 1.0 / (m * static_cast<double>(cl.size()));
    for (Index j = 0; j < cl.size(); ++j) {
      const double y = cl.outcomes(j, 0);
      values.push_back(absolute ? std::abs(y) : y);
      weights.push_back(w);
    }
  }
  return WeightedEcdf(values, weights);
}

double quantile(const WeightedEcdf& ecdf, double alpha) { return ecdf.quantile(alpha); }

}  // namespace icstat
