#include "icstat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "icstat/ecdf.hpp"
#include "icstat/error.hpp"

namespace icstat {

std::string to_string(WeightingScheme scheme) {
  switch (scheme) {
    case WeightingScheme::FirstObservation: return "first";
    case WeightingScheme::InverseClusterSize: return "ics";
    case WeightingScheme::NaivePooled: return "naive";
  }
  return "?";
}

WeightingScheme weighting_scheme_from_string(const std::string& name) {
  if (name == "first") return WeightingScheme::FirstObservation;
  if (name == "ics") return WeightingScheme::InverseClusterSize;
  if (name == "naive") return WeightingScheme::NaivePooled;
  throw InvalidArgumentError("unknown weighting scheme '" + name + "' (expected first|ics|naive)");
}

ClusteredSample::ClusteredSample(std::vector<Cluster> clusters) {
  clusters_ = std::move(clusters);
  finalize();
  validate();
}

ClusteredSample ClusteredSample::from_valid(std::vector<Cluster> clusters) {
  ClusteredSample sample;
  sample.clusters_ = std::move(clusters);
  sample.finalize();
  return sample;
}

void ClusteredSample::finalize() {
  total_ = 0;
  outcome_dim_ = clusters_.empty() ? 0 : clusters_.front().outcomes.cols();
  covariate_dim_ = clusters_.empty() ? 0 : clusters_.front().covariates.cols();
  has_censored_ = false;
  for (const Cluster& cl : clusters_) {
    total_ += cl.size();
    if (!cl.censored.empty() &&
        std::any_of(cl.censored.begin(), cl.censored.end(), [](char c) { return c != 0; })) {
      has_censored_ = true;
    }
  }
}

void ClusteredSample::validate() const {
  if (clusters_.empty()) throw EmptyInputError("sample contains no clusters");
  std::set<std::string> ids;
  for (const Cluster& cl : clusters_) {
    if (cl.size() < 1) throw InvalidArgumentError("cluster '" + cl.id + "' is empty");
    if (!ids.insert(cl.id).second)
      throw InvalidArgumentError("duplicate cluster id '" + cl.id + "'");
    if (cl.outcomes.cols() != outcome_dim_)
      throw InvalidArgumentError("cluster '" + cl.id + "' has inconsistent outcome dimension");
    if (outcome_dim_ < 1 || outcome_dim_ > 2)
      throw InvalidArgumentError("outcome dimension must be 1 or 2");
    if (cl.covariates.cols() != covariate_dim_)
      throw InvalidArgumentError("cluster '" + cl.id + "' has inconsistent covariate dimension");
    if (covariate_dim_ > 0 && cl.covariates.rows() != cl.size())
      throw InvalidArgumentError("cluster '" + cl.id + "' covariate rows do not match outcomes");
    if (!cl.censored.empty() && static_cast<Index>(cl.censored.size()) != cl.size())
      throw InvalidArgumentError("cluster '" + cl.id + "' censor flags do not match outcomes");
    if (!cl.outcomes.allFinite())
      throw InvalidArgumentError("cluster '" + cl.id + "' has non-finite outcome values");
    if (covariate_dim_ > 0 && !cl.covariates.allFinite())
      throw InvalidArgumentError("cluster '" + cl.id + "' has non-finite covariate values");
  }
}

Vector observation_weights(const ClusteredSample& sample, WeightingScheme scheme) {
  const double m = static_cast<double>(sample.num_clusters());
  const double n = static_cast<double>(sample.total_observations());
  Vector weights(sample.total_observations());
  Index pos = 0;
  for (const Cluster& cl : sample.clusters()) {
    const Index ni = cl.size();
    switch (scheme) {
      case WeightingScheme::FirstObservation:
        weights.segment(pos, ni).setZero();
        weights[pos] = 1.0 / m;
        break;
      case WeightingScheme::InverseClusterSize:
        weights.segment(pos, ni).setConstant(1.0 / (m * static_cast<double>(ni)));
        break;
      case WeightingScheme::NaivePooled:
        weights.segment(pos, ni).setConstant(1.0 / n);
        break;
    }
    pos += ni;
  }
  return weights;
}

ClusteredSample drop_censored(const ClusteredSample& sample) {
  std::vector<Cluster> kept;
  kept.reserve(sample.clusters().size());
  for (const Cluster& cl : sample.clusters()) {
    if (cl.censored.empty()) {
      kept.push_back(cl);
      continue;
    }
    std::vector<Index> rows;
    for (Index j = 0; j < cl.size(); ++j)
      if (!cl.censored[static_cast<std::size_t>(j)]) rows.push_back(j);
    if (rows.empty()) continue;
    Cluster trimmed;
    trimmed.id = cl.id;
    trimmed.outcomes.resize(static_cast<Index>(rows.size()), cl.outcomes.cols());
    if (cl.covariates.cols() > 0)
      trimmed.covariates.resize(static_cast<Index>(rows.size()), cl.covariates.cols());
    else
      trimmed.covariates.resize(static_cast<Index>(rows.size()), 0);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      trimmed.outcomes.row(static_cast<Index>(k)) = cl.outcomes.row(rows[k]);
      if (cl.covariates.cols() > 0)
        trimmed.covariates.row(static_cast<Index>(k)) = cl.covariates.row(rows[k]);
    }
    kept.push_back(std::move(trimmed));
  }
  if (kept.empty())
    throw EmptyInputError("dropping censored observations left no data");
  return ClusteredSample(std::move(kept));
}

void require_uncensored(const ClusteredSample& sample) {
  if (sample.has_censored())
    throw InvalidArgumentError(
        "sample contains censored observations; drop them explicitly before estimation");
}

DiagnosticTable informativeness_diagnostic(const ClusteredSample& sample) {
  if (sample.outcome_dim() != 1)
    throw InvalidArgumentError("informativeness diagnostic requires a univariate outcome");

  std::map<Index, std::vector<Index>> by_size;
  for (Index i = 0; i < sample.num_clusters(); ++i)
    by_size[sample.cluster(i).size()].push_back(i);

  DiagnosticTable table;
  table.size_constant = by_size.size() == 1;

  const WeightedEcdf overall = weighted_ecdf(sample);
  table.grid.resize(9);
  for (Index g = 0; g < 9; ++g)
    table.grid[g] = overall.quantile(static_cast<double>(g + 1) / 10.0);

  std::vector<std::pair<std::string, std::vector<Index>>> groups;
  std::vector<Index> other;
  for (const auto& [size, members] : by_size) {
    if (members.size() >= 2 || by_size.size() == 1)
      groups.emplace_back(std::to_string(size), members);
    else
      other.insert(other.end(), members.begin(), members.end());
  }
  if (!other.empty()) groups.emplace_back("other", std::move(other));

  for (const auto& [label, members] : groups) {
    SizeGroup row;
    row.label = label;
    row.n_clusters = static_cast<Index>(members.size());
    std::vector<double> values;
    std::vector<double> weights;
    double mean = 0.0;
    for (Index i : members) {
      const Cluster& cl = sample.cluster(i);
      const double ni = static_cast<double>(cl.size());
      row.n_obs += cl.size();
      mean += cl.outcomes.col(0).mean();
      for (Index j = 0; j < cl.size(); ++j) {
        values.push_back(cl.outcomes(j, 0));
        weights.push_back(1.0 / (static_cast<double>(members.size()) * ni));
      }
    }
    row.mean = mean / static_cast<double>(members.size());
    const WeightedEcdf group_ecdf(values, weights);
    row.ecdf.resize(table.grid.size());
    for (Index g = 0; g < table.grid.size(); ++g) row.ecdf[g] = group_ecdf(table.grid[g]);
    table.groups.push_back(std::move(row));
  }
  return table;
}

}  // namespace icstat
