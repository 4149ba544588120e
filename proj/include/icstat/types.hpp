#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace icstat {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Observation weighting used by the marginal estimators: weight mass 1/M on
// each cluster's first observation, 1/(M*N_i) on every observation of cluster
// i, or 1/N on every observation of the pooled sample.
enum class WeightingScheme { FirstObservation, InverseClusterSize, NaivePooled };

std::string to_string(WeightingScheme scheme);

// Accepts "first", "ics", "naive".
WeightingScheme weighting_scheme_from_string(const std::string& name);

}  // namespace icstat
