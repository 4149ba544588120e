#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "icstat/dataset.hpp"

namespace icstat {

// Column-name schema for long-format files: one row per observation, cluster
// membership given by an explicit id column. Within-cluster order is file
// order.
struct CsvSchema {
  std::string cluster_col = "cluster";
  std::vector<std::string> outcome_cols = {"y"};  // 1 or 2 entries
  std::vector<std::string> covariate_cols;
  std::string censored_col;  // empty: no censoring column
  char delimiter = ',';
};

ClusteredSample load_long_csv(const std::string& path, const CsvSchema& schema);
ClusteredSample read_long_csv(std::istream& in, const CsvSchema& schema);

void write_long_csv(const ClusteredSample& sample, std::ostream& out, const CsvSchema& schema);

// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace icstat
