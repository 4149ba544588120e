#include "icstat/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <utility>

#include "icstat/error.hpp"

namespace icstat {

namespace {

// Splits one CSV record. Double quotes wrap fields containing the delimiter;
// "" inside a quoted field is a literal quote.
std::vector<std::string> split_record(const std::string& line, char delim, long row) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          current.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(ch);
      }
    } else if (ch == '"' && current.empty()) {
      quoted = true;
    } else if (ch == delim) {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (quoted)
    throw CsvParseError("row " + std::to_string(row) + ": unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

double parse_number(const std::string& cell, const std::string& column, long row) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw CsvParseError("row " + std::to_string(row) + ", column '" + column +
                        "': cannot parse '" + cell + "' as a number");
  if (!std::isfinite(value))
    throw CsvParseError("row " + std::to_string(row) + ", column '" + column +
                        "': non-finite value");
  return value;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

ClusteredSample read_long_csv(std::istream& in, const CsvSchema& schema) {
  if (schema.outcome_cols.empty() || schema.outcome_cols.size() > 2)
    throw SchemaError("schema must name one or two outcome columns");

  std::string line;
  if (!std::getline(in, line)) throw EmptyInputError("input has no header row");
  const std::vector<std::string> header = split_record(strip_cr(line), schema.delimiter, 1);

  auto column_index = [&](const std::string& name) {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return static_cast<long>(k);
    throw SchemaError("column '" + name + "' not found in header");
  };

  const long id_col = column_index(schema.cluster_col);
  std::vector<long> y_cols;
  for (const std::string& name : schema.outcome_cols) y_cols.push_back(column_index(name));
  std::vector<long> x_cols;
  for (const std::string& name : schema.covariate_cols) x_cols.push_back(column_index(name));
  const long cens_col = schema.censored_col.empty() ? -1 : column_index(schema.censored_col);

  struct Building {
    std::vector<std::array<double, 2>> y;
    std::vector<std::vector<double>> x;
    std::vector<char> censored;
  };
  std::vector<std::string> order;
  std::map<std::string, Building> groups;

  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_record(line, schema.delimiter, row);
    if (fields.size() != header.size())
      throw CsvParseError("row " + std::to_string(row) + ": expected " +
                          std::to_string(header.size()) + " fields, found " +
                          std::to_string(fields.size()));
    const std::string& id = fields[static_cast<std::size_t>(id_col)];
    auto [it, inserted] = groups.try_emplace(id);
    if (inserted) order.push_back(id);
    Building& b = it->second;

    std::array<double, 2> yrow{0.0, 0.0};
    for (std::size_t k = 0; k < y_cols.size(); ++k)
      yrow[k] = parse_number(fields[static_cast<std::size_t>(y_cols[k])], schema.outcome_cols[k],
                             row);
    b.y.push_back(yrow);

    std::vector<double> xrow(x_cols.size());
    for (std::size_t k = 0; k < x_cols.size(); ++k)
      xrow[k] = parse_number(fields[static_cast<std::size_t>(x_cols[k])],
                             schema.covariate_cols[k], row);
    b.x.push_back(std::move(xrow));

    if (cens_col >= 0) {
      const std::string& cell = fields[static_cast<std::size_t>(cens_col)];
      if (cell == "0" || cell == "false")
        b.censored.push_back(0);
      else if (cell == "1" || cell == "true")
        b.censored.push_back(1);
      else
        throw CsvParseError("row " + std::to_string(row) + ", column '" + schema.censored_col +
                            "': expected 0/1, found '" + cell + "'");
    }
  }
  if (order.empty()) throw EmptyInputError("input has a header but no data rows");

  const Index d = static_cast<Index>(schema.outcome_cols.size());
  const Index p = static_cast<Index>(schema.covariate_cols.size());
  std::vector<Cluster> clusters;
  clusters.reserve(order.size());
  for (const std::string& id : order) {
    const Building& b = groups.at(id);
    Cluster cl;
    cl.id = id;
    const Index ni = static_cast<Index>(b.y.size());
    cl.outcomes.resize(ni, d);
    cl.covariates.resize(ni, p);
    for (Index j = 0; j < ni; ++j) {
      for (Index k = 0; k < d; ++k)
        cl.outcomes(j, k) = b.y[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      for (Index k = 0; k < p; ++k)
        cl.covariates(j, k) = b.x[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    }
    cl.censored = b.censored;
    clusters.push_back(std::move(cl));
  }
  return ClusteredSample(std::move(clusters));
}

ClusteredSample load_long_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_long_csv(in, schema);
}

void write_long_csv(const ClusteredSample& sample, std::ostream& out, const CsvSchema& schema) {
  if (static_cast<Index>(schema.outcome_cols.size()) != sample.outcome_dim())
    throw SchemaError("schema outcome columns do not match the sample dimension");
  if (static_cast<Index>(schema.covariate_cols.size()) != sample.covariate_dim())
    throw SchemaError("schema covariate columns do not match the sample dimension");
  const bool censored = !schema.censored_col.empty();

  const char d = schema.delimiter;
  out << schema.cluster_col;
  for (const std::string& name : schema.outcome_cols) out << d << name;
  for (const std::string& name : schema.covariate_cols) out << d << name;
  if (censored) out << d << schema.censored_col;
  out << '\n';

  for (const Cluster& cl : sample.clusters()) {
    for (Index j = 0; j < cl.size(); ++j) {
      out << cl.id;
      for (Index k = 0; k < sample.outcome_dim(); ++k)
        out << d << format_double(cl.outcomes(j, k));
      for (Index k = 0; k < sample.covariate_dim(); ++k)
        out << d << format_double(cl.covariates(j, k));
      if (censored)
        out << d << (cl.censored.empty() ? 0 : static_cast<int>(cl.censored[static_cast<std::size_t>(j)]));
      out << '\n';
    }
  }
}

std::string format_double(double value) {
  char buffer[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

}  // namespace icstat
