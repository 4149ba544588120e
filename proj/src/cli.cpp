#include "icstat/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "icstat/csv.hpp"
#include "icstat/dataset.hpp"
#include "icstat/ecdf.hpp"
#include "icstat/error.hpp"
#include "icstat/functionals.hpp"
#include "icstat/hypothesis.hpp"
#include "icstat/regression.hpp"
#include "icstat/resampling.hpp"
#include "icstat/simulate.hpp"

namespace icstat::cli {

namespace {

using nlohmann::ordered_json;

std::string format12(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.12g", v);
  return buffer;
}

// Numbers in reports are finite or the explicit string "NA".
ordered_json report_number(double v, const std::string& name, std::vector<std::string>& warnings) {
  if (std::isfinite(v)) return v;
  warnings.push_back("value '" + name + "' is not finite; reported as NA");
  return "NA";
}

std::string csv_field(const ordered_json& v) {
  if (v.is_null()) return "NA";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format12(v.get<double>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

struct DataOptions {
  std::string input;
  std::string cluster_col = "cluster";
  std::string y_col = "y";
  std::string y2_col;
  std::vector<std::string> x_cols;
  std::string censored_col;
  std::string delimiter = ",";
  bool drop_censored = false;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("input", d.input, "long-format CSV file")->required();
  cmd->add_option("--cluster-col", d.cluster_col, "cluster id column");
  cmd->add_option("--y-col", d.y_col, "outcome column");
  cmd->add_option("--y2-col", d.y2_col, "second outcome column (bivariate statistics)");
  cmd->add_option("--x-col", d.x_cols, "covariate column (repeatable)");
  cmd->add_option("--censored-col", d.censored_col, "0/1 censoring flag column");
  cmd->add_option("--delimiter", d.delimiter, "field delimiter")->check(CLI::Validator(
      [](std::string& s) { return s.size() == 1 ? "" : "delimiter must be one character"; },
      "1 char"));
  cmd->add_flag("--drop-censored", d.drop_censored,
                "drop censored observations instead of rejecting them");
}

CsvSchema make_schema(const DataOptions& d) {
  CsvSchema schema;
  schema.cluster_col = d.cluster_col;
  schema.outcome_cols = {d.y_col};
  if (!d.y2_col.empty()) schema.outcome_cols.push_back(d.y2_col);
  schema.covariate_cols = d.x_cols;
  schema.censored_col = d.censored_col;
  schema.delimiter = d.delimiter[0];
  return schema;
}

ClusteredSample load_data(const DataOptions& d) {
  ClusteredSample sample = load_long_csv(d.input, make_schema(d));
  if (d.drop_censored && sample.has_censored()) return drop_censored(sample);
  require_uncensored(sample);
  return sample;
}

ordered_json input_summary(const ClusteredSample& sample) {
  std::map<Index, Index> sizes;
  for (const Cluster& cl : sample.clusters()) ++sizes[cl.size()];
  ordered_json dist = ordered_json::object();
  for (const auto& [size, count] : sizes) dist[std::to_string(size)] = count;
  ordered_json summary;
  summary["clusters"] = sample.num_clusters();
  summary["observations"] = sample.total_observations();
  summary["size_distribution"] = dist;
  return summary;
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

struct CommandOutput {
  ordered_json results;
  std::vector<std::string> csv_lines;
  std::vector<std::string> warnings;
  std::optional<ordered_json> input;
  std::optional<std::uint64_t> seed;
};

// ---------------------------------------------------------------- estimate

struct EstimateOptions {
  DataOptions data;
  std::string stat = "mean";
  std::string scheme = "ics";
  std::string cov_estimator = "correct";
  double alpha = 0.1;
};

CommandOutput run_estimate(const EstimateOptions& opt) {
  CommandOutput out;
  const ClusteredSample sample = load_data(opt.data);
  out.input = input_summary(sample);

  Estimate est;
  bool has_alpha = false;
  if (opt.stat == "mean") {
    est = marginal_mean(sample, weighting_scheme_from_string(opt.scheme));
  } else if (opt.stat == "var") {
    est = marginal_variance(sample, weighting_scheme_from_string(opt.scheme));
  } else if (opt.stat == "median") {
    est = weighted_median(sample);
  } else if (opt.stat == "trimmed") {
    est = trimmed_mean(sample, opt.alpha);
    has_alpha = true;
  } else if (opt.stat == "quantile") {
    est.value = weighted_ecdf(sample).quantile(opt.alpha);
    est.scheme = WeightingScheme::InverseClusterSize;
    est.n_clusters = sample.num_clusters();
    has_alpha = true;
  } else if (opt.stat == "hl") {
    const WeightingScheme scheme = weighting_scheme_from_string(opt.scheme);
    if (scheme == WeightingScheme::NaivePooled)
      throw InvalidArgumentError("Hodges-Lehmann supports --scheme first or ics");
    est = hodges_lehmann(sample, scheme == WeightingScheme::FirstObservation
                                     ? HodgesLehmannVariant::FirstObservation
                                     : HodgesLehmannVariant::InverseClusterSizePairs);
  } else if (opt.stat == "cov") {
    CovarianceEstimator ce = CovarianceEstimator::Correct;
    if (opt.cov_estimator == "naive")
      ce = CovarianceEstimator::NaivePooled;
    else if (opt.cov_estimator == "weighted-naive-center")
      ce = CovarianceEstimator::WeightedCrossNaiveCenter;
    else if (opt.cov_estimator != "correct")
      throw InvalidArgumentError("unknown covariance estimator '" + opt.cov_estimator + "'");
    est = marginal_covariance(sample, ce);
  } else if (opt.stat == "corr") {
    est = marginal_correlation(sample);
  } else {
    throw InvalidArgumentError("unknown statistic '" + opt.stat + "'");
  }

  ordered_json r;
  r["stat"] = opt.stat;
  r["scheme"] = opt.stat == "cov" ? opt.cov_estimator : to_string(est.scheme);
  if (has_alpha) r["alpha"] = opt.alpha;
  r["value"] = report_number(est.value, "value", out.warnings);
  r["variance"] =
      est.variance ? report_number(*est.variance, "variance", out.warnings) : ordered_json();
  r["n_clusters"] = est.n_clusters;
  out.results = r;

  out.csv_lines.push_back("stat,scheme,alpha,value,variance,n_clusters");
  out.csv_lines.push_back(opt.stat + "," + r["scheme"].get<std::string>() + "," +
                          (has_alpha ? format12(opt.alpha) : "") + "," + csv_field(r["value"]) +
                          "," + csv_field(r["variance"]) + "," +
                          std::to_string(est.n_clusters));
  return out;
}

// -------------------------------------------------------------------- test

struct TestOptions {
  DataOptions data;
  std::string method = "t";
  std::string stat = "mean";
  double theta0 = 0.0;
  long long replicates = 1000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string variance;  // empty: per-method default
  std::string alternative = "two-sided";
  long long bootstrap_replicates = 500;
  long long exact_cap = 1'000'000;
};

Alternative alternative_from_string(const std::string& name) {
  if (name == "two-sided") return Alternative::TwoSided;
  if (name == "greater") return Alternative::Greater;
  if (name == "less") return Alternative::Less;
  throw InvalidArgumentError("unknown alternative '" + name + "'");
}

CommandOutput run_test(TestOptions opt) {
  CommandOutput out;
  const ClusteredSample sample = load_data(opt.data);
  out.input = input_summary(sample);

  TestResult result;
  if (opt.method == "sign" || opt.method == "t") {
    if (!opt.variance.empty() && opt.variance != "analytic")
      throw InvalidArgumentError("--variance " + opt.variance + " is not available for --method " +
                                 opt.method);
    result = opt.method == "sign"
                 ? sign_test(sample, opt.theta0)
                 : modified_t_test(sample, opt.theta0, alternative_from_string(opt.alternative));
  } else if (opt.method == "signed-rank") {
    if (opt.variance == "bootstrap") {
      if (!opt.seed_given) opt.seed = fresh_seed();
      out.seed = opt.seed;
      result = signed_rank_test_bootstrap(sample, opt.theta0, opt.bootstrap_replicates, opt.seed);
    } else if (opt.variance.empty() || opt.variance == "analytic") {
      result = signed_rank_test(sample, opt.theta0);
    } else {
      throw InvalidArgumentError("--variance " + opt.variance +
                                 " is not available for --method signed-rank");
    }
  } else if (opt.method == "wcr") {
    const VarianceMethod vm =
        variance_method_from_string(opt.variance.empty() ? "mc" : opt.variance);
    const bool exact = enumeration_count(sample, opt.exact_cap) > 0;
    const bool randomized = !exact || vm == VarianceMethod::ClusterBootstrap;
    if (randomized) {
      if (!opt.seed_given) opt.seed = fresh_seed();
      out.seed = opt.seed;
    }
    WcrTestConfig cfg;
    cfg.replicates = opt.replicates;
    cfg.seed = opt.seed;
    cfg.variance_method = vm;
    cfg.exact_cap = opt.exact_cap;
    cfg.bootstrap_replicates = opt.bootstrap_replicates;
    cfg.alternative = alternative_from_string(opt.alternative);
    result = wcr_test(sample, opt.stat, opt.theta0, cfg);
  } else {
    throw InvalidArgumentError("unknown test '" + opt.method + "'");
  }
  out.warnings.insert(out.warnings.end(), result.warnings.begin(), result.warnings.end());

  ordered_json r;
  r["method"] = result.method;
  r["theta0"] = opt.theta0;
  r["statistic"] = report_number(result.statistic, "statistic", out.warnings);
  r["variance"] = report_number(result.variance, "variance", out.warnings);
  r["standardized"] = report_number(result.standardized, "standardized", out.warnings);
  r["reference"] = to_string(result.reference);
  r["alternative"] = to_string(result.alternative);
  r["p_value"] = report_number(result.p_value, "p_value", out.warnings);
  r["replicates"] = result.replicates ? ordered_json(*result.replicates) : ordered_json();
  out.results = r;

  out.csv_lines.push_back(
      "method,theta0,statistic,variance,standardized,reference,alternative,p_value,replicates");
  out.csv_lines.push_back(result.method + "," + format12(opt.theta0) + "," +
                          csv_field(r["statistic"]) + "," + csv_field(r["variance"]) + "," +
                          csv_field(r["standardized"]) + "," + to_string(result.reference) + "," +
                          to_string(result.alternative) + "," + csv_field(r["p_value"]) + "," +
                          (result.replicates ? std::to_string(*result.replicates) : "NA"));
  return out;
}

// ------------------------------------------------------------------ regress

struct RegressOptions {
  DataOptions data;
  std::string method = "icswls";
  bool compare = false;
  bool intercept = true;
  long long replicates = 1000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double huber_c = 1.5;
  double huber_d = 1.0;
  double tol = 1e-8;
  int max_iter = 200;
  long long exact_cap = 1'000'000;
};

std::vector<std::string> term_names(const RegressOptions& opt) {
  std::vector<std::string> names;
  if (opt.intercept) names.push_back("(intercept)");
  names.insert(names.end(), opt.data.x_cols.begin(), opt.data.x_cols.end());
  return names;
}

RegressionFit run_fit(const std::string& method, const std::vector<DesignedCluster>& designs,
                      const RegressOptions& opt) {
  if (method == "icswls") return icswls_fit(designs);
  if (method == "ols") return ols_fit(designs);
  if (method == "huber") {
    HuberConfig cfg;
    cfg.c = opt.huber_c;
    cfg.d = opt.huber_d;
    cfg.tol = opt.tol;
    cfg.max_iter = opt.max_iter;
    return huber_icw_fit(designs, cfg);
  }
  if (method == "wcr") {
    WcrRegressionConfig cfg;
    cfg.replicates = opt.replicates;
    cfg.seed = opt.seed;
    cfg.exact_cap = opt.exact_cap;
    return wcr_regression(designs, cfg);
  }
  throw InvalidArgumentError("unknown regression method '" + method + "'");
}

CommandOutput run_regress(RegressOptions opt) {
  CommandOutput out;
  const ClusteredSample sample = load_data(opt.data);
  out.input = input_summary(sample);
  const std::vector<DesignedCluster> designs = design_clusters(sample, opt.intercept);
  const std::vector<std::string> terms = term_names(opt);

  const bool needs_seed = opt.compare || opt.method == "wcr";
  if (needs_seed) {
    if (!opt.seed_given) opt.seed = fresh_seed();
    out.seed = opt.seed;
  }

  auto fit_json = [&](const RegressionFit& fit) {
    ordered_json f;
    f["method"] = fit.method;
    f["converged"] = fit.converged;
    f["iterations"] = fit.iterations;
    f["scale"] = fit.scale ? report_number(*fit.scale, "scale", out.warnings) : ordered_json();
    ordered_json coef = ordered_json::array();
    for (Index k = 0; k < fit.beta.size(); ++k) {
      ordered_json row;
      row["term"] = terms[static_cast<std::size_t>(k)];
      row["estimate"] = report_number(fit.beta[k], "estimate", out.warnings);
      row["std_error"] = report_number(fit.std_errors[k], "std_error", out.warnings);
      coef.push_back(row);
    }
    f["coefficients"] = coef;
    return f;
  };

  if (!opt.compare) {
    const RegressionFit fit = run_fit(opt.method, designs, opt);
    out.warnings.insert(out.warnings.end(), fit.warnings.begin(), fit.warnings.end());
    out.results = fit_json(fit);
    out.csv_lines.push_back("method,term,estimate,std_error");
    for (Index k = 0; k < fit.beta.size(); ++k)
      out.csv_lines.push_back(fit.method + "," + terms[static_cast<std::size_t>(k)] + "," +
                              format12(fit.beta[k]) + "," + format12(fit.std_errors[k]));
    return out;
  }

  const std::vector<std::string> methods{"wcr", "ols", "icswls", "huber"};
  std::vector<RegressionFit> fits;
  for (const std::string& method : methods) {
    fits.push_back(run_fit(method, designs, opt));
    for (const std::string& w : fits.back().warnings)
      out.warnings.push_back(method + ": " + w);
  }

  ordered_json table = ordered_json::array();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    ordered_json row;
    row["term"] = terms[k];
    for (std::size_t f = 0; f < methods.size(); ++f) {
      ordered_json cell;
      cell["estimate"] =
          report_number(fits[f].beta[static_cast<Index>(k)], "estimate", out.warnings);
      cell["std_error"] =
          report_number(fits[f].std_errors[static_cast<Index>(k)], "std_error", out.warnings);
      row[methods[f]] = cell;
    }
    table.push_back(row);
  }
  out.results = ordered_json{{"methods", methods}, {"table", table}};

  std::string header = "term";
  for (const std::string& method : methods)
    header += "," + method + "_estimate," + method + "_se";
  out.csv_lines.push_back(header);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    std::string line = terms[k];
    for (std::size_t f = 0; f < methods.size(); ++f)
      line += "," + format12(fits[f].beta[static_cast<Index>(k)]) + "," +
              format12(fits[f].std_errors[static_cast<Index>(k)]);
    out.csv_lines.push_back(line);
  }
  return out;
}

// ----------------------------------------------------------------- diagnose

CommandOutput run_diagnose(const DataOptions& data) {
  CommandOutput out;
  const ClusteredSample sample = load_data(data);
  out.input = input_summary(sample);
  const DiagnosticTable table = informativeness_diagnostic(sample);
  if (table.size_constant)
    out.warnings.push_back("cluster size is constant; the diagnostic is degenerate");

  ordered_json r;
  r["size_constant"] = table.size_constant;
  ordered_json grid = ordered_json::array();
  for (Index g = 0; g < table.grid.size(); ++g)
    grid.push_back(report_number(table.grid[g], "grid", out.warnings));
  r["grid"] = grid;
  ordered_json groups = ordered_json::array();
  for (const SizeGroup& group : table.groups) {
    ordered_json row;
    row["group"] = group.label;
    row["clusters"] = group.n_clusters;
    row["observations"] = group.n_obs;
    row["mean"] = report_number(group.mean, "mean", out.warnings);
    ordered_json ecdf = ordered_json::array();
    for (Index g = 0; g < group.ecdf.size(); ++g)
      ecdf.push_back(report_number(group.ecdf[g], "ecdf", out.warnings));
    row["ecdf"] = ecdf;
    groups.push_back(row);
  }
  r["groups"] = groups;
  out.results = r;

  std::string header = "group,clusters,observations,mean";
  for (int g = 1; g <= 9; ++g) header += ",q" + std::to_string(10 * g);
  out.csv_lines.push_back(header);
  std::string grid_line = "_grid,,,";
  for (Index g = 0; g < table.grid.size(); ++g) grid_line += "," + format12(table.grid[g]);
  out.csv_lines.push_back(grid_line);
  for (const SizeGroup& group : table.groups) {
    std::string line = group.label + "," + std::to_string(group.n_clusters) + "," +
                       std::to_string(group.n_obs) + "," + format12(group.mean);
    for (Index g = 0; g < group.ecdf.size(); ++g) line += "," + format12(group.ecdf[g]);
    out.csv_lines.push_back(line);
  }
  return out;
}

// ----------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string mechanism = "example-mean";
  int n_clusters = 100;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int na = -1;
  int nb = -1;
  double followup = 3.0;
  double rate = 1.0;
  double gap = 0.0;  // > 0 selects the fixed-gap distribution
  double size_a = 0.7;
  double size_b = 1.0;
  double outcome_sd = 1.0;
  double mean_size = 4.0;
  double size_coef = 0.5;
  std::string out_path;
  bool sweep = false;
  std::vector<int> sweep_m;
  int replications = 1000;
  std::string estimators = "first,ics,naive";
  std::string format = "csv";
};

GeneratorSpec make_spec(const SimulateOptions& opt) {
  GeneratorSpec spec;
  spec.mechanism = mechanism_from_string(opt.mechanism);
  spec.n_clusters = opt.n_clusters;
  spec.seed = opt.seed;
  const bool correlation = spec.mechanism == GeneratorSpec::Mechanism::ExampleCorrelation;
  spec.params["na"] = opt.na >= 0 ? opt.na : (correlation ? 1 : 5);
  spec.params["nb"] = opt.nb >= 0 ? opt.nb : (correlation ? 10 : 50);
  spec.params["followup"] = opt.followup;
  if (opt.gap > 0.0)
    spec.params["gap"] = opt.gap;
  else
    spec.params["rate"] = opt.rate;
  spec.params["size_a"] = opt.size_a;
  spec.params["size_b"] = opt.size_b;
  spec.params["outcome_sd"] = opt.outcome_sd;
  spec.params["mean_size"] = opt.mean_size;
  spec.params["size_coef"] = opt.size_coef;
  return spec;
}

int run_simulate(SimulateOptions opt, std::ostream& out, std::ostream& err) {
  if (!opt.seed_given) {
    opt.seed = fresh_seed();
    err << "note: generated seed " << opt.seed << "\n";
  }
  std::ofstream file;
  std::ostream* sink = &out;
  if (!opt.out_path.empty()) {
    file.open(opt.out_path);
    if (!file) throw Error("cannot open '" + opt.out_path + "' for writing");
    sink = &file;
  }

  if (opt.sweep) {
    if (opt.sweep_m.empty())
      throw InvalidArgumentError("--sweep needs --M-list with at least one cluster count");
    std::vector<WeightingScheme> schemes;
    std::stringstream names(opt.estimators);
    std::string token;
    while (std::getline(names, token, ','))
      if (!token.empty()) schemes.push_back(weighting_scheme_from_string(token));
    const std::vector<SweepRow> rows =
        bias_sweep(make_spec(opt), schemes, opt.sweep_m, opt.replications, opt.seed);
    if (opt.format == "json") {
      ordered_json doc = ordered_json::array();
      for (const SweepRow& row : rows)
        doc.push_back({{"M", row.n_clusters},
                       {"estimator", row.estimator},
                       {"mean", row.mean},
                       {"mc_se", row.mc_se}});
      *sink << doc.dump(2) << "\n";
    } else {
      *sink << "M,estimator,mean,mc_se\n";
      for (const SweepRow& row : rows)
        *sink << row.n_clusters << "," << row.estimator << "," << format12(row.mean) << ","
              << format12(row.mc_se) << "\n";
    }
    return 0;
  }

  const ClusteredSample sample = generate(make_spec(opt));
  CsvSchema schema;
  schema.cluster_col = "cluster";
  schema.outcome_cols = sample.outcome_dim() == 2 ? std::vector<std::string>{"y1", "y2"}
                                                  : std::vector<std::string>{"y"};
  if (sample.has_censored()) schema.censored_col = "censored";
  write_long_csv(sample, *sink, schema);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"marginal estimation, testing, resampling and robust regression "
               "for clustered data with informative cluster size"};
  app.name("icstat");
  app.require_subcommand(1);

  EstimateOptions est;
  CLI::App* estimate = app.add_subcommand("estimate", "weighted marginal estimates");
  add_data_options(estimate, est.data);
  estimate->add_option("--stat", est.stat, "statistic")
      ->check(CLI::IsMember({"mean", "var", "median", "hl", "trimmed", "quantile", "cov", "corr"}));
  estimate->add_option("--scheme", est.scheme, "weighting scheme")
      ->check(CLI::IsMember({"first", "ics", "naive"}));
  estimate->add_option("--cov-estimator", est.cov_estimator, "covariance estimator")
      ->check(CLI::IsMember({"correct", "naive", "weighted-naive-center"}));
  estimate->add_option("--alpha", est.alpha, "trimming fraction or quantile level");

  TestOptions tst;
  CLI::App* test = app.add_subcommand("test", "hypothesis tests on the marginal distribution");
  add_data_options(test, tst.data);
  test->add_option("--method", tst.method, "test")
      ->check(CLI::IsMember({"sign", "signed-rank", "t", "wcr"}));
  test->add_option("--stat", tst.stat, "resampled statistic (wcr)")
      ->check(CLI::IsMember(registered_statistics()));
  test->add_option("--theta0", tst.theta0, "null location");
  test->add_option("--replicates", tst.replicates, "resampling replicates");
  CLI::Option* test_seed = test->add_option("--seed", tst.seed, "RNG seed");
  test->add_option("--variance", tst.variance, "variance method (wcr)")
      ->check(CLI::IsMember({"analytic", "mc", "bootstrap"}));
  test->add_option("--alternative", tst.alternative, "alternative hypothesis")
      ->check(CLI::IsMember({"two-sided", "greater", "less"}));
  test->add_option("--bootstrap-replicates", tst.bootstrap_replicates,
                   "cluster bootstrap replicates");
  test->add_option("--exact-cap", tst.exact_cap, "exact enumeration cap");

  RegressOptions reg;
  CLI::App* regress = app.add_subcommand("regress", "marginal linear regression");
  add_data_options(regress, reg.data);
  regress->add_option("--method", reg.method, "fit")
      ->check(CLI::IsMember({"wcr", "ols", "icswls", "huber"}));
  regress->add_flag("--compare", reg.compare, "run wcr, ols, icswls and huber side by side");
  regress->add_flag("--intercept,!--no-intercept", reg.intercept, "include an intercept column");
  regress->add_option("--replicates", reg.replicates, "resampling replicates (wcr)");
  CLI::Option* reg_seed = regress->add_option("--seed", reg.seed, "RNG seed");
  regress->add_option("--huber-c", reg.huber_c, "Huber tuning constant c");
  regress->add_option("--huber-d", reg.huber_d, "Huber scale tuning constant d");
  regress->add_option("--tol", reg.tol, "relative convergence tolerance");
  regress->add_option("--max-iter", reg.max_iter, "iteration cap");
  regress->add_option("--exact-cap", reg.exact_cap, "exact enumeration cap (wcr)");

  DataOptions diagnose_data;
  CLI::App* diagnose = app.add_subcommand("diagnose", "outcome distribution by cluster size");
  add_data_options(diagnose, diagnose_data);

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "generate synthetic clustered data");
  simulate->add_option("--mechanism", sim.mechanism, "data generating mechanism")
      ->check(CLI::IsMember(
          {"size-first", "recurrent", "latent", "example-mean", "example-correlation"}));
  simulate->add_option("--M", sim.n_clusters, "number of clusters");
  CLI::Option* sim_seed = simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--na", sim.na, "small cluster size");
  simulate->add_option("--nb", sim.nb, "large cluster size");
  simulate->add_option("--followup", sim.followup, "follow-up length (recurrent)");
  simulate->add_option("--rate", sim.rate, "exponential gap rate (recurrent)");
  simulate->add_option("--gap", sim.gap, "fixed gap length (recurrent)");
  simulate->add_option("--size-a", sim.size_a, "latent log-size intercept");
  simulate->add_option("--size-b", sim.size_b, "latent log-size slope");
  simulate->add_option("--outcome-sd", sim.outcome_sd, "latent outcome noise scale");
  simulate->add_option("--mean-size", sim.mean_size, "mean cluster size (size-first)");
  simulate->add_option("--size-coef", sim.size_coef, "outcome shift per unit size (size-first)");
  simulate->add_option("--out", sim.out_path, "write to a file instead of stdout");
  simulate->add_flag("--sweep", sim.sweep, "bias sweep over cluster counts");
  simulate->add_option("--M-list", sim.sweep_m, "cluster counts for --sweep");
  simulate->add_option("--replications", sim.replications, "datasets per sweep cell");
  simulate->add_option("--estimators", sim.estimators, "comma list of first|ics|naive");
  simulate->add_option("--format", sim.format, "sweep output format")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string est_format = "json";
  std::string tst_format = "json";
  std::string reg_format = "json";
  std::string diag_format = "json";
  estimate->add_option("--format", est_format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  test->add_option("--format", tst_format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  regress->add_option("--format", reg_format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  diagnose->add_option("--format", diag_format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));

  std::vector<const char*> argv;
  argv.push_back("icstat");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  tst.seed_given = test_seed->count() > 0;
  reg.seed_given = reg_seed->count() > 0;
  sim.seed_given = sim_seed->count() > 0;

  const auto start = std::chrono::steady_clock::now();
  try {
    if (app.got_subcommand(simulate)) return run_simulate(sim, out, err);

    CommandOutput result;
    std::string name;
    std::string format;
    if (app.got_subcommand(estimate)) {
      name = "estimate";
      format = est_format;
      result = run_estimate(est);
    } else if (app.got_subcommand(test)) {
      name = "test";
      format = tst_format;
      result = run_test(tst);
    } else if (app.got_subcommand(regress)) {
      name = "regress";
      format = reg_format;
      result = run_regress(reg);
    } else {
      name = "diagnose";
      format = diag_format;
      result = run_diagnose(diagnose_data);
    }

    for (const std::string& w : result.warnings) err << "warning: " << w << "\n";
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (format == "csv") {
      for (const std::string& line : result.csv_lines) out << line << "\n";
    } else {
      ordered_json report;
      report["command"] = name;
      report["argv"] = args;
      if (result.input) report["input"] = *result.input;
      report["results"] = result.results;
      report["warnings"] = result.warnings;
      if (result.seed) report["seed"] = *result.seed;
      report["wall_time_s"] = elapsed;
      out << report.dump(2) << "\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace icstat::cli
