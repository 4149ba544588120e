// Acceptance suite: one check per criterion, each printing a PASS/FAIL line
// with the measured values. Run with no arguments for all criteria, or pass
// criterion numbers to run a subset.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../helpers.hpp"
#include "icstat/cli.hpp"
#include "icstat/functionals.hpp"
#include "icstat/hypothesis.hpp"
#include "icstat/regression.hpp"
#include "icstat/resampling.hpp"
#include "icstat/rng.hpp"
#include "icstat/simulate.hpp"

using namespace icstat;
using icstat::testing::classical_signed_rank;
using icstat::testing::for_each_selection;
using icstat::testing::make_ics_regression;
using icstat::testing::make_sample;

namespace {

struct Tally {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool condition, const std::string& label) {
    if (!condition) {
      ok = false;
      detail << "    FAILED: " << label << "\n";
    }
  }
};

std::string fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.5g", v);
  return buffer;
}

struct MonteCarlo {
  double mean = 0.0;
  double variance = 0.0;  // across replications, denominator n - 1
  double se = 0.0;        // of the mean
};

MonteCarlo summarize(const std::vector<double>& values) {
  MonteCarlo mc;
  const double n = static_cast<double>(values.size());
  for (double v : values) mc.mean += v;
  mc.mean /= n;
  for (double v : values) mc.variance += (v - mc.mean) * (v - mc.mean);
  mc.variance /= (n - 1.0);
  mc.se = std::sqrt(mc.variance / n);
  return mc;
}

// --- criterion 1: covariance estimator bias triple (0.30 / 0.08 / 0.00) ----

bool criterion1(std::ostream& out) {
  const int datasets = 10'000;
  std::vector<double> naive, weighted_center, correct;
  naive.reserve(datasets);
  weighted_center.reserve(datasets);
  correct.reserve(datasets);
  for (int r = 0; r < datasets; ++r) {
    const ClusteredSample sample = gen_example_correlation(100, 1, 10, 100'000 + r);
    naive.push_back(marginal_covariance(sample, CovarianceEstimator::NaivePooled).value);
    weighted_center.push_back(
        marginal_covariance(sample, CovarianceEstimator::WeightedCrossNaiveCenter).value);
    correct.push_back(marginal_covariance(sample, CovarianceEstimator::Correct).value);
  }
  const MonteCarlo n = summarize(naive);
  const MonteCarlo w = summarize(weighted_center);
  const MonteCarlo c = summarize(correct);

  Tally t;
  t.expect(std::abs(n.mean - 0.30) <= 0.02, "pooled covariance mean in 0.30 +- 0.02");
  t.expect(std::abs(w.mean - 0.08) <= 0.02, "weighted/pooled-center mean in 0.08 +- 0.02");
  t.expect(std::abs(c.mean - 0.00) <= 0.01, "weighted covariance mean in 0.00 +- 0.01");
  out << "    pooled " << fmt(n.mean) << ", weighted-center " << fmt(w.mean) << ", weighted "
      << fmt(c.mean) << " over " << datasets << " datasets\n"
      << t.detail.str();
  return t.ok;
}

// --- criterion 2: mean-estimator variance identities at M = 20 -------------

bool criterion2(std::ostream& out) {
  const int datasets = 5000;
  const int m = 20;
  Tally t;
  bool first_pair = true;
  for (const auto& [na, nb] : std::vector<std::pair<int, int>>{{4, 25}, {5, 12}}) {
    std::vector<double> t1, t2;
    t1.reserve(datasets);
    t2.reserve(datasets);
    for (int r = 0; r < datasets; ++r) {
      const ClusteredSample sample =
          gen_example_mean(m, na, nb, 200'000 + 10'000 * na + r);
      t1.push_back(marginal_mean(sample, WeightingScheme::FirstObservation).value);
      t2.push_back(marginal_mean(sample, WeightingScheme::InverseClusterSize).value);
    }
    const double var1 = summarize(t1).variance;
    const double var2 = summarize(t2).variance;
    const double target1 = 2.0 / m;
    const double target2 = (1.0 + 0.5 * (1.0 / na + 1.0 / nb)) / m;
    if (first_pair) {
      t.expect(std::abs(var1 - target1) <= 0.05 * target1,
               "first-observation variance within 5% of 0.100");
      first_pair = false;
    }
    t.expect(std::abs(var2 - target2) <= 0.05 * target2,
             "weighted-mean variance within 5% of " + fmt(target2) + " for sizes (" +
                 std::to_string(na) + ", " + std::to_string(nb) + ")");
    out << "    sizes (" << na << ", " << nb << "): Var(first) " << fmt(var1) << " target "
        << fmt(target1) << "; Var(weighted) " << fmt(var2) << " target " << fmt(target2) << "\n";
  }
  out << t.detail.str();
  return t.ok;
}

// --- criterion 3: pooled-mean bias profile over M ---------------------------

bool criterion3(std::ostream& out) {
  GeneratorSpec base;
  base.mechanism = GeneratorSpec::Mechanism::ExampleMean;
  base.params["na"] = 5;
  base.params["nb"] = 50;
  const std::vector<int> cluster_counts{10, 20, 50, 100, 200};
  const int replications = 20'000;
  const std::vector<SweepRow> rows =
      bias_sweep(base,
                 {WeightingScheme::FirstObservation, WeightingScheme::InverseClusterSize,
                  WeightingScheme::NaivePooled},
                 cluster_counts, replications, 3141);

  Tally t;
  double naive_first = 0.0, naive_last = 0.0, se_first = 0.0, se_last = 0.0;
  for (const SweepRow& row : rows) {
    if (row.estimator == "naive") {
      t.expect(std::abs(row.mean) > 5 * row.mc_se,
               "pooled mean biased at M = " + std::to_string(row.n_clusters));
      if (row.n_clusters == cluster_counts.front()) {
        naive_first = row.mean;
        se_first = row.mc_se;
      }
      if (row.n_clusters == cluster_counts.back()) {
        naive_last = row.mean;
        se_last = row.mc_se;
      }
    } else {
      t.expect(std::abs(row.mean) < 3 * row.mc_se,
               row.estimator + " unbiased at M = " + std::to_string(row.n_clusters));
    }
    out << "    M=" << row.n_clusters << " " << row.estimator << ": " << fmt(row.mean) << " (se "
        << fmt(row.mc_se) << ")\n";
  }
  const double gap = std::abs(naive_first - naive_last);
  const double gap_se = std::sqrt(se_first * se_first + se_last * se_last);
  t.expect(gap > 5 * gap_se, "pooled-mean bias varies across M");
  out << "    pooled bias gap between extremes " << fmt(gap) << " (se " << fmt(gap_se) << ")\n"
      << t.detail.str();
  return t.ok;
}

// --- criterion 4: resampling equivalences on exhaustive tiny samples --------

bool criterion4(std::ostream& out) {
  Tally t;
  long samples = 0;
  double worst_mean_gap = 0.0;
  double worst_rank_margin = -1.0;  // (1/M - gap), want it nonnegative

  for (int m = 1; m <= 3; ++m) {
    std::vector<int> sizes(static_cast<std::size_t>(m), 1);
    while (true) {
      int total = 0;
      for (int s : sizes) total += s;

      for (int rotation = 0; rotation < 2 && t.ok; ++rotation) {
        for (long mask = 0; mask < (1L << total); ++mask) {
          std::vector<std::vector<double>> clusters;
          int k = 0;
          for (int s : sizes) {
            std::vector<double> values;
            for (int j = 0; j < s; ++j, ++k) {
              const double magnitude = 0.37 + 0.83 * ((k + 5 * rotation) % 9);
              values.push_back((mask >> k) & 1 ? magnitude : -magnitude);
            }
            clusters.push_back(values);
          }
          const ClusteredSample sample = make_sample(clusters);
          ++samples;

          // exact enumeration of the mean against the weighted mean
          const WcrOutput mean_out =
              wcr_estimate(sample, make_iid_statistic("mean", 0.0), WcrConfig{});
          const double t2 =
              marginal_mean(sample, WeightingScheme::InverseClusterSize).value;
          const double mean_gap = std::abs(mean_out.point - t2);
          worst_mean_gap = std::max(worst_mean_gap, mean_gap);
          if (mean_gap > 1e-12) {
            t.expect(false, "exact mean enumeration equals the weighted mean");
            break;
          }

          // classical signed rank averaged over all selections vs the
          // weighted signed-rank statistic
          double expectation = 0.0;
          long count = 0;
          for_each_selection(sample, [&](const std::vector<double>& selected) {
            expectation += classical_signed_rank(selected, 0.0);
            ++count;
          });
          expectation /= static_cast<double>(count);
          const double w = signed_rank_statistic(sample, 0.0);
          const double margin = 1.0 / m + 1e-12 - std::abs(expectation - w);
          if (worst_rank_margin < 0.0 || margin < worst_rank_margin)
            worst_rank_margin = margin;
          if (margin < 0.0) {
            t.expect(false, "signed-rank gap bounded by 1/M");
            break;
          }
        }
      }
      if (!t.ok) break;

      int carry = 0;
      for (; carry < m; ++carry) {
        if (++sizes[static_cast<std::size_t>(carry)] <= 3) break;
        sizes[static_cast<std::size_t>(carry)] = 1;
      }
      if (carry == m) break;
    }
    if (!t.ok) break;
  }
  out << "    " << samples << " sign/size configurations; worst mean gap " << fmt(worst_mean_gap)
      << ", smallest signed-rank slack " << fmt(worst_rank_margin) << "\n"
      << t.detail.str();
  return t.ok;
}

// --- criterion 5: test levels under the null --------------------------------

bool criterion5(std::ostream& out) {
  const int datasets = 5000;
  const std::vector<std::string> names{"sign", "signed-rank", "t"};
  const std::vector<double> levels{0.01, 0.05, 0.10};
  std::vector<std::vector<long>> rejections(names.size(), std::vector<long>(levels.size(), 0));
  for (int r = 0; r < datasets; ++r) {
    const ClusteredSample sample = gen_example_mean(200, 5, 50, 500'000 + r);
    const double p[3] = {sign_test(sample, 0.0).p_value, signed_rank_test(sample, 0.0).p_value,
                         modified_t_test(sample, 0.0).p_value};
    for (std::size_t k = 0; k < names.size(); ++k)
      for (std::size_t a = 0; a < levels.size(); ++a)
        if (p[k] < levels[a]) ++rejections[k][a];
  }
  Tally t;
  const double n = datasets;
  for (std::size_t k = 0; k < names.size(); ++k) {
    out << "    " << names[k] << " rejection rates:";
    for (std::size_t a = 0; a < levels.size(); ++a) {
      const double rate = rejections[k][a] / n;
      const double alpha = levels[a];
      out << " " << fmt(alpha) << " -> " << fmt(rate);
      if (alpha == 0.05) {
        t.expect(rate >= 0.035 && rate <= 0.065,
                 names[k] + " level at 0.05 in [0.035, 0.065]");
      } else {
        const double se = std::sqrt(alpha * (1 - alpha) / n);
        t.expect(std::abs(rate - alpha) <= 3 * se,
                 names[k] + " level at " + fmt(alpha) + " within 3 binomial SE");
      }
    }
    out << "\n";
  }
  out << t.detail.str();
  return t.ok;
}

// --- criterion 6: regression identities and agreement -----------------------

bool criterion6(std::ostream& out) {
  Tally t;
  std::mt19937_64 rng(606);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> size_dist(1, 6);

  // (a) intercept-only weighted fit equals the weighted mean
  {
    double worst = 0.0;
    for (int rep = 0; rep < 25; ++rep) {
      std::vector<std::vector<double>> clusters(5 + rep % 4);
      for (auto& cl : clusters) {
        cl.resize(static_cast<std::size_t>(size_dist(rng)));
        for (double& v : cl) v = 2.0 * normal(rng) + 0.3;
      }
      const ClusteredSample sample = make_sample(clusters);
      const RegressionFit fit = icswls_fit(design_clusters(sample, true));
      const double t2 = marginal_mean(sample, WeightingScheme::InverseClusterSize).value;
      worst = std::max(worst, std::abs(fit.beta[0] - t2));
    }
    t.expect(worst <= 1e-12, "intercept-only weighted fit equals weighted mean (1e-12)");
    out << "    (a) worst intercept gap " << fmt(worst) << "\n";
  }

  // (b) singleton clusters: weighted fit equals pooled least squares
  {
    double worst = 0.0;
    for (int rep = 0; rep < 25; ++rep) {
      std::vector<DesignedCluster> designs;
      for (int i = 0; i < 30; ++i) {
        DesignedCluster cl;
        cl.X.resize(1, 3);
        cl.X(0, 0) = 1.0;
        cl.X(0, 1) = normal(rng);
        cl.X(0, 2) = normal(rng);
        cl.y.resize(1);
        cl.y[0] = normal(rng);
        designs.push_back(std::move(cl));
      }
      const Vector a = icswls_fit(designs).beta;
      const Vector b = ols_fit(designs).beta;
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
    t.expect(worst <= 1e-10, "singleton weighted fit equals pooled fit (1e-10)");
    out << "    (b) worst coefficient gap " << fmt(worst) << "\n";
  }

  // (c) huge Huber constant reproduces the weighted fit
  {
    const auto designs = make_ics_regression(300, 2, 9, 1.0, 2.0, 61'000);
    HuberConfig cfg;
    cfg.c = 1e9;
    const Vector h = huber_icw_fit(designs, cfg).beta;
    const Vector w = icswls_fit(designs).beta;
    double worst = 0.0;
    for (Index k = 0; k < h.size(); ++k)
      worst = std::max(worst, std::abs(h[k] - w[k]) / std::max(1.0, std::abs(w[k])));
    t.expect(worst <= 1e-8, "Huber with c = 1e9 equals the weighted fit (1e-8 relative)");
    out << "    (c) worst relative gap " << fmt(worst) << "\n";
  }

  // (d) resampled coefficients track the weighted fit within resampling noise
  {
    const auto designs = make_ics_regression(2000, 2, 9, 1.0, 2.0, 62'002);
    WcrRegressionConfig cfg;
    cfg.replicates = 1000;
    cfg.seed = 99;
    cfg.exact_cap = 0;
    const RegressionFit wcr = wcr_regression(designs, cfg);
    const RegressionFit wls = icswls_fit(designs);
    for (Index k = 0; k < wcr.beta.size(); ++k) {
      const double gap = std::abs(wcr.beta[k] - wls.beta[k]);
      const double se = wcr.mc_std_errors[k];
      t.expect(gap <= 2 * se, "wcr coefficient " + std::to_string(k) +
                                  " within 2 resampling SE of the weighted fit");
      out << "    (d) coefficient " << k << ": gap " << fmt(gap) << ", resampling se " << fmt(se)
          << "\n";
    }
  }

  // (e) sandwich covariances are positive semidefinite
  {
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<DesignedCluster> designs;
      const int m = 12 + rep % 20;
      for (int i = 0; i < m; ++i) {
        DesignedCluster cl;
        const Index ni = size_dist(rng);
        cl.X.resize(ni, 3);
        cl.y.resize(ni);
        for (Index j = 0; j < ni; ++j) {
          cl.X(j, 0) = 1.0;
          cl.X(j, 1) = normal(rng);
          cl.X(j, 2) = normal(rng);
          cl.y[j] = 0.5 + normal(rng) * (1.0 + 0.2 * std::abs(cl.X(j, 1)));
        }
        designs.push_back(std::move(cl));
      }
      for (const bool robust : {false, true}) {
        Matrix cov;
        if (robust) {
          try {
            cov = huber_icw_fit(designs).covariance;
          } catch (const DegenerateError&) {
            continue;
          }
        } else {
          cov = icswls_fit(designs).covariance;
        }
        const Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
        const double floor = -1e-10 * cov.trace();
        worst = std::min(worst, es.eigenvalues().minCoeff() - floor);
      }
    }
    t.expect(worst >= 0.0, "sandwich covariance eigenvalues above -1e-10 * trace");
    out << "    (e) smallest eigenvalue slack " << fmt(worst) << "\n";
  }

  out << t.detail.str();
  return t.ok;
}

// --- criterion 7: variance estimators agree with the sampling variance ------

bool criterion7(std::ostream& out) {
  const int datasets = 2000;
  const int m = 100;
  std::vector<double> t2_values, tau_values, mc_values, boot_values;
  t2_values.reserve(datasets);
  IidStatistic mean_stat = make_iid_statistic("mean", 0.0);
  const auto t2_of = [](const ClusteredSample& s) {
    return marginal_mean(s, WeightingScheme::InverseClusterSize).value;
  };
  for (int r = 0; r < datasets; ++r) {
    const ClusteredSample sample = gen_example_mean(m, 5, 12, 700'000 + r);
    const Estimate mean = marginal_mean(sample, WeightingScheme::InverseClusterSize);
    t2_values.push_back(mean.value);
    tau_values.push_back(*mean.variance);

    WcrConfig cfg;
    cfg.replicates = 2000;
    cfg.exact_enumeration_cap = 0;
    cfg.seed = splitmix64(880'000) + static_cast<std::uint64_t>(r);
    mc_values.push_back(wcr_variance(wcr_estimate(sample, mean_stat, cfg)).value);

    boot_values.push_back(cluster_bootstrap_variance(
        sample, t2_of, 2000, splitmix64(990'000) + static_cast<std::uint64_t>(r)));
  }
  const double empirical = summarize(t2_values).variance;
  const double tau_mean = summarize(tau_values).mean;
  const double mc_mean = summarize(mc_values).mean;
  const double boot_mean = summarize(boot_values).mean;

  Tally t;
  t.expect(std::abs(tau_mean - empirical) <= 0.15 * empirical,
           "tau^2 / M within 15% of the sampling variance");
  t.expect(std::abs(mc_mean - empirical) <= 0.15 * empirical,
           "resampling variance formula within 15% of the sampling variance");
  t.expect(std::abs(boot_mean - empirical) <= 0.15 * empirical,
           "cluster bootstrap within 15% of the sampling variance");
  out << "    sampling variance " << fmt(empirical) << "; tau^2/M " << fmt(tau_mean)
      << ", resampling formula " << fmt(mc_mean) << ", bootstrap " << fmt(boot_mean) << " (means over "
      << datasets << " datasets)\n"
      << t.detail.str();
  return t.ok;
}

// --- criterion 8: comparison layout stands in for the external dataset ------

bool criterion8(std::ostream& out) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path();
  const fs::path data = dir / "icstat_acceptance_c8.csv";

  // Build a regression dataset with informative sizes through the library,
  // then drive the command-line comparison end to end.
  {
    const auto designs = make_ics_regression(300, 2, 9, 1.0, 2.0, 808'000);
    std::ofstream file(data);
    file << "cluster,y,x\n";
    for (std::size_t i = 0; i < designs.size(); ++i)
      for (Index j = 0; j < designs[i].y.size(); ++j)
        file << "c" << i << "," << designs[i].y[j] << "," << designs[i].X(j, 1) << "\n";
  }

  std::ostringstream cli_out, cli_err;
  const int code = icstat::cli::run({"regress", data.string(), "--x-col", "x", "--compare",
                                     "--replicates", "500", "--seed", "42", "--format", "csv"},
                                    cli_out, cli_err);
  std::error_code ec;
  fs::remove(data, ec);

  Tally t;
  t.expect(code == 0, "comparison run succeeds");
  std::istringstream lines(cli_out.str());
  std::string header;
  std::getline(lines, header);
  t.expect(header ==
               "term,wcr_estimate,wcr_se,ols_estimate,ols_se,icswls_estimate,icswls_se,"
               "huber_estimate,huber_se",
           "five-column comparison layout (term plus four methods)");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  t.expect(rows == 2, "one row per coefficient");
  out << "    external dataset is not distributed; the layout check plus criterion 6(d) "
         "substitute for value-level reproduction\n"
      << t.detail.str();
  return t.ok;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* title;
    std::function<bool(std::ostream&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "covariance estimator bias triple (0.30 / 0.08 / 0.00)", criterion1},
      {2, "mean-estimator variance identities at M = 20", criterion2},
      {3, "pooled-mean bias profile across cluster counts", criterion3},
      {4, "exhaustive resampling equivalences on tiny samples", criterion4},
      {5, "test levels under the null at M = 200", criterion5},
      {6, "regression identities and resampling agreement", criterion6},
      {7, "variance estimators against the sampling variance", criterion7},
      {8, "comparison layout on synthetic data", criterion8},
  };

  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));

  bool all_ok = true;
  for (const Criterion& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    std::ostringstream detail;
    const bool ok = c.run(detail);
    all_ok = all_ok && ok;
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.title << "\n"
              << detail.str();
  }
  return all_ok ? 0 : 1;
}
