#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "icstat/csv.hpp"
#include "icstat/dataset.hpp"
#include "icstat/error.hpp"
#include "icstat/functionals.hpp"
#include "icstat/rng.hpp"
#include "icstat/simulate.hpp"

using namespace icstat;
using icstat::testing::make_sample;

TEST_SUITE_BEGIN("dataset");

TEST_CASE("long csv rows group by cluster id in file order") {
  std::istringstream in("cluster,y\na,1\na,3\nb,5\n");
  const ClusteredSample sample = read_long_csv(in, CsvSchema{});
  CHECK(sample.num_clusters() == 2);
  CHECK(sample.total_observations() == 3);
  CHECK(sample.cluster(0).id == "a");
  CHECK(sample.cluster(0).size() == 2);
  CHECK(sample.cluster(1).size() == 1);
  CHECK(sample.cluster(1).outcomes(0, 0) == 5.0);
}

TEST_CASE("interleaved rows keep file order within the cluster") {
  std::istringstream in("cluster,y\na,1\nb,2\na,3\n");
  const ClusteredSample sample = read_long_csv(in, CsvSchema{});
  REQUIRE(sample.cluster(0).id == "a");
  CHECK(sample.cluster(0).outcomes(0, 0) == 1.0);
  CHECK(sample.cluster(0).outcomes(1, 0) == 3.0);
}

TEST_CASE("missing outcome column is a schema error") {
  std::istringstream in("cluster,value\na,1\n");
  CHECK_THROWS_AS(read_long_csv(in, CsvSchema{}), SchemaError);
}

TEST_CASE("non-numeric outcome cell reports the file row") {
  std::istringstream in("cluster,y\na,1\na,oops\n");
  try {
    read_long_csv(in, CsvSchema{});
    FAIL("expected a parse error");
  } catch (const CsvParseError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
}

TEST_CASE("empty outcome cells are rejected") {
  std::istringstream in("cluster,y\na,\n");
  CHECK_THROWS_AS(read_long_csv(in, CsvSchema{}), CsvParseError);
}

TEST_CASE("empty file and header-only file fail") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_long_csv(empty, CsvSchema{}), EmptyInputError);
  std::istringstream header_only("cluster,y\n");
  CHECK_THROWS_AS(read_long_csv(header_only, CsvSchema{}), EmptyInputError);
}

TEST_CASE("observation weights match the scheme definitions") {
  const ClusteredSample sample = make_sample({{1, 3}, {5}});
  const Vector ics = observation_weights(sample, WeightingScheme::InverseClusterSize);
  CHECK(ics[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(ics[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(ics[2] == doctest::Approx(0.5).epsilon(1e-14));
  const Vector naive = observation_weights(sample, WeightingScheme::NaivePooled);
  for (Index k = 0; k < 3; ++k) CHECK(naive[k] == doctest::Approx(1.0 / 3).epsilon(1e-14));
  const Vector first = observation_weights(sample, WeightingScheme::FirstObservation);
  CHECK(first[0] == 0.5);
  CHECK(first[1] == 0.0);
  CHECK(first[2] == 0.5);
}

TEST_CASE("all singleton clusters make the three schemes identical") {
  const ClusteredSample sample = make_sample({{1}, {2}, {3}, {4}});
  const Vector a = observation_weights(sample, WeightingScheme::FirstObservation);
  const Vector b = observation_weights(sample, WeightingScheme::InverseClusterSize);
  const Vector c = observation_weights(sample, WeightingScheme::NaivePooled);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((b - c).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("weights sum to one for random ragged samples") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> size_dist(1, 7);
  std::normal_distribution<double> value(0.0, 3.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<double>> clusters(1 + rep % 9);
    for (auto& cl : clusters) {
      cl.resize(static_cast<std::size_t>(size_dist(rng)));
      for (double& v : cl) v = value(rng);
    }
    const ClusteredSample sample = make_sample(clusters);
    for (WeightingScheme scheme : {WeightingScheme::FirstObservation,
                                   WeightingScheme::InverseClusterSize,
                                   WeightingScheme::NaivePooled}) {
      const double total = observation_weights(sample, scheme).sum();
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("load, write, reload round trip preserves the data model") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> value(0.0, 10.0);
  std::vector<std::vector<double>> clusters{{value(rng)}, {value(rng), value(rng), value(rng)},
                                            {value(rng), value(rng)}};
  const ClusteredSample original = make_sample(clusters);

  std::ostringstream buffer;
  write_long_csv(original, buffer, CsvSchema{});
  std::istringstream in(buffer.str());
  const ClusteredSample reloaded = read_long_csv(in, CsvSchema{});

  REQUIRE(reloaded.num_clusters() == original.num_clusters());
  for (Index i = 0; i < original.num_clusters(); ++i) {
    CHECK(reloaded.cluster(i).id == original.cluster(i).id);
    REQUIRE(reloaded.cluster(i).size() == original.cluster(i).size());
    for (Index j = 0; j < original.cluster(i).size(); ++j)
      CHECK(reloaded.cluster(i).outcomes(j, 0) == original.cluster(i).outcomes(j, 0));
  }

  std::ostringstream again;
  write_long_csv(reloaded, again, CsvSchema{});
  CHECK(again.str() == buffer.str());
}

TEST_CASE("duplicate cluster ids are rejected at construction") {
  std::vector<Cluster> clusters(2);
  for (Cluster& cl : clusters) {
    cl.id = "same";
    cl.outcomes.resize(1, 1);
    cl.outcomes(0, 0) = 1.0;
    cl.covariates.resize(1, 0);
  }
  CHECK_THROWS_AS(ClusteredSample(std::move(clusters)), InvalidArgumentError);
}

TEST_CASE("non-finite outcomes are rejected at construction") {
  std::vector<Cluster> clusters(1);
  clusters[0].id = "a";
  clusters[0].outcomes.resize(1, 1);
  clusters[0].outcomes(0, 0) = std::numeric_limits<double>::quiet_NaN();
  clusters[0].covariates.resize(1, 0);
  CHECK_THROWS_AS(ClusteredSample(std::move(clusters)), InvalidArgumentError);
}

TEST_CASE("diagnostic groups by size and pools rare sizes") {
  const ClusteredSample sample = make_sample({{1, 2}, {3, 4}, {9, 9, 9, 9, 9}});
  const DiagnosticTable table = informativeness_diagnostic(sample);
  CHECK_FALSE(table.size_constant);
  REQUIRE(table.groups.size() == 2);
  CHECK(table.groups[0].label == "2");
  CHECK(table.groups[0].n_clusters == 2);
  CHECK(table.groups[0].n_obs == 4);
  CHECK(table.groups[1].label == "other");
  CHECK(table.groups[1].n_clusters == 1);
  Index total = 0;
  for (const SizeGroup& g : table.groups) total += g.n_clusters;
  CHECK(total == sample.num_clusters());
}

TEST_CASE("constant cluster size is flagged") {
  const ClusteredSample sample = make_sample({{1, 2}, {3, 4}});
  const DiagnosticTable table = informativeness_diagnostic(sample);
  CHECK(table.size_constant);
  REQUIRE(table.groups.size() == 1);
  CHECK(table.groups[0].label == "2");
}

TEST_CASE("size-dependent outcome means show up in the diagnostic") {
  // Informative generator: small clusters come from negative cluster levels.
  const ClusteredSample sample = gen_example_mean(600, 2, 7, 915);
  const DiagnosticTable table = informativeness_diagnostic(sample);
  REQUIRE(table.groups.size() == 2);
  CHECK(table.groups[0].label == "2");
  CHECK(table.groups[0].mean < 0.0);
  CHECK(table.groups[1].mean > 0.0);
}

TEST_CASE("censored data is rejected unless dropped") {
  const ClusteredSample sample =
      gen_recurrent_events(20, 2.5, GapDistribution::fixed(1.0), 3);
  CHECK(sample.has_censored());
  CHECK_THROWS_AS(require_uncensored(sample), InvalidArgumentError);
  const ClusteredSample cleaned = drop_censored(sample);
  CHECK_FALSE(cleaned.has_censored());
  // fixed gap 1 within follow-up 2.5 leaves two uncensored gaps per cluster
  CHECK(cleaned.total_observations() == 40);
}

TEST_CASE("dropping censored observations can empty the sample") {
  const ClusteredSample sample =
      gen_recurrent_events(5, 0.5, GapDistribution::fixed(1.0), 3);
  CHECK_THROWS_AS(drop_censored(sample), EmptyInputError);
}

TEST_SUITE_END();
