#include <cmath>

#include "doctest.h"
#include "rdpg/errors.hpp"
#include "rdpg/mc_harness.hpp"

using namespace rdpg;

namespace {

ExperimentConfig two_block_config() {
  ExperimentConfig config;
  config.model.block_probs.resize(2, 2);
  config.model.block_probs << 0.6, 0.2, 0.2, 0.5;
  config.model.weights = Vector::Constant(2, 0.5);
  config.n_values = {120};
  config.replicates = 6;
  config.base_seed = 17;
  config.threads = 1;
  config.restarts = 2;
  config.oracle_samples = 2000;
  return config;
}

std::string failing_field(const ExperimentConfig& config) {
  try {
    config.validate();
  } catch (const InvalidConfig& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("config validation names the field") {
  ExperimentConfig config = two_block_config();
  CHECK_NOTHROW(config.validate());
  config.replicates = 0;
  CHECK(failing_field(config) == "replicates");
  config = two_block_config();
  config.n_values.clear();
  CHECK(failing_field(config) == "n");
  config = two_block_config();
  config.model.weights(0) = 0.9;
  CHECK(failing_field(config) == "model");
  config = two_block_config();
  config.sparsity = 0.5;
  CHECK(failing_field(config) == "sparsity");
  config.regime = RhoRegime::Vanishing;
  CHECK(failing_field(config) == "");
  config.dim = 3;
  CHECK(failing_field(config) == "dim");
}

TEST_CASE("noiseless residuals vanish") {
  ExperimentConfig config = two_block_config();
  config.noiseless = true;
  const CltReport report = run_clt_check(config);
  REQUIRE(report.blocks.size() == 4);
  CHECK(report.failures.empty());
  for (const CltBlock& block : report.blocks) {
    CHECK(block.samples == config.replicates);
    CHECK(block.empirical.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(block.coverage == 1.0);
  }
  const FrobeniusReport frob = run_frobenius_check(config);
  REQUIRE(frob.rows.size() == 2);
  for (const FrobeniusRow& row : frob.rows) {
    CHECK(row.empirical < 1e-12);
    CHECK(row.theoretical > 0.0);
  }
}

TEST_CASE("reports are reproducible and independent of thread count") {
  ExperimentConfig config = two_block_config();
  const CltReport a = run_clt_check(config);
  config.threads = 3;
  const CltReport b = run_clt_check(config);
  REQUIRE(a.blocks.size() == b.blocks.size());
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    CHECK(a.blocks[i].empirical == b.blocks[i].empirical);
    CHECK(a.blocks[i].coverage == b.blocks[i].coverage);
  }

  config.threads = 1;
  const ClusteringReport c1 = run_clustering_experiment(config);
  config.threads = 2;
  const ClusteringReport c2 = run_clustering_experiment(config);
  REQUIRE(c1.rows.size() == c2.rows.size());
  for (std::size_t i = 0; i < c1.rows.size(); ++i) {
    CHECK(c1.rows[i].mean_error == c2.rows[i].mean_error);
    CHECK(c1.rows[i].standard_error == c2.rows[i].standard_error);
  }
}

TEST_CASE("clustering experiment rows") {
  ExperimentConfig config = two_block_config();
  config.n_values = {100, 150};
  const ClusteringReport report = run_clustering_experiment(config);
  // 2 n values x 2 methods x 4 clusterers.
  REQUIRE(report.rows.size() == 16);
  for (const ClusteringRow& row : report.rows) {
    CHECK(row.mean_error >= 0.0);
    CHECK(row.mean_error <= 1.0);
    CHECK(row.standard_error >= 0.0);
    const bool oracle = row.clusterer == Clusterer::LinearOracle ||
                        row.clusterer == Clusterer::BayesOracle;
    CHECK(row.replicates == (oracle ? config.oracle_samples : config.replicates));
  }
}

TEST_CASE("replicates that keep failing are recorded") {
  ExperimentConfig config;
  config.model.block_probs = Matrix::Constant(1, 1, 0.5);
  config.model.weights = Vector::Constant(1, 1.0);
  config.regime = RhoRegime::Vanishing;
  config.sparsity = 0.002;
  config.n_values = {40};
  config.replicates = 3;
  config.methods = {Method::Lse};
  config.threads = 1;
  const FrobeniusReport report = run_frobenius_check(config);
  REQUIRE(report.failures.size() == 3);
  for (const ReplicateFailure& f : report.failures) {
    CHECK(f.attempts == 4);
    CHECK(f.n == 40);
    CHECK(!f.message.empty());
  }
  CHECK(report.rows[0].replicates == 0);
}

TEST_CASE("benchmark cases") {
  for (BenchmarkCase c : {BenchmarkCase::TwoBlockA, BenchmarkCase::TwoBlockB,
                          BenchmarkCase::ThreeBlockA, BenchmarkCase::ThreeBlockB}) {
    CHECK(benchmark_case_from_string(to_string(c)) == c);
    CHECK_NOTHROW(benchmark_config(c).validate());
  }
  CHECK(!benchmark_case_from_string("nope").has_value());
  const ExperimentConfig a = benchmark_config(BenchmarkCase::TwoBlockA);
  CHECK(a.n_values == std::vector<int>{200});
  CHECK(a.model.block_probs(0, 1) == doctest::Approx(0.45));
  const ExperimentConfig b = benchmark_config(BenchmarkCase::ThreeBlockB);
  CHECK(b.n_values == std::vector<int>{1600});
  CHECK(b.model.block_probs(0, 0) == 0.34);
  CHECK(b.model.block_probs(1, 2) == 0.15);
  CHECK(b.model.weights(0) == 0.8);

  const BenchmarkReport small = run_benchmark_case(BenchmarkCase::TwoBlockA, 4, 1, 1);
  CHECK(small.replicates == 4);
  CHECK(small.n == 200);
  REQUIRE(small.ratio.has_value());
  CHECK(*small.ratio > 1.0);
}
