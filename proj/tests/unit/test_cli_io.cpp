#include <algorithm>
#include <cmath>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "rdpg/cli_io.hpp"
#include "rdpg/errors.hpp"

using namespace rdpg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rdpg_cli_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rdpg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  CliRun run;
  run.code = cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  run.out = out.str();
  run.err = err.str();
  return run;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

const char* kTwoBlock =
    "[model]\n"
    "block_probs = 0.6 0.2; 0.2 0.5\n"
    "weights = 0.5, 0.5\n"
    "[experiment]\n"
    "n = 80\n"
    "replicates = 3\n"
    "methods = ase, lse\n"
    "threads = 1\n";

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InvalidConfig& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(INFINITY) == "inf");
}

TEST_CASE("csv writer") {
  std::ostringstream empty;
  write_csv(to_table(ClusteringReport{}), empty);
  CHECK(empty.str() == "n,method,clusterer,mean_error,stderr,replicates\r\n");

  Table t{{"a", "b"}, {{std::string("x,\"y\""), std::monostate{}}}};
  std::ostringstream quoted;
  write_csv(t, quoted);
  CHECK(quoted.str() == "a,b\r\n\"x,\"\"y\"\"\",\r\n");
}

TEST_CASE("infinite grid cells") {
  RhoGridCell inf_cell;
  inf_cell.p = 0.5;
  inf_cell.r = 0.0;
  inf_cell.status = CellStatus::Infinite;
  RhoGridCell ok_cell;
  ok_cell.p = 0.2;
  ok_cell.r = 0.1;
  ok_cell.rho_a = 1.5;
  ok_cell.rho_l = 2.0;
  ok_cell.ratio = 0.75;
  ok_cell.status = CellStatus::Ok;
  std::ostringstream out;
  write_csv(to_table(std::vector<RhoGridCell>{inf_cell, ok_cell}), out);
  CHECK(out.str() ==
        "p,r,rho_a,rho_l,ratio,status\r\n0.5,0,inf,inf,inf,inf\r\n"
        "0.2,0.1,1.5,2,0.75,ok\r\n");

  const auto j = table_to_json(to_table(std::vector<RhoGridCell>{inf_cell}), {});
  CHECK(j["rows"][0]["ratio"] == "inf");
  CHECK(j["rows"][0]["status"] == "inf");
}

TEST_CASE("json write then read keeps floats exact") {
  TempDir dir;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z;
  FrobeniusReport report;
  for (int i = 0; i < 50; ++i) {
    FrobeniusRow row;
    row.n = 100 + i;
    row.empirical = std::exp(5 * z(rng));
    row.standard_error = z(rng) * 1e-7;
    row.theoretical = z(rng);
    row.ratio = row.empirical / row.theoretical;
    report.rows.push_back(row);
  }
  RunManifest manifest;
  manifest.base_seed = 123;
  manifest.version = "x";
  const std::string path = dir.file("frob.json");
  write_results(to_table(report), manifest, path, OutputFormat::Json);
  const auto j = nlohmann::json::parse(slurp(path));
  REQUIRE(j["rows"].size() == report.rows.size());
  CHECK(j["manifest"]["base_seed"] == 123);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(j["rows"][i]["n"].get<int>() == report.rows[i].n);
    CHECK(j["rows"][i]["empirical"].get<double>() == report.rows[i].empirical);
    CHECK(j["rows"][i]["stderr"].get<double>() == report.rows[i].standard_error);
    CHECK(j["rows"][i]["ratio"].get<double>() == report.rows[i].ratio);
  }
  CHECK_THROWS_WITH_AS(write_results(to_table(report), manifest,
                                     dir.file("missing/x.csv"), OutputFormat::Csv),
                       doctest::Contains("missing/x.csv"), std::runtime_error);
}

TEST_CASE("parsers") {
  const Matrix m = parse_matrix("0.42 0.42; 0.42,0.5", "b");
  CHECK(m.rows() == 2);
  CHECK(m(1, 1) == 0.5);
  CHECK(field_of([] { parse_matrix("1 2; 3", "block_probs"); }) == "block_probs");
  CHECK(field_of([] { parse_vector("0.5, x", "pi"); }) == "pi");
  CHECK(parse_vector("0.6,0.4", "pi").size() == 2);

  const auto p = parse_range("0.2:0.8:0.05", "p");
  REQUIRE(p.size() == 13);
  CHECK(p[3] == 0.35);
  CHECK(p.back() == 0.8);
  const auto r = parse_range("-0.15:0.15:0.05", "r");
  REQUIRE(r.size() == 7);
  CHECK(r[3] == 0.0);
  CHECK(parse_range("1, 2, 5", "n") == std::vector<double>{1, 2, 5});
  CHECK(field_of([] { parse_range("1:0:0.1", "r"); }) == "r");
  CHECK(field_of([] { parse_range("0:1", "r"); }) == "r");
}

TEST_CASE("experiment config files") {
  TempDir dir;
  const std::string path = dir.file("a.cfg");
  write_file(path, std::string(kTwoBlock) + "seed = 9\nclusterers = gmm, bayes\n");
  const LoadedExperiment loaded = load_experiment_config(path);
  CHECK(loaded.seed_given);
  CHECK(loaded.config.base_seed == 9);
  CHECK(loaded.config.n_values == std::vector<int>{80});
  CHECK(loaded.config.clusterers.size() == 2);
  CHECK(loaded.config.model.block_probs(0, 1) == 0.2);

  const auto echo = config_to_json(loaded.config);
  CHECK(echo["seed"] == 9);
  CHECK(echo["block_probs"][1][1] == 0.5);

  write_file(path, kTwoBlock);
  CHECK(!load_experiment_config(path).seed_given);

  write_file(path, std::string(kTwoBlock) + "replicatse = 4\n");
  CHECK(field_of([&] { load_experiment_config(path); }) == "experiment.replicatse");
  write_file(path, std::string(kTwoBlock) + "noiseless = maybe\n");
  CHECK(field_of([&] { load_experiment_config(path); }) == "experiment.noiseless");
  write_file(path, "[model]\nweights = 1\n");
  CHECK(field_of([&] { load_experiment_config(path); }) == "model.block_probs");
}

TEST_CASE("cli exit codes and outputs") {
  TempDir dir;
  const CliRun chernoff = run_cli({"chernoff", "--mean0", "0.3,0.1", "--cov0", "1 0.2; 0.2 2",
                                   "--mean1", "0.3,0.1", "--cov1", "1 0.2; 0.2 2"});
  CHECK(chernoff.code == 0);
  CHECK(chernoff.out == "value 0.0\nt_star 0.5\n");

  const std::string cfg = dir.file("m.cfg");
  write_file(cfg, kTwoBlock);
  const std::string out = dir.file("frob.csv");
  const CliRun no_seed = run_cli({"frobenius-check", "--config", cfg, "--out", out});
  CHECK(no_seed.code == 2);
  CHECK(no_seed.err.find("seed") != std::string::npos);

  const CliRun ok = run_cli({"frobenius-check", "--config", cfg, "--seed", "4", "--out", out});
  REQUIRE(ok.code == 0);
  const auto manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
  for (const auto& path : manifest["outputs"]) CHECK(fs::exists(path.get<std::string>()));
  CHECK(manifest["config"]["seed"] == 4);
  CHECK(slurp(out).rfind("n,method,replicates,empirical,stderr,theoretical,ratio\r\n", 0) == 0);

  const CliRun again = run_cli({"frobenius-check", "--config", cfg, "--seed", "4", "--out",
                                dir.file("frob2.csv")});
  CHECK(again.code == 0);
  CHECK(slurp(out) == slurp(dir.file("frob2.csv")));

  const CliRun bad_value =
      run_cli({"frobenius-check", "--config", cfg, "--seed", "4", "--replicates", "0",
               "--out", out});
  CHECK(bad_value.code == 2);
  CHECK(bad_value.err.find("replicates") != std::string::npos);

  CHECK(run_cli({"frobenius-check", "--bogus"}).code == 2);
  CHECK(run_cli({"embed", "--adjacency", dir.file("nope.csv"), "--dim", "2", "--out",
                 dir.file("e.csv")})
            .code == 1);

  const CliRun grid = run_cli({"ratio-grid", "--model", "two-block", "--pi", "0.6,0.4",
                               "--p", "0.2,0.75", "--r", "0.1,-0.15", "--n", "400"});
  CHECK(grid.code == 0);
  CHECK(grid.out.rfind("p,r,rho_a,rho_l,ratio,status\r\n", 0) == 0);
  CHECK(run_cli({"ratio-grid", "--model", "two-block", "--pi", "0.6,0.5", "--p", "0.2",
                 "--r", "0.1"})
            .code == 2);
}

TEST_CASE("sample and embed round trip through files") {
  TempDir dir;
  const std::string cfg = dir.file("m.cfg");
  write_file(cfg, std::string(kTwoBlock) + "seed = 3\n");
  const std::string prefix = dir.file("g");
  REQUIRE(run_cli({"sample", "--config", cfg, "--out", prefix}).code == 0);
  CHECK(fs::exists(prefix + "_latents.csv"));
  const auto manifest = nlohmann::json::parse(slurp(prefix + "_manifest.json"));
  CHECK(manifest["outputs"].size() == 3);

  REQUIRE(run_cli({"embed", "--adjacency", prefix + "_adjacency.csv", "--dim", "2", "--method",
                   "lse", "--out", dir.file("e.csv")})
              .code == 0);
  const std::string e = slurp(dir.file("e.csv"));
  CHECK(std::count(e.begin(), e.end(), '\n') == 81);
}
