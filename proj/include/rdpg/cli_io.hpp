#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rdpg/chernoff.hpp"
#include "rdpg/mc_harness.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

/// Marker for an infinite value; serialized as "inf".
struct Infinite {};

/// One table cell. monostate is a missing value (empty CSV field, JSON null).
using Cell = std::variant<std::monostate, double, std::int64_t, std::string, Infinite>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct RunManifest {
  nlohmann::json config = nlohmann::json::object();
  std::string version;
  std::uint64_t base_seed = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
};

enum class OutputFormat { Csv, Json };

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

/// RFC 4180: header row, CRLF line ends, fields quoted when needed.
void write_csv(const Table& table, std::ostream& out);
/// {"manifest": ..., "rows": [{column: value, ...}, ...]}
nlohmann::json table_to_json(const Table& table, const RunManifest& manifest);

/// Writes the table to `path`. Throws std::runtime_error naming the path if
/// the file cannot be written.
void write_results(const Table& table, const RunManifest& manifest,
                   const std::string& path, OutputFormat format);

Table to_table(const CltReport& report);
Table to_table(const FrobeniusReport& report);
Table to_table(const ClusteringReport& report);
Table to_table(const std::vector<RhoGridCell>& cells);
Table to_table(const BenchmarkReport& report);
Table to_table(const std::vector<ReplicateFailure>& failures);

/// "a b; c d" or "a,b;c,d" -> matrix. Throws InvalidConfig(field).
Matrix parse_matrix(std::string_view text, const std::string& field);
/// "a, b, c" or "a b c" -> vector.
Vector parse_vector(std::string_view text, const std::string& field);
/// "lo:hi:step" (inclusive of hi up to roundoff) or a list of values.
std::vector<double> parse_range(std::string_view text, const std::string& field);

struct LoadedExperiment {
  ExperimentConfig config;
  bool seed_given = false;
};

/// Reads an INI experiment file. Sections: [model] with block_probs, weights,
/// dim, regime, sparsity; [experiment] with n, replicates, seed, methods,
/// clusterers, restarts, oracle_samples, threads, noiseless. Unknown keys and
/// bad values throw InvalidConfig naming "section.key".
LoadedExperiment load_experiment_config(const std::string& path);

struct GridConfig {
  GridModel model = GridModel::TwoBlockPQ;
  Vector weights;
  std::vector<double> p_values;
  std::vector<double> r_values;
  int n = 1000;
};

/// Reads the [grid] section: model, weights, p, r, n.
GridConfig load_grid_config(const std::string& path);
/// Every field of the config, enough to rerun it.
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Entry point of the command-line tool. Returns 0 on success, 2 on a
/// configuration error and 1 on any other failure.
int cli_main(int argc, const char* const* argv);

}  // namespace rdpg
