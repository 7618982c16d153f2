#include "rdpg/cli_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rdpg/errors.hpp"

namespace rdpg {

namespace {

using nlohmann::json;

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double parse_double(std::string_view token, const std::string& field) {
  double value = 0.0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidConfig(field, "not a number: '" + std::string(token) + "'");
  }
  return value;
}

long long parse_integer(std::string_view token, const std::string& field) {
  const std::string text = trim(token);
  long long value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw InvalidConfig(field, "not an integer: '" + text + "'");
  }
  return value;
}

int parse_int(std::string_view token, const std::string& field) {
  const long long value = parse_integer(token, field);
  if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
    throw InvalidConfig(field, "out of range");
  }
  return static_cast<int>(value);
}

bool parse_bool(std::string_view token, const std::string& field) {
  const std::string text = trim(token);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InvalidConfig(field, "expected true or false, got '" + text + "'");
}

Method parse_method(std::string_view token, const std::string& field) {
  if (token == "ase" || token == "ASE") return Method::Ase;
  if (token == "lse" || token == "LSE") return Method::Lse;
  throw InvalidConfig(field, "unknown method '" + std::string(token) + "'");
}

Clusterer parse_clusterer(std::string_view token, const std::string& field) {
  for (Clusterer c : {Clusterer::KMeans, Clusterer::Gmm, Clusterer::LinearOracle,
                      Clusterer::BayesOracle}) {
    if (token == to_string(c)) return c;
  }
  throw InvalidConfig(field, "unknown clusterer '" + std::string(token) + "'");
}

RhoRegime parse_regime(std::string_view token, const std::string& field) {
  const std::string text = trim(token);
  if (text == "dense") return RhoRegime::Dense;
  if (text == "vanishing") return RhoRegime::Vanishing;
  throw InvalidConfig(field, "expected dense or vanishing, got '" + text + "'");
}

json cell_to_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, Infinite>) {
          return "inf";
        } else if constexpr (std::is_same_v<T, double>) {
          if (std::isfinite(v)) return v;
          return format_double(v);
        } else {
          return v;
        }
      },
      cell);
}

std::string cell_text(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, Infinite>) {
          return "inf";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          return v;
        }
      },
      cell);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted.push_back('"');
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

Cell optional_cell(const std::optional<double>& value, bool infinite_if_missing) {
  if (value) return *value;
  if (infinite_if_missing) return Infinite{};
  return std::monostate{};
}

Cell str(std::string_view text) { return std::string(text); }
Cell integer(long long v) { return static_cast<std::int64_t>(v); }

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

using Ptree = boost::property_tree::ptree;

Ptree read_ini(const std::string& path) {
  Ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidConfig("config", e.what());
  }
  return tree;
}

void reject_unknown(const Ptree& tree, const std::set<std::string>& allowed) {
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InvalidConfig(section, "key outside of a section");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      if (!allowed.count(name)) throw InvalidConfig(name, "unknown key");
    }
  }
}

std::optional<std::string> lookup(const Ptree& tree, const std::string& name) {
  const auto value = tree.get_optional<std::string>(Ptree::path_type(name, '.'));
  if (!value) return std::nullopt;
  return trim(*value);
}

GridModel parse_grid_model(std::string_view token, const std::string& field) {
  const std::string text = trim(token);
  if (text == "two-block") return GridModel::TwoBlockPQ;
  if (text == "three-block") return GridModel::ThreeBlockPQ;
  throw InvalidConfig(field, "expected two-block or three-block, got '" + text + "'");
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buffer, ptr);
}

json RunManifest::to_json() const {
  return json{{"config", config},
              {"version", version},
              {"base_seed", base_seed},
              {"wall_seconds", wall_seconds},
              {"outputs", outputs}};
}

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out << ',';
    out << csv_field(table.columns[j]);
  }
  out << "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << csv_field(cell_text(row[j]));
    }
    out << "\r\n";
  }
}

json table_to_json(const Table& table, const RunManifest& manifest) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json object = json::object();
    for (std::size_t j = 0; j < row.size() && j < table.columns.size(); ++j) {
      object[table.columns[j]] = cell_to_json(row[j]);
    }
    rows.push_back(std::move(object));
  }
  return json{{"manifest", manifest.to_json()}, {"rows", std::move(rows)}};
}

void write_results(const Table& table, const RunManifest& manifest,
                   const std::string& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (format == OutputFormat::Csv) {
    write_csv(table, out);
  } else {
    out << table_to_json(table, manifest).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

Table to_table(const CltReport& report) {
  Table table{{"n", "method", "block", "entry_i", "entry_j", "empirical",
               "theoretical", "rel_err", "coverage"},
              {}};
  for (const CltBlock& b : report.blocks) {
    for (Eigen::Index i = 0; i < b.theoretical.rows(); ++i) {
      for (Eigen::Index j = i; j < b.theoretical.cols(); ++j) {
        const Cell empirical = b.empirical.size() ? Cell(b.empirical(i, j))
                                                  : Cell(std::monostate{});
        table.rows.push_back({integer(b.n), str(to_string(b.method)),
                              integer(b.block + 1), integer(i + 1), integer(j + 1),
                              empirical, b.theoretical(i, j), b.relative_error,
                              b.coverage});
      }
    }
  }
  return table;
}

Table to_table(const FrobeniusReport& report) {
  Table table{{"n", "method", "replicates", "empirical", "stderr", "theoretical",
               "ratio"},
              {}};
  for (const FrobeniusRow& r : report.rows) {
    table.rows.push_back({integer(r.n), str(to_string(r.method)),
                          integer(r.replicates), r.empirical, r.standard_error,
                          r.theoretical, r.ratio});
  }
  return table;
}

Table to_table(const ClusteringReport& report) {
  Table table{{"n", "method", "clusterer", "mean_error", "stderr", "replicates"}, {}};
  for (const ClusteringRow& r : report.rows) {
    table.rows.push_back({integer(r.n), str(to_string(r.method)),
                          str(to_string(r.clusterer)), r.mean_error,
                          r.standard_error, integer(r.replicates)});
  }
  return table;
}

Table to_table(const std::vector<RhoGridCell>& cells) {
  Table table{{"p", "r", "rho_a", "rho_l", "ratio", "status"}, {}};
  for (const RhoGridCell& c : cells) {
    const bool inf = c.status == CellStatus::Infinite;
    table.rows.push_back({c.p, c.r, optional_cell(c.rho_a, inf),
                          optional_cell(c.rho_l, inf), optional_cell(c.ratio, inf),
                          str(to_string(c.status))});
  }
  return table;
}

Table to_table(const BenchmarkReport& r) {
  Table table{{"case", "n", "p", "q", "replicates", "ase_error", "ase_stderr",
               "lse_error", "lse_stderr", "rho_a", "rho_l", "ratio"},
              {}};
  table.rows.push_back({str(to_string(r.which)), integer(r.n), r.p, r.q,
                        integer(r.replicates), r.ase_error, r.ase_standard_error,
                        r.lse_error, r.lse_standard_error,
                        optional_cell(r.rho_a, true), optional_cell(r.rho_l, true),
                        optional_cell(r.ratio, false)});
  return table;
}

Table to_table(const std::vector<ReplicateFailure>& failures) {
  Table table{{"n", "replicate", "attempts", "message"}, {}};
  for (const ReplicateFailure& f : failures) {
    table.rows.push_back({integer(f.n), integer(f.replicate), integer(f.attempts),
                          f.message});
  }
  return table;
}

Matrix parse_matrix(std::string_view text, const std::string& field) {
  std::vector<std::vector<double>> rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t stop = std::min(text.find(';', start), text.size());
    const std::vector<std::string> tokens = split_tokens(text.substr(start, stop - start));
    if (!tokens.empty()) {
      std::vector<double>& row = rows.emplace_back();
      for (const std::string& t : tokens) row.push_back(parse_double(t, field));
    }
    start = stop + 1;
  }
  if (rows.empty()) throw InvalidConfig(field, "empty matrix");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) {
      throw InvalidConfig(field, "rows have different lengths");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Vector parse_vector(std::string_view text, const std::string& field) {
  const std::vector<std::string> tokens = split_tokens(text);
  if (tokens.empty()) throw InvalidConfig(field, "empty list");
  Vector v(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) v(i) = parse_double(tokens[i], field);
  return v;
}

std::vector<double> parse_range(std::string_view text, const std::string& field) {
  const std::string body = trim(text);
  if (body.find(':') == std::string::npos) {
    const Vector v = parse_vector(body, field);
    return {v.data(), v.data() + v.size()};
  }
  std::vector<double> parts;
  std::size_t start = 0;
  while (start <= body.size()) {
    const std::size_t stop = std::min(body.find(':', start), body.size());
    parts.push_back(parse_double(trim(body.substr(start, stop - start)), field));
    start = stop + 1;
  }
  if (parts.size() != 3) throw InvalidConfig(field, "expected lo:hi:step");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  if (!(step > 0.0) || hi < lo) throw InvalidConfig(field, "need step > 0 and hi >= lo");
  const double span = (hi - lo) / step;
  const auto count = static_cast<long long>(std::floor(span + 1e-9)) + 1;
  if (count > 1000000) throw InvalidConfig(field, "too many values");
  std::vector<double> values;
  values.reserve(count);
  for (long long i = 0; i < count; ++i) {
    // Snap to 12 decimals so 0.2 + 3 * 0.05 prints as 0.35.
    const double v = lo + static_cast<double>(i) * step;
    values.push_back(std::round(v * 1e12) / 1e12);
  }
  return values;
}

LoadedExperiment load_experiment_config(const std::string& path) {
  const Ptree tree = read_ini(path);
  reject_unknown(tree, {"model.block_probs", "model.weights", "model.dim",
                        "model.regime", "model.sparsity", "experiment.n",
                        "experiment.replicates", "experiment.seed",
                        "experiment.methods", "experiment.clusterers",
                        "experiment.restarts", "experiment.oracle_samples",
                        "experiment.threads", "experiment.noiseless"});
  LoadedExperiment loaded;
  ExperimentConfig& c = loaded.config;
  const auto probs = lookup(tree, "model.block_probs");
  if (!probs) throw InvalidConfig("model.block_probs", "missing");
  c.model.block_probs = parse_matrix(*probs, "model.block_probs");
  if (const auto w = lookup(tree, "model.weights")) {
    c.model.weights = parse_vector(*w, "model.weights");
  } else {
    const auto k = c.model.block_probs.rows();
    c.model.weights = Vector::Constant(k, 1.0 / static_cast<double>(k));
  }
  if (const auto v = lookup(tree, "model.dim")) c.dim = parse_int(*v, "model.dim");
  if (const auto v = lookup(tree, "model.regime")) c.regime = parse_regime(*v, "model.regime");
  if (const auto v = lookup(tree, "model.sparsity")) {
    c.sparsity = parse_double(*v, "model.sparsity");
  }
  if (const auto v = lookup(tree, "experiment.n")) {
    c.n_values.clear();
    for (const std::string& t : split_tokens(*v)) c.n_values.push_back(parse_int(t, "experiment.n"));
  }
  if (const auto v = lookup(tree, "experiment.replicates")) {
    c.replicates = parse_int(*v, "experiment.replicates");
  }
  if (const auto v = lookup(tree, "experiment.seed")) {
    const long long seed = parse_integer(*v, "experiment.seed");
    if (seed < 0) throw InvalidConfig("experiment.seed", "must be nonnegative");
    c.base_seed = static_cast<std::uint64_t>(seed);
    loaded.seed_given = true;
  }
  if (const auto v = lookup(tree, "experiment.methods")) {
    c.methods.clear();
    for (const std::string& t : split_tokens(*v)) {
      c.methods.push_back(parse_method(t, "experiment.methods"));
    }
  }
  if (const auto v = lookup(tree, "experiment.clusterers")) {
    c.clusterers.clear();
    for (const std::string& t : split_tokens(*v)) {
      c.clusterers.push_back(parse_clusterer(t, "experiment.clusterers"));
    }
  }
  if (const auto v = lookup(tree, "experiment.restarts")) {
    c.restarts = parse_int(*v, "experiment.restarts");
  }
  if (const auto v = lookup(tree, "experiment.oracle_samples")) {
    c.oracle_samples = parse_int(*v, "experiment.oracle_samples");
  }
  if (const auto v = lookup(tree, "experiment.threads")) {
    c.threads = parse_int(*v, "experiment.threads");
  }
  if (const auto v = lookup(tree, "experiment.noiseless")) {
    c.noiseless = parse_bool(*v, "experiment.noiseless");
  }
  return loaded;
}

GridConfig load_grid_config(const std::string& path) {
  const Ptree tree = read_ini(path);
  reject_unknown(tree, {"grid.model", "grid.weights", "grid.p", "grid.r", "grid.n"});
  GridConfig g;
  if (const auto v = lookup(tree, "grid.model")) g.model = parse_grid_model(*v, "grid.model");
  if (const auto v = lookup(tree, "grid.weights")) g.weights = parse_vector(*v, "grid.weights");
  if (const auto v = lookup(tree, "grid.p")) g.p_values = parse_range(*v, "grid.p");
  if (const auto v = lookup(tree, "grid.r")) g.r_values = parse_range(*v, "grid.r");
  if (const auto v = lookup(tree, "grid.n")) g.n = parse_int(*v, "grid.n");
  return g;
}

json config_to_json(const ExperimentConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  json clusterers = json::array();
  for (Clusterer k : c.clusterers) clusterers.push_back(std::string(to_string(k)));
  return json{{"block_probs", matrix_to_json(c.model.block_probs)},
              {"weights", vector_to_json(c.model.weights)},
              {"dim", c.dim},
              {"regime", std::string(to_string(c.regime))},
              {"sparsity", c.sparsity},
              {"n", c.n_values},
              {"replicates", c.replicates},
              {"seed", c.base_seed},
              {"methods", methods},
              {"clusterers", clusterers},
              {"restarts", c.restarts},
              {"oracle_samples", c.oracle_samples},
              {"threads", c.threads},
              {"noiseless", c.noiseless}};
}

}  // namespace rdpg
