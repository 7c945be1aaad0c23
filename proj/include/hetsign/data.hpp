#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hetsign/csv.hpp"
#include "hetsign/graph.hpp"
#include "hetsign/matrix.hpp"

namespace hetsign {

struct Manifest {
  std::string name;
  int n = 0;
  int m_pairs = 0;
  int features = 0;
  int classes = 0;

  bool operator==(const Manifest&) const = default;
};

// A dataset on disk: undirected labeled graph plus a dense feature row per
// node, described by a manifest whose counts must agree with the files.
struct DatasetBundle {
  Graph graph;
  Matrix features;
  Manifest manifest;

  const std::vector<int>& labels() const { return graph.labels(); }
};

namespace detail {

inline void parse_fail(const std::string& file, int line, const std::string& what) {
  throw std::runtime_error(file + ":" + std::to_string(line) + ": " + what);
}

inline int parse_int(const std::string& text, const std::string& file, int line) {
  int value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) parse_fail(file, line, "expected integer, got '" + text + "'");
  return value;
}

inline double parse_decimal(const std::string& text, const std::string& file, int line) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    parse_fail(file, line, "expected decimal, got '" + text + "'");
  return value;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail

inline DatasetBundle load_bundle(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw std::runtime_error("load_bundle: no such directory " + dir.string());

  // manifest
  fs::path manifest_path = dir / "manifest.json";
  std::ifstream manifest_in(manifest_path, std::ios::binary);
  if (!manifest_in) throw std::runtime_error("cannot open " + manifest_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(manifest_in);
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error(manifest_path.string() + ": " + err.what());
  }
  Manifest manifest;
  try {
    manifest.name = doc.at("name").get<std::string>();
    manifest.n = doc.at("n").get<int>();
    manifest.m_pairs = doc.at("m_pairs").get<int>();
    manifest.features = doc.at("F").get<int>();
    manifest.classes = doc.at("C").get<int>();
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error(manifest_path.string() + ": " + err.what());
  }
  if (manifest.n < 1 || manifest.m_pairs < 0 || manifest.features < 1 || manifest.classes < 2)
    throw std::runtime_error(manifest_path.string() + ": counts out of range");

  // edges.tsv: header then one "i<TAB>j" per undirected pair, i < j
  fs::path edges_path = dir / "edges.tsv";
  auto edge_lines = detail::read_lines(edges_path);
  std::string edges_name = edges_path.string();
  if (edge_lines.empty() || edge_lines[0] != "i\tj")
    detail::parse_fail(edges_name, 1, "expected header 'i\\tj'");
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(edge_lines.size() - 1);
  for (size_t k = 1; k < edge_lines.size(); ++k) {
    int line_no = static_cast<int>(k) + 1;
    auto parts = detail::split_on(edge_lines[k], '\t');
    if (parts.size() != 2) detail::parse_fail(edges_name, line_no, "expected two tab-separated fields");
    int i = detail::parse_int(parts[0], edges_name, line_no);
    int j = detail::parse_int(parts[1], edges_name, line_no);
    if (i >= j) detail::parse_fail(edges_name, line_no, "pairs must satisfy i < j");
    pairs.emplace_back(i, j);
  }

  // labels.txt: one integer per node, no header
  fs::path labels_path = dir / "labels.txt";
  auto label_lines = detail::read_lines(labels_path);
  std::string labels_name = labels_path.string();
  if (static_cast<int>(label_lines.size()) != manifest.n)
    throw std::runtime_error(labels_name + ": expected " + std::to_string(manifest.n) +
                             " lines, found " + std::to_string(label_lines.size()));
  std::vector<int> labels(manifest.n);
  for (int k = 0; k < manifest.n; ++k)
    labels[k] = detail::parse_int(label_lines[k], labels_name, k + 1);

  // features.csv: header then n comma-separated rows
  fs::path features_path = dir / "features.csv";
  auto feature_lines = detail::read_lines(features_path);
  std::string features_name = features_path.string();
  if (feature_lines.empty() || feature_lines[0].rfind("f0", 0) != 0)
    detail::parse_fail(features_name, 1, "expected feature header starting with 'f0'");
  if (static_cast<int>(feature_lines.size()) != manifest.n + 1)
    throw std::runtime_error(features_name + ": expected " + std::to_string(manifest.n + 1) +
                             " lines, found " + std::to_string(feature_lines.size()));
  Matrix features(manifest.n, manifest.features);
  for (int r = 0; r < manifest.n; ++r) {
    int line_no = r + 2;
    auto parts = detail::split_on(feature_lines[r + 1], ',');
    if (static_cast<int>(parts.size()) != manifest.features)
      detail::parse_fail(features_name, line_no,
                         "expected " + std::to_string(manifest.features) + " values, got " +
                             std::to_string(parts.size()));
    for (int c = 0; c < manifest.features; ++c)
      features(r, c) = detail::parse_decimal(parts[c], features_name, line_no);
  }

  // cross-file validation; Graph construction rejects self/duplicate edges
  if (static_cast<int>(pairs.size()) != manifest.m_pairs)
    throw std::runtime_error(edges_name + ": manifest says " + std::to_string(manifest.m_pairs) +
                             " pairs, file has " + std::to_string(pairs.size()));
  Graph graph = Graph::undirected(manifest.n, std::move(pairs), std::move(labels),
                                  manifest.classes);
  std::vector<int> seen(manifest.classes, 0);
  for (int y : graph.labels()) ++seen[y];
  for (int c = 0; c < manifest.classes; ++c)
    if (seen[c] == 0)
      throw std::runtime_error(labels_name + ": class " + std::to_string(c) + " has no nodes");

  return DatasetBundle{std::move(graph), std::move(features), std::move(manifest)};
}

inline void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const Manifest& m = bundle.manifest;
  if (m.features < 1) throw std::domain_error("save_bundle: feature dimension must be >= 1");
  if (bundle.graph.num_nodes() != m.n || bundle.features.rows() != m.n ||
      bundle.features.cols() != m.features ||
      static_cast<int>(bundle.graph.pairs().size()) != m.m_pairs ||
      bundle.graph.num_classes() != m.classes)
    throw std::invalid_argument("save_bundle: manifest does not match bundle contents");
  if (bundle.graph.is_directed()) throw std::invalid_argument("save_bundle: graph must be undirected");

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("save_bundle: cannot create " + dir.string());

  auto open = [&](const char* file) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw std::runtime_error("save_bundle: cannot open " + (dir / file).string());
    return out;
  };

  {
    nlohmann::json doc;
    doc["name"] = m.name;
    doc["n"] = m.n;
    doc["m_pairs"] = m.m_pairs;
    doc["F"] = m.features;
    doc["C"] = m.classes;
    auto out = open("manifest.json");
    out << doc.dump(2) << "\n";
  }
  {
    auto out = open("edges.tsv");
    out << "i\tj\n";
    for (auto [i, j] : bundle.graph.pairs()) out << i << '\t' << j << '\n';
  }
  {
    auto out = open("labels.txt");
    for (int y : bundle.graph.labels()) out << y << '\n';
  }
  {
    auto out = open("features.csv");
    std::string header;
    for (int c = 0; c < m.features; ++c) {
      if (c) header += ',';
      header += "f" + std::to_string(c);
    }
    out << header << '\n';
    for (int r = 0; r < m.n; ++r) {
      std::string line;
      for (int c = 0; c < m.features; ++c) {
        if (c) line += ',';
        line += format_double(bundle.features(r, c));
      }
      out << line << '\n';
    }
    if (!out) throw std::runtime_error("save_bundle: write failed in " + dir.string());
  }
}

// Published statistics for the six benchmark graphs; edge counts follow the
// directed convention (twice the stored pair count).
struct Table1Row {
  std::string name;
  int n = 0;
  int edges_directed = 0;
  int features = 0;
  int classes = 0;
};

inline const std::vector<Table1Row>& table1() {
  static const std::vector<Table1Row> rows{
      {"cora", 2708, 10558, 1433, 7},     {"citeseer", 3327, 9104, 3703, 6},
      {"pubmed", 19717, 88648, 500, 3},   {"actor", 7600, 25944, 931, 5},
      {"chameleon", 2277, 33824, 2325, 5}, {"squirrel", 5201, 211872, 2089, 5}};
  return rows;
}

inline const Table1Row& table1_row(const std::string& name) {
  for (const auto& row : table1())
    if (row.name == name) return row;
  throw std::invalid_argument("table1_row: unknown dataset " + name);
}

struct StatsReport {
  bool n_ok = false;
  bool features_ok = false;
  bool classes_ok = false;
  bool edges_ok = false;
  int observed_n = 0;
  int observed_directed_edges = 0;
  int observed_features = 0;
  int observed_classes = 0;

  bool all_ok() const { return n_ok && features_ok && classes_ok && edges_ok; }
};

// n, F, C must match exactly; the directed edge count gets a 0.1% band to
// absorb convention drift between published sources.
inline StatsReport validate_stats(const DatasetBundle& bundle, const Table1Row& expected) {
  StatsReport report;
  report.observed_n = bundle.graph.num_nodes();
  report.observed_directed_edges = 2 * static_cast<int>(bundle.graph.pairs().size());
  report.observed_features = bundle.features.cols();
  report.observed_classes = bundle.graph.num_classes();
  report.n_ok = report.observed_n == expected.n;
  report.features_ok = report.observed_features == expected.features;
  report.classes_ok = report.observed_classes == expected.classes;
  double slack = 0.001 * expected.edges_directed;
  report.edges_ok =
      std::abs(report.observed_directed_edges - expected.edges_directed) <= slack;
  return report;
}

}  // namespace hetsign
