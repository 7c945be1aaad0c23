#include "hetsign/data.hpp"

#include <filesystem>
#include <fstream>
#include <gtest/gtest.h>
#include <string>
#include <vector>

#include "hetsign/fixtures.hpp"

using namespace hetsign;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("hetsign_data_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int count_lines(const fs::path& path) {
  std::string body = read_file(path);
  int lines = 0;
  for (char c : body)
    if (c == '\n') ++lines;
  return lines;
}

void write_three_node_bundle(const fs::path& dir) {
  write_file(dir / "manifest.json",
             R"({"name":"threenode","n":3,"m_pairs":2,"F":2,"C":2})");
  write_file(dir / "edges.tsv", "i\tj\n0\t1\n1\t2\n");
  write_file(dir / "labels.txt", "0\n1\n0\n");
  write_file(dir / "features.csv", "f0,f1\n1.5,0\n-2.25,1\n0,0.125\n");
}

TEST(LoadBundle, HandWrittenThreeNodeBundle) {
  fs::path dir = fresh_dir("three");
  write_three_node_bundle(dir);
  DatasetBundle b = load_bundle(dir);
  EXPECT_EQ(b.manifest.name, "threenode");
  EXPECT_EQ(b.graph.num_nodes(), 3);
  EXPECT_EQ(b.graph.num_pairs(), 2);
  EXPECT_EQ(b.graph.num_classes(), 2);
  EXPECT_EQ(b.labels(), (std::vector<int>{0, 1, 0}));
  EXPECT_DOUBLE_EQ(b.features(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(b.features(1, 0), -2.25);
  EXPECT_DOUBLE_EQ(b.features(2, 1), 0.125);
}

TEST(LoadBundle, RoundTripIsIdentity) {
  DatasetBundle original = make_citation_bundle(tiny_fixture_config());
  fs::path dir = fresh_dir("roundtrip");
  save_bundle(original, dir);
  DatasetBundle loaded = load_bundle(dir);
  EXPECT_EQ(loaded.graph, original.graph);
  EXPECT_EQ(loaded.features, original.features);
  EXPECT_EQ(loaded.manifest, original.manifest);

  // a second save produces byte-identical files
  fs::path dir2 = fresh_dir("roundtrip2");
  save_bundle(loaded, dir2);
  for (const char* file : {"manifest.json", "edges.tsv", "labels.txt", "features.csv"})
    EXPECT_EQ(read_file(dir / file), read_file(dir2 / file)) << file;
}

TEST(LoadBundle, EdgeOrderDoesNotMatter) {
  fs::path dir = fresh_dir("order_a");
  write_three_node_bundle(dir);
  DatasetBundle a = load_bundle(dir);
  write_file(dir / "edges.tsv", "i\tj\n1\t2\n0\t1\n");
  DatasetBundle b = load_bundle(dir);
  EXPECT_EQ(a.graph, b.graph);
}

TEST(LoadBundle, MalformedLinesReportLineNumbers) {
  fs::path dir = fresh_dir("badlines");
  write_three_node_bundle(dir);

  write_file(dir / "edges.tsv", "i\tj\n0\t1\n1\tx\n");
  try {
    load_bundle(dir);
    FAIL() << "expected parse error";
  } catch (const std::runtime_error& err) {
    EXPECT_NE(std::string(err.what()).find("edges.tsv:3"), std::string::npos) << err.what();
  }

  write_file(dir / "edges.tsv", "i\tj\n0\t1\n2\t1\n");  // i >= j
  EXPECT_THROW(load_bundle(dir), std::runtime_error);

  write_file(dir / "edges.tsv", "0\t1\n1\t2\n");  // missing header
  EXPECT_THROW(load_bundle(dir), std::runtime_error);

  write_three_node_bundle(dir);
  write_file(dir / "labels.txt", "0\nq\n0\n");
  try {
    load_bundle(dir);
    FAIL() << "expected parse error";
  } catch (const std::runtime_error& err) {
    EXPECT_NE(std::string(err.what()).find("labels.txt:2"), std::string::npos) << err.what();
  }

  write_three_node_bundle(dir);
  write_file(dir / "features.csv", "f0,f1\n1.5,0\n-2.25\n0,0.125\n");  // short row
  try {
    load_bundle(dir);
    FAIL() << "expected parse error";
  } catch (const std::runtime_error& err) {
    EXPECT_NE(std::string(err.what()).find("features.csv:3"), std::string::npos) << err.what();
  }
}

TEST(LoadBundle, ManifestMismatchesAreRejected) {
  fs::path dir = fresh_dir("mismatch");
  write_three_node_bundle(dir);
  write_file(dir / "manifest.json", R"({"name":"threenode","n":3,"m_pairs":5,"F":2,"C":2})");
  EXPECT_THROW(load_bundle(dir), std::runtime_error);

  write_three_node_bundle(dir);
  write_file(dir / "manifest.json", R"({"name":"threenode","n":4,"m_pairs":2,"F":2,"C":2})");
  EXPECT_THROW(load_bundle(dir), std::runtime_error);

  write_three_node_bundle(dir);
  write_file(dir / "manifest.json", R"({"name":"threenode","n":3,"m_pairs":2,"F":2,"C":5})");
  EXPECT_THROW(load_bundle(dir), std::runtime_error);  // classes 2..4 have no nodes

  write_three_node_bundle(dir);
  write_file(dir / "manifest.json", R"({"name":"threenode","n":3,"m_pairs":2,"F":2})");
  EXPECT_THROW(load_bundle(dir), std::runtime_error);  // missing C
}

TEST(LoadBundle, DuplicateAndSelfEdgesAreRejected) {
  fs::path dir = fresh_dir("dupes");
  write_three_node_bundle(dir);
  write_file(dir / "edges.tsv", "i\tj\n0\t1\n0\t1\n");
  EXPECT_THROW(load_bundle(dir), std::invalid_argument);
  write_file(dir / "edges.tsv", "i\tj\n0\t0\n1\t2\n");
  EXPECT_THROW(load_bundle(dir), std::runtime_error);  // i < j check fires first
}

TEST(SaveBundle, RejectsEmptyFeatureDimension) {
  DatasetBundle bundle = make_citation_bundle(tiny_fixture_config());
  bundle.features = Matrix(bundle.graph.num_nodes(), 0);
  bundle.manifest.features = 0;
  EXPECT_THROW(save_bundle(bundle, fresh_dir("f0")), std::domain_error);
}

TEST(SaveBundle, LineCountsMatchManifest) {
  DatasetBundle bundle = make_citation_bundle(tiny_fixture_config());
  fs::path dir = fresh_dir("counts");
  save_bundle(bundle, dir);
  EXPECT_EQ(count_lines(dir / "edges.tsv"), bundle.manifest.m_pairs + 1);
  EXPECT_EQ(count_lines(dir / "features.csv"), bundle.manifest.n + 1);
  EXPECT_EQ(count_lines(dir / "labels.txt"), bundle.manifest.n);
}

TEST(Table1, PublishedRowsAreAvailable) {
  EXPECT_EQ(table1().size(), 6u);
  const Table1Row& pubmed = table1_row("pubmed");
  EXPECT_EQ(pubmed.n, 19717);
  EXPECT_EQ(pubmed.features, 500);
  EXPECT_EQ(pubmed.classes, 3);
  const Table1Row& squirrel = table1_row("squirrel");
  EXPECT_EQ(squirrel.n, 5201);
  EXPECT_EQ(squirrel.edges_directed, 211872);
  EXPECT_EQ(squirrel.classes, 5);
  const Table1Row& citeseer = table1_row("citeseer");
  EXPECT_EQ(citeseer.n, 3327);
  EXPECT_EQ(citeseer.features, 3703);
  EXPECT_EQ(citeseer.classes, 6);
  EXPECT_THROW(table1_row("reddit"), std::invalid_argument);
}

TEST(ValidateStats, CitationStandInMatchesPublishedCoraRow) {
  DatasetBundle bundle = make_citation_bundle(cora_like_config());
  EXPECT_EQ(bundle.graph.num_nodes(), 2708);
  EXPECT_EQ(bundle.features.cols(), 1433);
  EXPECT_EQ(bundle.graph.num_classes(), 7);
  StatsReport report = validate_stats(bundle, table1_row("cora"));
  EXPECT_TRUE(report.n_ok);
  EXPECT_TRUE(report.features_ok);
  EXPECT_TRUE(report.classes_ok);
  EXPECT_TRUE(report.edges_ok);
  EXPECT_TRUE(report.all_ok());
  EXPECT_EQ(report.observed_directed_edges, 10558);
}

TEST(ValidateStats, BundleMatchesItsOwnStatistics) {
  DatasetBundle bundle = make_citation_bundle(tiny_fixture_config());
  Table1Row self{"tiny", bundle.graph.num_nodes(), 2 * bundle.graph.num_pairs(),
                 bundle.features.cols(), bundle.graph.num_classes()};
  EXPECT_TRUE(validate_stats(bundle, self).all_ok());
}

TEST(ValidateStats, MismatchesAreFlaggedNotThrown) {
  DatasetBundle bundle = make_citation_bundle(tiny_fixture_config());
  StatsReport report = validate_stats(bundle, table1_row("cora"));
  EXPECT_FALSE(report.n_ok);
  EXPECT_FALSE(report.all_ok());
}

TEST(Fixtures, CommittedTinyBundleLoadsAndMatchesGenerator) {
  fs::path committed = fs::path(FIXTURE_DIR) / "tiny";
  ASSERT_TRUE(fs::is_directory(committed)) << committed;
  DatasetBundle loaded = load_bundle(committed);
  DatasetBundle generated = make_citation_bundle(tiny_fixture_config());
  EXPECT_EQ(loaded.graph, generated.graph);
  EXPECT_EQ(loaded.features, generated.features);
  EXPECT_EQ(loaded.manifest, generated.manifest);
}

TEST(Fixtures, CitationGeneratorIsDeterministicAndHomophilous) {
  CitationConfig cfg = tiny_fixture_config();
  DatasetBundle a = make_citation_bundle(cfg);
  DatasetBundle b = make_citation_bundle(cfg);
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.features, b.features);
  DatasetBundle big = make_citation_bundle(cora_like_config());
  double homophily = global_homophily(big.graph);
  EXPECT_GT(homophily, 0.7);
  EXPECT_LT(homophily, 0.9);
}

TEST(Fixtures, ConfigValidation) {
  CitationConfig cfg = tiny_fixture_config();
  cfg.class_sizes = {8};
  EXPECT_THROW(make_citation_bundle(cfg), std::domain_error);
  cfg = tiny_fixture_config();
  cfg.pairs = 10000;
  EXPECT_THROW(make_citation_bundle(cfg), std::domain_error);
  cfg = tiny_fixture_config();
  cfg.topic_words = 5;  // 3 classes * 5 words > 12-word vocabulary
  EXPECT_THROW(make_citation_bundle(cfg), std::domain_error);
  cfg = tiny_fixture_config();
  cfg.topic_prob = 1.5;
  EXPECT_THROW(make_citation_bundle(cfg), std::domain_error);
}

}  // namespace
