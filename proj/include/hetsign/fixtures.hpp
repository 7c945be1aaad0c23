#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetsign/data.hpp"
#include "hetsign/graph.hpp"
#include "hetsign/matrix.hpp"
#include "hetsign/rng.hpp"
#include "hetsign/synth.hpp"

namespace hetsign {

// Deterministic citation-style benchmark stand-in: skewed class sizes, a
// degree-skewed homophilous topology, and sparse bag-of-words features where
// each class owns a block of signal words.
struct CitationConfig {
  std::string name = "citation";
  std::vector<int> class_sizes;    // node count per class
  int pairs = 0;                   // undirected pair count, hit exactly
  double intra_fraction = 0.8;     // chance an edge stays within one class
  int features = 64;               // vocabulary size
  int topic_words = 12;            // signal words owned by each class
  int words_per_node = 6;          // word draws per node (duplicates collapse)
  double topic_prob = 0.7;         // chance a draw comes from the class pool
  uint64_t seed = 0;

  int nodes() const { return std::accumulate(class_sizes.begin(), class_sizes.end(), 0); }

  void validate() const {
    if (class_sizes.size() < 2) throw std::domain_error("CitationConfig: need >= 2 classes");
    for (int s : class_sizes)
      if (s < 2) throw std::domain_error("CitationConfig: every class needs >= 2 nodes");
    if (pairs < 1) throw std::domain_error("CitationConfig: need >= 1 pair");
    long long cap = 0;
    for (int s : class_sizes) cap += static_cast<long long>(s) * (s - 1) / 2;
    if (intra_fraction >= 1.0 - 1e-12 && pairs > cap)
      throw std::domain_error("CitationConfig: too many pairs for intra-class-only graph");
    long long n = nodes();
    if (pairs > n * (n - 1) / 2) throw std::domain_error("CitationConfig: too many pairs");
    if (intra_fraction < 0.0 || intra_fraction > 1.0)
      throw std::domain_error("CitationConfig: intra_fraction must lie in [0, 1]");
    if (topic_prob < 0.0 || topic_prob > 1.0)
      throw std::domain_error("CitationConfig: topic_prob must lie in [0, 1]");
    if (features < 2) throw std::domain_error("CitationConfig: need >= 2 words");
    if (topic_words < 1 || words_per_node < 1)
      throw std::domain_error("CitationConfig: need positive word counts");
    int classes = static_cast<int>(class_sizes.size());
    if (static_cast<long long>(topic_words) * classes > features)
      throw std::domain_error("CitationConfig: class word pools exceed the vocabulary");
  }
};

inline DatasetBundle make_citation_bundle(const CitationConfig& cfg) {
  cfg.validate();
  int n = cfg.nodes();
  int classes = static_cast<int>(cfg.class_sizes.size());

  std::vector<int> labels;
  labels.reserve(n);
  std::vector<std::vector<int>> members(classes);
  for (int c = 0; c < classes; ++c) {
    for (int k = 0; k < cfg.class_sizes[c]; ++k) {
      members[c].push_back(static_cast<int>(labels.size()));
      labels.push_back(c);
    }
  }

  // Degree-skewed homophilous topology: endpoints are drawn half uniformly
  // and half from the running endpoint list (rich-get-richer), the partner
  // class keeps intra_fraction of pairs inside the class.
  Rng rng(mix64(cfg.seed, kGraphStream));
  std::set<std::pair<int, int>> chosen;
  std::vector<int> endpoint_pool;
  endpoint_pool.reserve(2 * cfg.pairs);
  long long attempts = 0, max_attempts = 400LL * cfg.pairs + 10000;
  while (static_cast<int>(chosen.size()) < cfg.pairs) {
    if (++attempts > max_attempts)
      throw std::runtime_error("make_citation_bundle: edge sampling stalled; config too dense");
    int u;
    if (!endpoint_pool.empty() && rng.bernoulli(0.5))
      u = endpoint_pool[rng.uniform_int(static_cast<int>(endpoint_pool.size()))];
    else
      u = rng.uniform_int(n);
    int target_class;
    if (rng.bernoulli(cfg.intra_fraction)) {
      target_class = labels[u];
    } else {
      target_class = rng.uniform_int(classes - 1);
      if (target_class >= labels[u]) ++target_class;
    }
    const auto& pool = members[target_class];
    int v = pool[rng.uniform_int(static_cast<int>(pool.size()))];
    if (u == v) continue;
    auto pair = std::minmax(u, v);
    if (!chosen.insert({pair.first, pair.second}).second) continue;
    endpoint_pool.push_back(u);
    endpoint_pool.push_back(v);
  }
  std::vector<std::pair<int, int>> pairs(chosen.begin(), chosen.end());

  // Sparse binary word features: each class owns an evenly spaced block of
  // topic words; off-topic draws land anywhere in the vocabulary.
  Rng feat_rng(mix64(cfg.seed, kFeatureStream));
  int stride = cfg.features / classes;
  Matrix features(n, cfg.features);
  for (int i = 0; i < n; ++i) {
    int base = labels[i] * stride;
    for (int w = 0; w < cfg.words_per_node; ++w) {
      int word;
      if (feat_rng.bernoulli(cfg.topic_prob))
        word = base + feat_rng.uniform_int(cfg.topic_words);
      else
        word = feat_rng.uniform_int(cfg.features);
      features(i, word) = 1.0;
    }
  }

  DatasetBundle bundle;
  bundle.graph = Graph::undirected(n, std::move(pairs), std::move(labels), classes);
  bundle.features = std::move(features);
  bundle.manifest =
      Manifest{cfg.name, n, cfg.pairs, cfg.features, classes};
  return bundle;
}

// Stand-in with the published Cora statistics: 2708 nodes, 5279 stored pairs
// (10558 directed edges), 1433 words, 7 classes, homophilous structure.
inline CitationConfig cora_like_config(uint64_t seed = 0) {
  CitationConfig cfg;
  cfg.name = "cora";
  cfg.class_sizes = {818, 426, 418, 351, 298, 217, 180};
  cfg.pairs = 5279;
  cfg.intra_fraction = 0.81;
  cfg.features = 1433;
  cfg.topic_words = 110;
  cfg.words_per_node = 11;
  cfg.topic_prob = 0.185;
  cfg.seed = seed;
  return cfg;
}

// Small committed fixture used by loader tests and the quick-start examples.
inline CitationConfig tiny_fixture_config() {
  CitationConfig cfg;
  cfg.name = "tiny";
  cfg.class_sizes = {8, 8, 8};
  cfg.pairs = 30;
  cfg.intra_fraction = 0.75;
  cfg.features = 12;
  cfg.topic_words = 3;
  cfg.words_per_node = 4;
  cfg.topic_prob = 0.8;
  cfg.seed = 7;
  return cfg;
}

}  // namespace hetsign
