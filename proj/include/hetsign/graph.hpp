#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetsign/matrix.hpp"
#include "hetsign/rng.hpp"

namespace hetsign {

// Edge-weighting regime for message passing:
//   vanilla      - every edge keeps its positive normalized weight
//   signed_edges - cross-class edges flip to negative weight (subject to the
//                  error rate), same-class edges stay positive
//   zero_weight  - cross-class edges are dropped (subject to the error rate),
//                  same-class edges are kept
enum class Regime { vanilla, signed_edges, zero_weight };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::vanilla: return "vanilla";
    case Regime::signed_edges: return "signed";
    case Regime::zero_weight: return "zero";
  }
  throw std::domain_error("to_string: bad regime");
}

inline Regime regime_from_string(const std::string& s) {
  if (s == "vanilla") return Regime::vanilla;
  if (s == "signed") return Regime::signed_edges;
  if (s == "zero") return Regime::zero_weight;
  throw std::domain_error("regime_from_string: unknown regime '" + s + "'");
}

// Simple graph with optional node labels.  Undirected graphs are stored as a
// canonical sorted pair list plus a symmetric adjacency; directed graphs keep
// only out-neighbour lists.  Neighbour lists are always sorted, so equal
// graphs compare equal regardless of construction order.
class Graph {
 public:
  Graph() = default;

  static Graph undirected(int n, std::vector<std::pair<int, int>> pairs,
                          std::vector<int> labels = {}, int num_classes = 0) {
    Graph g;
    g.n_ = n;
    g.directed_ = false;
    for (auto& [a, b] : pairs) {
      if (a == b) throw std::invalid_argument("Graph: self-loop at node " + std::to_string(a));
      check_node(a, n);
      check_node(b, n);
      if (a > b) std::swap(a, b);
    }
    std::sort(pairs.begin(), pairs.end());
    if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end())
      throw std::invalid_argument("Graph: duplicate pair");
    g.adj_.resize(n);
    for (auto [a, b] : pairs) {
      g.adj_[a].push_back(b);
      g.adj_[b].push_back(a);
    }
    for (auto& nb : g.adj_) std::sort(nb.begin(), nb.end());
    g.pairs_ = std::move(pairs);
    g.set_labels(std::move(labels), num_classes);
    return g;
  }

  static Graph directed(int n, std::vector<std::vector<int>> out_neighbors,
                        std::vector<int> labels = {}, int num_classes = 0) {
    if (out_neighbors.size() != static_cast<size_t>(n))
      throw std::invalid_argument("Graph: neighbour list count != n");
    Graph g;
    g.n_ = n;
    g.directed_ = true;
    g.adj_ = std::move(out_neighbors);
    for (int i = 0; i < n; ++i) {
      auto& nb = g.adj_[i];
      std::sort(nb.begin(), nb.end());
      if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
        throw std::invalid_argument("Graph: duplicate arc from node " + std::to_string(i));
      for (int j : nb) {
        if (j == i) throw std::invalid_argument("Graph: self-loop at node " + std::to_string(i));
        check_node(j, n);
      }
    }
    g.set_labels(std::move(labels), num_classes);
    return g;
  }

  int num_nodes() const { return n_; }
  bool is_directed() const { return directed_; }
  int num_pairs() const { return static_cast<int>(pairs_.size()); }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  const std::vector<int>& neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }

  bool has_labels() const { return !labels_.empty(); }
  int label(int i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  int num_classes() const { return num_classes_; }

  bool operator==(const Graph&) const = default;

 private:
  static void check_node(int v, int n) {
    if (v < 0 || v >= n)
      throw std::invalid_argument("Graph: node " + std::to_string(v) + " out of range");
  }

  void set_labels(std::vector<int> labels, int num_classes) {
    if (labels.empty()) {
      num_classes_ = 0;
      return;
    }
    if (labels.size() != static_cast<size_t>(n_))
      throw std::invalid_argument("Graph: label count != n");
    int max_label = *std::max_element(labels.begin(), labels.end());
    int min_label = *std::min_element(labels.begin(), labels.end());
    if (min_label < 0) throw std::invalid_argument("Graph: negative label");
    if (num_classes == 0) num_classes = max_label + 1;
    if (max_label >= num_classes)
      throw std::invalid_argument("Graph: label " + std::to_string(max_label) +
                                  " >= class count " + std::to_string(num_classes));
    labels_ = std::move(labels);
    num_classes_ = num_classes;
  }

  int n_ = 0;
  bool directed_ = false;
  int num_classes_ = 0;
  std::vector<std::pair<int, int>> pairs_;   // undirected graphs only, i < j
  std::vector<std::vector<int>> adj_;        // sorted neighbour lists
  std::vector<int> labels_;
};

// Fraction of edge endpoints that join same-class nodes.  Counting over
// adjacency entries covers both orientations of an undirected pair, which
// leaves the fraction unchanged, so one loop serves both graph kinds.
inline double global_homophily(const Graph& g) {
  if (!g.has_labels()) throw std::domain_error("global_homophily: graph has no labels");
  long long same = 0, total = 0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    for (int j : g.neighbors(i)) {
      ++total;
      if (g.label(i) == g.label(j)) ++same;
    }
  }
  if (total == 0) throw std::domain_error("global_homophily: graph has no edges");
  return static_cast<double>(same) / static_cast<double>(total);
}

// Same-class fraction of one node's neighbourhood; isolated nodes have no
// defined value.
inline double local_homophily(const Graph& g, int node) {
  if (!g.has_labels()) throw std::domain_error("local_homophily: graph has no labels");
  if (node < 0 || node >= g.num_nodes())
    throw std::invalid_argument("local_homophily: node out of range");
  const auto& nb = g.neighbors(node);
  if (nb.empty()) throw std::domain_error("local_homophily: isolated node");
  int same = 0;
  for (int j : nb)
    if (g.label(node) == g.label(j)) ++same;
  return static_cast<double>(same) / static_cast<double>(nb.size());
}

struct HomophilyReport {
  double global = 0.0;
  std::vector<double> local;       // per node with degree > 0; NaN for isolated nodes
  double local_mean = 0.0;         // mean over non-isolated nodes
  int isolated = 0;
};

inline HomophilyReport homophily_report(const Graph& g) {
  HomophilyReport rep;
  rep.global = global_homophily(g);
  rep.local.resize(g.num_nodes());
  double sum = 0.0;
  int counted = 0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (g.degree(i) == 0) {
      rep.local[i] = std::nan("");
      ++rep.isolated;
      continue;
    }
    rep.local[i] = local_homophily(g, i);
    sum += rep.local[i];
    ++counted;
  }
  rep.local_mean = counted > 0 ? sum / counted : std::nan("");
  return rep;
}

// Symmetric-normalized propagation operator with self-loops.  Row i holds
// 1/(d_i+1) on the diagonal and +/-1/sqrt((d_i+1)(d_j+1)) (or zero) for each
// neighbour j, with the sign/drop decided per the regime.
class PropagationMatrix {
 public:
  PropagationMatrix(Regime regime, double error_rate, CsrMatrix weights)
      : regime_(regime), error_rate_(error_rate), weights_(std::move(weights)) {}

  int num_nodes() const { return weights_.rows(); }
  Regime regime() const { return regime_; }
  double error_rate() const { return error_rate_; }
  const CsrMatrix& weights() const { return weights_; }
  double weight(int i, int j) const { return weights_.at(i, j); }

 private:
  Regime regime_;
  double error_rate_;
  CsrMatrix weights_;
};

// Builds the propagation operator for one regime.  The error rate e corrupts
// each keep/flip decision independently: with probability e a cross-class
// edge is treated as same-class and vice versa.  Undirected graphs draw one
// decision per pair (both orientations agree); directed graphs draw one per
// arc.  With a fixed seed the uniform draw for each decision unit is the same
// across regimes and error rates, so e=0 and e=1 produce exactly opposite
// decisions.
inline PropagationMatrix build_propagation_matrix(const Graph& g, Regime regime,
                                                  double error_rate, uint64_t seed) {
  if (error_rate < 0.0 || error_rate > 1.0)
    throw std::domain_error("build_propagation_matrix: error rate outside [0, 1]");
  if (regime != Regime::vanilla && !g.has_labels())
    throw std::domain_error("build_propagation_matrix: regime needs labels");

  int n = g.num_nodes();
  std::vector<double> inv_diag(n);
  for (int i = 0; i < n; ++i) inv_diag[i] = 1.0 / (g.degree(i) + 1.0);
  auto off_magnitude = [&](int i, int j) {
    return 1.0 / std::sqrt((g.degree(i) + 1.0) * (g.degree(j) + 1.0));
  };

  // factor(i, j): +1 keep positive, -1 flip sign, 0 drop.
  auto decide = [&](int i, int j, bool error) -> double {
    if (regime == Regime::vanilla) return 1.0;
    bool cross = g.label(i) != g.label(j);
    if (regime == Regime::signed_edges) return (cross != error) ? -1.0 : 1.0;
    return (cross != error) ? 0.0 : 1.0;  // zero_weight
  };

  // One decision per unit, in canonical order.  For undirected graphs the
  // unit is the pair; factors get looked up when rows are assembled.
  Rng rng(mix64(seed, 0));
  std::vector<double> pair_factor;
  std::vector<std::vector<double>> arc_factor;
  if (!g.is_directed()) {
    pair_factor.reserve(g.pairs().size());
    for (auto [a, b] : g.pairs()) {
      bool error = rng.bernoulli(error_rate);
      pair_factor.push_back(decide(a, b, error));
    }
  } else {
    arc_factor.resize(n);
    for (int i = 0; i < n; ++i) {
      arc_factor[i].reserve(g.neighbors(i).size());
      for (int j : g.neighbors(i)) {
        bool error = rng.bernoulli(error_rate);
        arc_factor[i].push_back(decide(i, j, error));
      }
    }
  }

  auto factor_of = [&](int i, int k, int j) -> double {
    if (g.is_directed()) return arc_factor[i][k];
    auto [a, b] = std::minmax(i, j);
    const auto& pairs = g.pairs();
    auto it = std::lower_bound(pairs.begin(), pairs.end(), std::make_pair(a, b));
    return pair_factor[it - pairs.begin()];
  };

  std::vector<int> row_ptr(n + 1, 0);
  std::vector<int> col;
  std::vector<double> val;
  for (int i = 0; i < n; ++i) {
    const auto& nb = g.neighbors(i);
    bool diag_done = false;
    for (int k = 0; k < static_cast<int>(nb.size()); ++k) {
      int j = nb[k];
      if (!diag_done && j > i) {
        col.push_back(i);
        val.push_back(inv_diag[i]);
        diag_done = true;
      }
      double f = factor_of(i, k, j);
      if (f != 0.0) {
        col.push_back(j);
        val.push_back(f * off_magnitude(i, j));
      }
    }
    if (!diag_done) {
      col.push_back(i);
      val.push_back(inv_diag[i]);
    }
    row_ptr[i + 1] = static_cast<int>(col.size());
  }
  return PropagationMatrix(regime, error_rate,
                           CsrMatrix(n, n, std::move(row_ptr), std::move(col), std::move(val)));
}

}  // namespace hetsign
