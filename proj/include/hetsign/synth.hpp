#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetsign/graph.hpp"
#include "hetsign/matrix.hpp"
#include "hetsign/rng.hpp"

namespace hetsign {

// Stream tags so the graph draw and the feature draw never share RNG state.
inline constexpr uint64_t kGraphStream = 0x67726170;    // "grap"
inline constexpr uint64_t kFeatureStream = 0x66656174;  // "feat"

// Configuration of the planted-homophily generator: n nodes in `classes`
// equal blocks, each node picks `degree` out-neighbours, a Binomial(degree,
// homophily) share of them from its own class and the rest uniformly from
// the other classes.  Features are Gaussian around the node's class mean.
struct SynthConfig {
  int nodes = 0;
  int classes = 2;
  double homophily = 0.5;  // expected same-class neighbour fraction
  int degree = 4;          // out-degree of every node
  double mu = 1.0;         // class-mean radius
  double sigma = 0.0;      // feature noise scale before the 1/sqrt(degree) factor
  int dim = 2;             // feature dimension
  uint64_t seed = 0;
  bool symmetrize = false;  // fold arcs into undirected pairs

  void validate() const {
    if (classes < 2) throw std::domain_error("SynthConfig: need at least 2 classes");
    if (nodes <= 0 || nodes % classes != 0)
      throw std::domain_error("SynthConfig: nodes must be a positive multiple of classes");
    if (homophily < 0.0 || homophily > 1.0)
      throw std::domain_error("SynthConfig: homophily outside [0, 1]");
    if (degree < 1) throw std::domain_error("SynthConfig: degree must be >= 1");
    if (mu <= 0.0) throw std::domain_error("SynthConfig: mu must be positive");
    if (sigma < 0.0) throw std::domain_error("SynthConfig: sigma must be nonnegative");
    if (dim < 2) throw std::domain_error("SynthConfig: dim must be >= 2");
    int per = nodes / classes;
    // Enough distinct candidates for the largest possible same/cross splits.
    if (homophily > 0.0 && per - 1 < degree)
      throw std::domain_error("SynthConfig: class too small for same-class degree");
    if (homophily < 1.0 && nodes - per < degree)
      throw std::domain_error("SynthConfig: other classes too small for cross-class degree");
  }
};

// Deterministic orthonormal basis of R^dim (Gram-Schmidt over seeded
// Gaussian vectors, falling back to fresh draws on near-degeneracy).
inline std::vector<std::vector<double>> orthonormal_basis(int dim, uint64_t seed) {
  Rng rng(mix64(seed, 0x6F727468));  // "orth"
  std::vector<std::vector<double>> basis;
  while (static_cast<int>(basis.size()) < dim) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.normal();
    for (const auto& u : basis) {
      double dot = 0.0;
      for (int i = 0; i < dim; ++i) dot += v[i] * u[i];
      for (int i = 0; i < dim; ++i) v[i] -= dot * u[i];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;  // essentially never for Gaussian draws
    for (double& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  return basis;
}

// Class mean of class j out of C: the j-th of C points equally spaced on the
// radius-mu circle, starting at angle 0.  In dimensions above 2 the circle is
// embedded via a seed-fixed orthonormal frame, which preserves all pairwise
// angles and norms.
inline std::vector<double> class_mean(int cls, int classes, double mu, int dim,
                                      uint64_t embed_seed = 0) {
  if (classes < 2) throw std::domain_error("class_mean: need at least 2 classes");
  if (cls < 0 || cls >= classes) throw std::domain_error("class_mean: class index out of range");
  if (mu <= 0.0) throw std::domain_error("class_mean: mu must be positive");
  if (dim < 2) throw std::domain_error("class_mean: dim must be >= 2");
  double angle = 2.0 * M_PI * cls / classes;
  double x = mu * std::cos(angle);
  double y = mu * std::sin(angle);
  if (dim == 2) return {x, y};
  auto basis = orthonormal_basis(dim, embed_seed);
  std::vector<double> out(dim);
  for (int i = 0; i < dim; ++i) out[i] = x * basis[0][i] + y * basis[1][i];
  return out;
}

// All C class means stacked into a C x dim matrix.
inline Matrix class_mean_matrix(int classes, double mu, int dim, uint64_t embed_seed = 0) {
  Matrix m(classes, dim);
  for (int c = 0; c < classes; ++c) {
    auto v = class_mean(c, classes, mu, dim, embed_seed);
    for (int j = 0; j < dim; ++j) m(c, j) = v[j];
  }
  return m;
}

// Draws the planted-homophily graph.  Labels are assigned in blocks (node v
// gets class v / (n/C)); each node then draws s ~ Binomial(degree, homophily)
// distinct same-class neighbours and degree - s distinct cross-class ones,
// uniformly, never itself.  The neighbour lists are directed so every
// realized out-degree is exactly `degree`; pass symmetrize to fold the arcs
// into an undirected graph (degrees then grow past `degree` where arcs do
// not reciprocate).
inline Graph generate_graph(const SynthConfig& cfg) {
  cfg.validate();
  int per = cfg.nodes / cfg.classes;
  std::vector<int> labels(cfg.nodes);
  for (int v = 0; v < cfg.nodes; ++v) labels[v] = v / per;

  Rng rng(mix64(cfg.seed, kGraphStream));
  std::vector<std::vector<int>> adj(cfg.nodes);
  for (int v = 0; v < cfg.nodes; ++v) {
    int base = labels[v] * per;
    int same = rng.binomial(cfg.degree, cfg.homophily);
    auto& out = adj[v];
    out.reserve(cfg.degree);
    auto taken = [&](int u) { return std::find(out.begin(), out.end(), u) != out.end(); };
    for (int t = 0; t < same; ++t) {
      for (;;) {
        int u = base + rng.uniform_int(per);
        if (u != v && !taken(u)) {
          out.push_back(u);
          break;
        }
      }
    }
    for (int t = same; t < cfg.degree; ++t) {
      for (;;) {
        int r = rng.uniform_int(cfg.nodes - per);
        int u = r < base ? r : r + per;  // skip the node's own class block
        if (!taken(u)) {
          out.push_back(u);
          break;
        }
      }
    }
  }

  if (cfg.symmetrize) {
    std::set<std::pair<int, int>> pairs;
    for (int v = 0; v < cfg.nodes; ++v)
      for (int u : adj[v]) pairs.insert(std::minmax(v, u));
    return Graph::undirected(cfg.nodes, {pairs.begin(), pairs.end()}, std::move(labels),
                             cfg.classes);
  }
  return Graph::directed(cfg.nodes, std::move(adj), std::move(labels), cfg.classes);
}

// Per-node features: row i is the class mean of label(i) plus independent
// Gaussian noise with per-coordinate scale sigma / sqrt(d_i) (isolated nodes
// use sigma unscaled).  Uses its own stream of cfg.seed, so graph and
// features are independent draws from the one seed.
inline Matrix generate_features(const Graph& g, const SynthConfig& cfg) {
  if (!g.has_labels()) throw std::domain_error("generate_features: graph has no labels");
  Matrix means = class_mean_matrix(g.num_classes(), cfg.mu, cfg.dim);
  Rng rng(mix64(cfg.seed, kFeatureStream));
  Matrix x(g.num_nodes(), cfg.dim);
  for (int i = 0; i < g.num_nodes(); ++i) {
    double scale = cfg.sigma / std::sqrt(std::max(g.degree(i), 1));
    const double* mean = means.row(g.label(i));
    double* row = x.row(i);
    for (int j = 0; j < cfg.dim; ++j) row[j] = mean[j] + scale * rng.normal();
  }
  return x;
}

}  // namespace hetsign
