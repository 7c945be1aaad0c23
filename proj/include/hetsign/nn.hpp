#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetsign/graph.hpp"
#include "hetsign/matrix.hpp"
#include "hetsign/rng.hpp"
#include "hetsign/uncertainty.hpp"

namespace hetsign {

inline constexpr uint64_t kInitStream = 0x696E6974;     // "init"
inline constexpr uint64_t kDropoutStream = 0x64726F70;  // "drop"
inline constexpr uint64_t kSplitStream = 0x73706C69;    // "spli"

// Two-layer graph convolution: logits = P * relu(P * X * W0) * W1, with
// dropout after the activation during training.
struct GcnParams {
  Matrix w0;  // F x H
  Matrix w1;  // H x C
};

struct TrainConfig {
  int hidden = 64;
  double eta = 1e-3;
  double weight_decay = 5e-4;
  double lambda = 0.0;  // calibration loss weight
  double dropout = 0.5;
  int epochs = 200;
  uint64_t seed = 0;

  void validate() const {
    if (hidden < 1) throw std::domain_error("TrainConfig: hidden must be >= 1");
    if (eta <= 0.0) throw std::domain_error("TrainConfig: eta must be positive");
    if (weight_decay < 0.0) throw std::domain_error("TrainConfig: negative weight decay");
    if (lambda < 0.0 || lambda > 1.0)
      throw std::domain_error("TrainConfig: lambda outside [0, 1]");
    if (dropout < 0.0 || dropout >= 1.0)
      throw std::domain_error("TrainConfig: dropout outside [0, 1)");
    if (epochs < 1) throw std::domain_error("TrainConfig: epochs must be >= 1");
  }
};

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Per-class balanced split: `per_class` shuffled training nodes from every
// class, then the shuffled remainder halved into validation and test, with
// the odd node going to test.
inline Split make_split(std::span<const int> labels, int per_class, uint64_t seed) {
  if (per_class < 1) throw std::domain_error("make_split: per_class must be >= 1");
  int num_classes = 0;
  for (int y : labels) num_classes = std::max(num_classes, y + 1);
  std::vector<std::vector<int>> by_class(num_classes);
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));

  Rng rng(mix64(seed, kSplitStream));
  Split split;
  std::vector<int> rest;
  for (int c = 0; c < num_classes; ++c) {
    auto& members = by_class[c];
    if (static_cast<int>(members.size()) < per_class)
      throw std::domain_error("make_split: class " + std::to_string(c) + " has only " +
                              std::to_string(members.size()) + " nodes");
    rng.shuffle(members);
    split.train.insert(split.train.end(), members.begin(), members.begin() + per_class);
    rest.insert(rest.end(), members.begin() + per_class, members.end());
  }
  std::sort(rest.begin(), rest.end());
  rng.shuffle(rest);
  size_t val_count = rest.size() / 2;  // odd remainder goes to test
  split.val.assign(rest.begin(), rest.begin() + val_count);
  split.test.assign(rest.begin() + val_count, rest.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

inline Matrix glorot_init(int rows, int cols, Rng& rng) {
  double limit = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data()) v = limit * (2.0 * rng.uniform() - 1.0);
  return m;
}

inline GcnParams init_params(int features, int hidden, int classes, uint64_t seed) {
  Rng rng(mix64(seed, kInitStream));
  GcnParams p;
  p.w0 = glorot_init(features, hidden, rng);
  p.w1 = glorot_init(hidden, classes, rng);
  return p;
}

// Everything the backward pass needs from one forward evaluation.
struct ForwardCache {
  Matrix z0;         // P X W0, pre-activation
  Matrix h1;         // relu(z0) with dropout applied
  Matrix m;          // P h1
  Matrix logits;     // m W1
  Matrix log_probs;  // row-wise log-softmax
  Matrix probs;
  std::vector<uint8_t> drop_mask;  // empty when dropout is off
  double drop_scale = 1.0;
};

inline void log_softmax_rows(const Matrix& logits, Matrix& log_probs, Matrix& probs) {
  log_probs = Matrix(logits.rows(), logits.cols());
  probs = Matrix(logits.rows(), logits.cols());
  for (int i = 0; i < logits.rows(); ++i) {
    const double* z = logits.row(i);
    double zmax = z[0];
    for (int j = 1; j < logits.cols(); ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (int j = 0; j < logits.cols(); ++j) sum += std::exp(z[j] - zmax);
    double lse = std::log(sum);
    for (int j = 0; j < logits.cols(); ++j) {
      log_probs(i, j) = z[j] - zmax - lse;
      probs(i, j) = std::exp(log_probs(i, j));
    }
  }
}

// Forward pass.  dropout_rng must be non-null iff dropout_rate > 0; with
// dropout active each hidden unit is kept with probability 1 - rate and
// scaled by 1/(1 - rate).
inline ForwardCache gcn_forward(const CsrMatrix& x, const PropagationMatrix& p,
                                const GcnParams& params, double dropout_rate = 0.0,
                                Rng* dropout_rng = nullptr) {
  if (x.rows() != p.num_nodes())
    throw std::invalid_argument("gcn_forward: feature rows != node count");
  if (x.cols() != params.w0.rows())
    throw std::invalid_argument("gcn_forward: feature columns != W0 rows");
  if (params.w0.cols() != params.w1.rows())
    throw std::invalid_argument("gcn_forward: W0/W1 inner dimension mismatch");
  if ((dropout_rate > 0.0) != (dropout_rng != nullptr))
    throw std::invalid_argument("gcn_forward: dropout rate and rng must go together");

  ForwardCache cache;
  Matrix xw0 = x.multiply(params.w0);
  cache.z0 = p.weights().multiply(xw0);
  cache.h1 = cache.z0;
  for (double& v : cache.h1.data()) v = std::max(0.0, v);
  if (dropout_rate > 0.0) {
    cache.drop_scale = 1.0 / (1.0 - dropout_rate);
    cache.drop_mask.resize(cache.h1.data().size());
    for (size_t i = 0; i < cache.drop_mask.size(); ++i) {
      cache.drop_mask[i] = dropout_rng->bernoulli(1.0 - dropout_rate) ? 1 : 0;
      cache.h1.data()[i] = cache.drop_mask[i] ? cache.h1.data()[i] * cache.drop_scale : 0.0;
    }
  }
  cache.m = p.weights().multiply(cache.h1);
  cache.logits = matmul(cache.m, params.w1);
  if (!cache.logits.all_finite())
    throw std::runtime_error("gcn_forward: non-finite logits");
  log_softmax_rows(cache.logits, cache.log_probs, cache.probs);
  return cache;
}

// Probability rows with dropout off; the usual inference entry point.
inline Matrix predict_probs(const CsrMatrix& x, const PropagationMatrix& p,
                            const GcnParams& params) {
  return gcn_forward(x, p, params).probs;
}

inline void check_node_set(std::span<const int> nodes, int n, const char* where) {
  if (nodes.empty()) throw std::domain_error(std::string(where) + ": empty node set");
  for (int i : nodes)
    if (i < 0 || i >= n)
      throw std::invalid_argument(std::string(where) + ": node index out of range");
}

// Mean negative log-likelihood of the true class over the node set.
inline double nll_loss(const Matrix& log_probs, std::span<const int> labels,
                       std::span<const int> nodes) {
  check_node_set(nodes, log_probs.rows(), "nll_loss");
  double sum = 0.0;
  for (int i : nodes) sum -= log_probs(i, labels[i]);
  return sum / static_cast<double>(nodes.size());
}

// Confidence-margin penalty: mean over the node set of (second-largest
// probability - largest probability).  Always in [-1, 0]; minimized by
// confident predictions.  Reads probabilities only, never labels.
inline double calib_loss(const Matrix& probs, std::span<const int> nodes) {
  if (probs.cols() < 2) throw std::domain_error("calib_loss: need at least 2 classes");
  check_node_set(nodes, probs.rows(), "calib_loss");
  double sum = 0.0;
  for (int i : nodes) {
    const double* p = probs.row(i);
    double top = -1.0, second = -1.0;
    for (int j = 0; j < probs.cols(); ++j) {
      if (p[j] > top) {
        second = top;
        top = p[j];
      } else if (p[j] > second) {
        second = p[j];
      }
    }
    sum += second - top;
  }
  return sum / static_cast<double>(nodes.size());
}

inline double total_loss(const ForwardCache& cache, std::span<const int> labels,
                         const Split& split, std::span<const int> eval_nodes, double lambda) {
  double loss = nll_loss(cache.log_probs, labels, split.train);
  if (lambda > 0.0) loss += lambda * calib_loss(cache.probs, eval_nodes);
  return loss;
}

struct Gradients {
  Matrix dw0;
  Matrix dw1;
};

// Gradient of the mean training NLL with respect to the logits, written via
// the explicit log-softmax Jacobian.  For the true class this lands on
// (probability - 1) / |train set|.
inline Matrix nll_logit_gradient(const Matrix& probs, std::span<const int> labels,
                                 std::span<const int> nodes) {
  check_node_set(nodes, probs.rows(), "nll_logit_gradient");
  Matrix dlogits(probs.rows(), probs.cols());
  double inv = 1.0 / static_cast<double>(nodes.size());
  for (int i : nodes) {
    // d(log p_y)/d z_j = delta_{jy} - p_j, scaled by the -1/|set| loss weight.
    const double* p = probs.row(i);
    double* g = dlogits.row(i);
    int y = labels[i];
    for (int j = 0; j < probs.cols(); ++j) g[j] += inv * p[j];
    g[y] -= inv;
  }
  return dlogits;
}

// Adds the margin-penalty gradient: d/dz of lambda * mean(second - top),
// pushed through the softmax Jacobian row by row.  Ties between top and
// second are split by first-index order, a fixed subgradient choice.
inline void add_calib_logit_gradient(Matrix& dlogits, const Matrix& probs,
                                     std::span<const int> nodes, double lambda) {
  check_node_set(nodes, probs.rows(), "add_calib_logit_gradient");
  double w = lambda / static_cast<double>(nodes.size());
  int c = probs.cols();
  for (int i : nodes) {
    const double* p = probs.row(i);
    int top = 0;
    for (int j = 1; j < c; ++j)
      if (p[j] > p[top]) top = j;
    int second = top == 0 ? 1 : 0;
    for (int j = 0; j < c; ++j)
      if (j != top && p[j] > p[second]) second = j;
    // An exact top/second tie splits the subgradient evenly, where the -w
    // and +w shares cancel; skip the row.
    if (p[top] == p[second]) continue;
    // dprobs has -w at top, +w at second; softmax Jacobian gives
    // dz_j = p_j * (q_j - sum_k q_k p_k) for dprobs vector q.
    double qdotp = w * (p[second] - p[top]);
    double* g = dlogits.row(i);
    for (int j = 0; j < c; ++j) {
      double q = j == second ? w : (j == top ? -w : 0.0);
      g[j] += p[j] * (q - qdotp);
    }
  }
}

// Exact gradients of total_loss with respect to both weight matrices.  The
// cache must come from a forward pass of `params` on (x, p).
inline Gradients backward(const CsrMatrix& x, const PropagationMatrix& p,
                          const GcnParams& params, const ForwardCache& cache,
                          std::span<const int> labels, const Split& split,
                          std::span<const int> eval_nodes, double lambda) {
  Matrix dlogits = nll_logit_gradient(cache.probs, labels, split.train);
  if (lambda > 0.0) add_calib_logit_gradient(dlogits, cache.probs, eval_nodes, lambda);

  Gradients g;
  g.dw1 = matmul_tn(cache.m, dlogits);
  Matrix dm = matmul_nt(dlogits, params.w1);
  Matrix dh1 = p.weights().multiply_transposed(dm);
  if (!cache.drop_mask.empty()) {
    for (size_t i = 0; i < dh1.data().size(); ++i)
      dh1.data()[i] = cache.drop_mask[i] ? dh1.data()[i] * cache.drop_scale : 0.0;
  }
  for (size_t i = 0; i < dh1.data().size(); ++i)
    if (cache.z0.data()[i] <= 0.0) dh1.data()[i] = 0.0;
  Matrix dxw0 = p.weights().multiply_transposed(dh1);
  g.dw0 = x.multiply_transposed(dxw0);
  return g;
}

struct AdamState {
  Matrix m0, v0, m1, v1;
  long long t = 0;

  AdamState() = default;
  AdamState(const GcnParams& params)
      : m0(params.w0.rows(), params.w0.cols()), v0(params.w0.rows(), params.w0.cols()),
        m1(params.w1.rows(), params.w1.cols()), v1(params.w1.rows(), params.w1.cols()) {}
};

// One Adam update with bias correction.  Weight decay enters as a gradient
// addition (g + wd * theta) before the moment updates.
inline void adam_step(AdamState& state, GcnParams& params, const Gradients& grads, double eta,
                      double weight_decay) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++state.t;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  auto update = [&](Matrix& theta, Matrix& m, Matrix& v, const Matrix& grad) {
    for (size_t i = 0; i < theta.data().size(); ++i) {
      double g = grad.data()[i] + weight_decay * theta.data()[i];
      m.data()[i] = beta1 * m.data()[i] + (1.0 - beta1) * g;
      v.data()[i] = beta2 * v.data()[i] + (1.0 - beta2) * g * g;
      double mhat = m.data()[i] / bc1;
      double vhat = v.data()[i] / bc2;
      theta.data()[i] -= eta * mhat / (std::sqrt(vhat) + eps);
    }
  };
  update(params.w0, state.m0, state.v0, grads.dw0);
  update(params.w1, state.m1, state.v1, grads.dw1);
}

inline double accuracy(const Matrix& probs, std::span<const int> labels,
                       std::span<const int> nodes) {
  check_node_set(nodes, probs.rows(), "accuracy");
  int hits = 0;
  for (int i : nodes) {
    const double* p = probs.row(i);
    int best = 0;
    for (int j = 1; j < probs.cols(); ++j)
      if (p[j] > p[best]) best = j;
    if (best == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

struct EpochStats {
  int epoch = 0;
  double nll = 0.0;
  double calib = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  double test_dissonance = 0.0;
};

struct TrainResult {
  GcnParams best_params;
  double best_val_acc = 0.0;
  int best_epoch = 0;
  std::vector<EpochStats> history;
};

// Full training run: each epoch computes the training losses and gradients at
// the current parameters, applies one Adam step, then scores the updated
// parameters on validation and test (dropout off).  The parameters with the
// best validation accuracy seen so far are kept and returned.
inline TrainResult train(const CsrMatrix& x, const PropagationMatrix& p,
                         std::span<const int> labels, const Split& split,
                         const TrainConfig& cfg) {
  cfg.validate();
  check_node_set(split.train, x.rows(), "train");
  if (labels.size() != static_cast<size_t>(x.rows()))
    throw std::invalid_argument("train: label count != node count");
  int num_classes = 0;
  for (int y : labels) {
    if (y < 0) throw std::invalid_argument("train: negative label");
    num_classes = std::max(num_classes, y + 1);
  }

  std::vector<int> eval_nodes;
  eval_nodes.reserve(split.val.size() + split.test.size());
  eval_nodes.insert(eval_nodes.end(), split.val.begin(), split.val.end());
  eval_nodes.insert(eval_nodes.end(), split.test.begin(), split.test.end());
  std::sort(eval_nodes.begin(), eval_nodes.end());
  if (eval_nodes.empty()) throw std::domain_error("train: empty validation and test sets");

  GcnParams params = init_params(x.cols(), cfg.hidden, num_classes, cfg.seed);
  AdamState adam(params);
  Rng dropout_rng(mix64(cfg.seed, kDropoutStream));
  Rng* drop = cfg.dropout > 0.0 ? &dropout_rng : nullptr;

  TrainResult result;
  result.best_params = params;
  result.best_val_acc = 0.0;
  result.history.reserve(cfg.epochs);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    Matrix probs;
    try {
      ForwardCache cache = gcn_forward(x, p, params, cfg.dropout, drop);
      stats.nll = nll_loss(cache.log_probs, labels, split.train);
      stats.calib = calib_loss(cache.probs, eval_nodes);
      if (!std::isfinite(stats.nll) || !std::isfinite(stats.calib))
        throw std::runtime_error("non-finite loss");
      Gradients grads = backward(x, p, params, cache, labels, split, eval_nodes, cfg.lambda);
      adam_step(adam, params, grads, cfg.eta, cfg.weight_decay);
      probs = predict_probs(x, p, params);
    } catch (const std::runtime_error& err) {
      throw std::runtime_error("train: epoch " + std::to_string(epoch) + ": " + err.what());
    }

    if (!split.val.empty()) stats.val_acc = accuracy(probs, labels, split.val);
    if (!split.test.empty()) {
      stats.test_acc = accuracy(probs, labels, split.test);
      stats.test_dissonance = mean_dissonance(probs, split.test);
    }
    result.history.push_back(stats);
    if (stats.val_acc > result.best_val_acc) {
      result.best_val_acc = stats.val_acc;
      result.best_epoch = epoch;
      result.best_params = params;
    }
  }
  return result;
}

inline TrainResult train(const Matrix& features, const PropagationMatrix& p,
                         std::span<const int> labels, const Split& split,
                         const TrainConfig& cfg) {
  return train(CsrMatrix::from_dense(features), p, labels, split, cfg);
}

}  // namespace hetsign
