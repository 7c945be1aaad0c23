#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetsign/matrix.hpp"

namespace hetsign {

inline void validate_probability(std::span<const double> p, const char* where) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= -1e-12))
      throw std::domain_error(std::string(where) + ": negative probability entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::domain_error(std::string(where) + ": probabilities sum to " + std::to_string(sum));
}

// Shannon entropy normalized by log C, so any distribution over C classes
// scores in [0, 1]: 0 at a one-hot vector, 1 at uniform.
inline double entropy(std::span<const double> p) {
  if (p.size() < 2) throw std::domain_error("entropy: need at least 2 classes");
  validate_probability(p, "entropy");
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h / std::log(static_cast<double>(p.size()));
}

// Balance of two positive masses: 1 when equal, 0 when one vanishes.
inline double balance(double a, double b) { return 1.0 - std::abs(a - b) / (a + b); }

// Dissonance of a distribution: each positive entry's share, weighted by how
// evenly the remaining positive mass balances against it.  Conflicting
// evidence (several comparable entries) scores high; one-hot scores 0.
inline double dissonance(std::span<const double> p) {
  validate_probability(p, "dissonance");
  size_t c = p.size();
  double total = 0.0;
  for (size_t i = 0; i < c; ++i) {
    if (!(p[i] > 0.0)) continue;
    double num = 0.0, den = 0.0;
    for (size_t j = 0; j < c; ++j) {
      if (j == i || !(p[j] > 0.0)) continue;
      num += p[j] * balance(p[j], p[i]);
      den += p[j];
    }
    if (den > 0.0) total += p[i] * num / den;
  }
  return total;
}

// Mean dissonance of the probability rows indexed by `nodes` (all rows when
// `nodes` is empty is not a meaning we give: an explicit nonempty set is
// required).
inline double mean_dissonance(const Matrix& probs, std::span<const int> nodes) {
  if (nodes.empty()) throw std::domain_error("mean_dissonance: empty node set");
  double sum = 0.0;
  for (int i : nodes) {
    if (i < 0 || i >= probs.rows())
      throw std::invalid_argument("mean_dissonance: node index out of range");
    sum += dissonance(std::span<const double>(probs.row(i), probs.cols()));
  }
  return sum / static_cast<double>(nodes.size());
}

// One message-passing caricature step on a single belief vector.  A correctly
// wired neighbourhood (plane) moves mass toward the true class; a sign-flip
// neighbourhood (opposed) moves the same mass away from it.  The step is
// alpha per wrong class and (C-1)*alpha on the true class, which conserves
// total mass.
enum class UpdateMode { plane, opposed };

inline std::vector<double> one_step_update(std::span<const double> p, double alpha,
                                           int true_class, UpdateMode mode) {
  validate_probability(p, "one_step_update");
  int c = static_cast<int>(p.size());
  if (c < 2) throw std::domain_error("one_step_update: need at least 2 classes");
  if (true_class < 0 || true_class >= c)
    throw std::domain_error("one_step_update: true class out of range");
  if (alpha < 0.0) throw std::domain_error("one_step_update: alpha must be nonnegative");
  double dir = mode == UpdateMode::plane ? 1.0 : -1.0;
  std::vector<double> out(p.begin(), p.end());
  out[true_class] += dir * (c - 1) * alpha;
  for (int j = 0; j < c; ++j)
    if (j != true_class) out[j] -= dir * alpha;
  for (double v : out)
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw std::domain_error("one_step_update: step leaves the probability simplex");
  for (double& v : out) v = std::min(1.0, std::max(0.0, v));
  return out;
}

// Entropy gap between the two update modes after each of `steps` steps from a
// common start: entropy(opposed trajectory) - entropy(plane trajectory).
// Both trajectories must stay inside the simplex for the whole horizon.
inline std::vector<double> entropy_gap_trajectory(std::span<const double> p0, double alpha,
                                                  int true_class, int steps) {
  if (steps < 0) throw std::domain_error("entropy_gap_trajectory: negative step count");
  std::vector<double> plane(p0.begin(), p0.end());
  std::vector<double> opposed(p0.begin(), p0.end());
  std::vector<double> gaps;
  gaps.reserve(steps);
  for (int s = 0; s < steps; ++s) {
    plane = one_step_update(plane, alpha, true_class, UpdateMode::plane);
    opposed = one_step_update(opposed, alpha, true_class, UpdateMode::opposed);
    gaps.push_back(entropy(opposed) - entropy(plane));
  }
  return gaps;
}

}  // namespace hetsign
