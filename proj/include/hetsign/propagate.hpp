#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetsign/graph.hpp"
#include "hetsign/matrix.hpp"

namespace hetsign {

// h <- P^hops h.
inline Matrix propagate(const Matrix& h, const PropagationMatrix& p, int hops = 1) {
  if (hops < 0) throw std::domain_error("propagate: negative hop count");
  if (h.rows() != p.num_nodes())
    throw std::invalid_argument("propagate: feature rows != node count");
  Matrix out = h;
  for (int t = 0; t < hops; ++t) out = p.weights().multiply(out);
  return out;
}

// Effective neighbour count of a node of degree d_i whose neighbours have the
// given degrees: sum over neighbours of sqrt((d_i+1)/(d_j+1)).  Equals d_i on
// a regular graph.
inline double effective_degree(int degree, std::span<const int> neighbor_degrees) {
  if (static_cast<size_t>(degree) != neighbor_degrees.size())
    throw std::invalid_argument("effective_degree: degree != neighbour count");
  double s = 0.0;
  for (int dj : neighbor_degrees) s += std::sqrt((degree + 1.0) / (dj + 1.0));
  return s;
}

inline void check_rate(double x, const char* name, const char* where) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error(std::string(where) + ": " + name + " outside [0, 1]");
}

// Expected one-hop coefficient of the own-class mean for a two-class graph
// whose classes sit at +/-mu: starting from a unit own-class coefficient, one
// propagation step scales it by this factor.  b is the same-class neighbour
// fraction, e the sign/drop error rate, d the degree and dp the effective
// neighbour count.
inline double expected_coeff(Regime regime, double b, double e, int d, double dp) {
  check_rate(b, "homophily", "expected_coeff");
  check_rate(e, "error rate", "expected_coeff");
  if (d < 0) throw std::domain_error("expected_coeff: negative degree");
  switch (regime) {
    case Regime::vanilla:
      return ((2.0 * b - 1.0) * dp + 1.0) / (d + 1.0);
    case Regime::signed_edges:
      return ((1.0 - 2.0 * e) * dp + 1.0) / (d + 1.0);
    case Regime::zero_weight:
      return ((b - e) * dp + 1.0) / (d + 1.0);
  }
  throw std::domain_error("expected_coeff: bad regime");
}

// Expected one-hop node vector when classes are no longer opposite: the
// node's class mean is k, the average cross-class neighbour mean is kp.
// Only the sign-flip and drop regimes are expressed in this (k, kp) form.
inline std::vector<double> expected_vector_multiclass(Regime regime, double b, double e,
                                                      std::span<const double> k,
                                                      std::span<const double> kp, int d,
                                                      double dp) {
  check_rate(b, "homophily", "expected_vector_multiclass");
  check_rate(e, "error rate", "expected_vector_multiclass");
  if (d < 0) throw std::domain_error("expected_vector_multiclass: negative degree");
  if (k.size() != kp.size())
    throw std::invalid_argument("expected_vector_multiclass: dimension mismatch");
  double nk = 0.0, nkp = 0.0;
  for (double v : k) nk += v * v;
  for (double v : kp) nkp += v * v;
  if (nkp > nk * (1.0 + 1e-9))
    throw std::domain_error("expected_vector_multiclass: |kp| exceeds |k|");

  std::vector<double> out(k.size());
  double denom = d + 1.0;
  switch (regime) {
    case Regime::signed_edges:
      for (size_t i = 0; i < k.size(); ++i)
        out[i] = ((1.0 - 2.0 * e) * (b * k[i] + (b - 1.0) * kp[i]) * dp + k[i]) / denom;
      return out;
    case Regime::zero_weight:
      for (size_t i = 0; i < k.size(); ++i)
        out[i] = (((1.0 - e) * b * k[i] + e * (1.0 - b) * kp[i]) * dp + k[i]) / denom;
      return out;
    case Regime::vanilla:
      break;
  }
  throw std::domain_error("expected_vector_multiclass: regime must be signed or zero");
}

// Vanilla expectation in the same general two-mean form: neighbours average
// to b*k + (1-b)*kp regardless of sign bookkeeping.
inline std::vector<double> expected_vector_vanilla(double b, std::span<const double> k,
                                                   std::span<const double> kp, int d, double dp) {
  check_rate(b, "homophily", "expected_vector_vanilla");
  if (d < 0) throw std::domain_error("expected_vector_vanilla: negative degree");
  if (k.size() != kp.size())
    throw std::invalid_argument("expected_vector_vanilla: dimension mismatch");
  std::vector<double> out(k.size());
  for (size_t i = 0; i < k.size(); ++i)
    out[i] = ((b * k[i] + (1.0 - b) * kp[i]) * dp + k[i]) / (d + 1.0);
  return out;
}

// Average cross-class mean seen from any class when the C class means sit
// equally spaced on a circle: the means sum to zero, so the other C-1 average
// to -k/(C-1).
inline std::vector<double> aggregate_cross_mean(std::span<const double> k, int classes) {
  if (classes < 2) throw std::domain_error("aggregate_cross_mean: need at least 2 classes");
  std::vector<double> out(k.size());
  for (size_t i = 0; i < k.size(); ++i) out[i] = -k[i] / (classes - 1.0);
  return out;
}

// Discrimination gap between the sign-flip and drop regimes, two-class case:
// positive means sign-flipping preserves more of the class signal.
inline double z_binary(double e, double b) {
  check_rate(e, "error rate", "z_binary");
  check_rate(b, "homophily", "z_binary");
  return 1.0 - e - b;
}

// The same gap in the general (k, kp) form, componentwise along k and kp.
inline std::vector<double> z_multi(double e, double b, std::span<const double> k,
                                   std::span<const double> kp) {
  check_rate(e, "error rate", "z_multi");
  check_rate(b, "homophily", "z_multi");
  if (k.size() != kp.size()) throw std::invalid_argument("z_multi: dimension mismatch");
  std::vector<double> out(k.size());
  for (size_t i = 0; i < k.size(); ++i)
    out[i] = -e * b * k[i] + (1.0 - e) * (b - 1.0) * kp[i];
  return out;
}

// The three gap surfaces over the (e, b) unit square, reduced to scalars
// along the unit own-class direction k = (1, 0):
//   binary         - opposite-mean two-class gap, 1 - e - b
//   multi_opposed  - general form at kp = -k (reduces to the binary surface)
//   multi_aligned  - general form at kp = +k (worst case: cross-class mean
//                    indistinguishable from the own mean)
enum class ZCase { binary, multi_opposed, multi_aligned };

inline const char* to_string(ZCase c) {
  switch (c) {
    case ZCase::binary: return "binary";
    case ZCase::multi_opposed: return "multi_opposed";
    case ZCase::multi_aligned: return "multi_aligned";
  }
  throw std::domain_error("to_string: bad Z case");
}

inline double z_case_value(ZCase c, double e, double b) {
  static const std::vector<double> k{1.0, 0.0};
  static const std::vector<double> k_neg{-1.0, 0.0};
  switch (c) {
    case ZCase::binary: return z_binary(e, b);
    case ZCase::multi_opposed: return z_multi(e, b, k, k_neg)[0];
    case ZCase::multi_aligned: return z_multi(e, b, k, k)[0];
  }
  throw std::domain_error("z_case_value: bad Z case");
}

// Vertex grid of one gap surface: resolution points per axis including both
// endpoints, value(ie, ib) at e = ie/(res-1), b = ib/(res-1).
struct ZSurface {
  ZCase zcase = ZCase::binary;
  int resolution = 0;
  std::vector<double> values;  // row-major over (ie, ib)

  double coord(int idx) const { return static_cast<double>(idx) / (resolution - 1); }
  double value(int ie, int ib) const {
    return values[static_cast<size_t>(ie) * resolution + ib];
  }
};

inline ZSurface z_surface(ZCase c, int resolution) {
  if (resolution < 2) throw std::domain_error("z_surface: resolution must be >= 2");
  ZSurface s;
  s.zcase = c;
  s.resolution = resolution;
  s.values.resize(static_cast<size_t>(resolution) * resolution);
  for (int ie = 0; ie < resolution; ++ie)
    for (int ib = 0; ib < resolution; ++ib)
      s.values[static_cast<size_t>(ie) * resolution + ib] =
          z_case_value(c, s.coord(ie), s.coord(ib));
  return s;
}

// Midpoint-rule integral of one gap surface over the unit square.  The
// integrands are bilinear in (e, b), for which the midpoint rule is exact up
// to rounding.
inline double z_surface_integral(ZCase c, int cells_per_axis = 1024) {
  if (cells_per_axis < 1) throw std::domain_error("z_surface_integral: need >= 1 cell");
  double h = 1.0 / cells_per_axis;
  double sum = 0.0;
  for (int ie = 0; ie < cells_per_axis; ++ie) {
    double e = (ie + 0.5) * h;
    for (int ib = 0; ib < cells_per_axis; ++ib) {
      double b = (ib + 0.5) * h;
      sum += z_case_value(c, e, b);
    }
  }
  return sum * h * h;
}

// Sign of a label path: +1 if the number of cross-class steps is even.
inline int path_sign(std::span<const int> labels) {
  if (labels.size() < 2) throw std::domain_error("path_sign: need at least 2 labels");
  int sign = 1;
  for (size_t i = 1; i < labels.size(); ++i)
    if (labels[i] != labels[i - 1]) sign = -sign;
  return sign;
}

namespace detail {

inline uint64_t sat_add(uint64_t a, uint64_t b) {
  uint64_t s = a + b;
  return s < a ? std::numeric_limits<uint64_t>::max() : s;
}

inline uint64_t sat_mul(uint64_t a, uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<uint64_t>::max() / b) return std::numeric_limits<uint64_t>::max();
  return a * b;
}

using CountRow = std::vector<std::pair<int, uint64_t>>;  // (column, count), sorted

// product of sparse count matrices with saturating arithmetic.
inline std::vector<CountRow> sat_spmm(const std::vector<CountRow>& a,
                                      const std::vector<CountRow>& b, int n) {
  std::vector<CountRow> out(a.size());
  std::vector<uint64_t> acc(n, 0);
  std::vector<int> touched;
  for (size_t i = 0; i < a.size(); ++i) {
    touched.clear();
    for (auto [k, av] : a[i]) {
      for (auto [j, bv] : b[k]) {
        if (acc[j] == 0) touched.push_back(j);
        acc[j] = sat_add(acc[j], sat_mul(av, bv));
      }
    }
    std::sort(touched.begin(), touched.end());
    out[i].reserve(touched.size());
    for (int j : touched) {
      out[i].emplace_back(j, acc[j]);
      acc[j] = 0;
    }
  }
  return out;
}

}  // namespace detail

// Number of walks of length 2..max_hops between unordered node pairs (i <= j,
// diagonal included): an upper bound on the work a path-by-path sign
// enumeration would have to do.  Counts saturate at the uint64 maximum
// instead of overflowing.
inline uint64_t path_enumeration_cost(const Graph& g, int max_hops) {
  if (max_hops < 2) throw std::domain_error("path_enumeration_cost: need max_hops >= 2");
  int n = g.num_nodes();
  std::vector<detail::CountRow> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j : g.neighbors(i)) adj[i].emplace_back(j, 1);
  std::vector<detail::CountRow> power = adj;
  uint64_t total = 0;
  for (int hops = 2; hops <= max_hops; ++hops) {
    power = detail::sat_spmm(power, adj, n);
    for (int i = 0; i < n; ++i)
      for (auto [j, c] : power[i])
        if (j >= i) total = detail::sat_add(total, c);
  }
  return total;
}

}  // namespace hetsign
