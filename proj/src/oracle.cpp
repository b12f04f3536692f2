#include "geonet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

#include "geonet/errors.hpp"
#include "geonet/net.hpp"

namespace geonet::oracle {

using boost::multiprecision::cpp_int;

double VectorConfig::residual() const {
  Eigen::VectorXd s = fixed.size() == dimension ? fixed : Eigen::VectorXd::Zero(dimension);
  for (std::size_t i = 0; i < vectors.size(); ++i) s += weights[i] * vectors[i];
  return s.norm();
}

double closed_form_minimum(double fixed_norm, const std::vector<double>& magnitudes) {
  double total = fixed_norm;
  double top = fixed_norm;
  for (double m : magnitudes) {
    total += m;
    top = std::max(top, m);
  }
  return std::max(0.0, 2.0 * top - total);
}

namespace {

constexpr int kMaxSweeps = 20000;

struct Descent {
  double residual = 0.0;
  long sweeps = 0;
  bool converged = false;
};

// Exact block-coordinate descent from the vectors already in `c`.
Descent descend(VectorConfig& c, double scale) {
  const int n = c.dimension;
  Eigen::VectorXd sum = c.fixed.size() == n ? c.fixed : Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < c.vectors.size(); ++i) sum += c.weights[i] * c.vectors[i];
  Descent d;
  double current = sum.norm();
  for (; d.sweeps < kMaxSweeps; ++d.sweeps) {
    if (current <= 1e-15 * scale) {
      d.converged = true;
      break;
    }
    for (std::size_t i = 0; i < c.vectors.size(); ++i) {
      const Eigen::VectorXd rest = sum - c.weights[i] * c.vectors[i];
      const double r = rest.norm();
      if (r > 1e-300) c.vectors[i] = -rest / r;
      sum = rest + c.weights[i] * c.vectors[i];
    }
    const double next = sum.norm();
    const bool stalled = current - next <= 1e-15 * scale;
    current = next;
    if (stalled) {
      d.converged = true;
      ++d.sweeps;
      break;
    }
  }
  d.residual = c.residual();
  return d;
}

Eigen::VectorXd random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = g(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

cpp_int power(int a, int e) {
  cpp_int out = 1;
  for (int i = 0; i < e; ++i) out *= a;
  return out;
}

cpp_int margin_exact(const std::vector<int>& exponents, int a) {
  if (exponents.empty()) return 0;
  const int top = *std::max_element(exponents.begin(), exponents.end());
  cpp_int margin = power(a, top);
  bool skipped = false;
  for (int e : exponents) {
    if (e == top && !skipped) {
      skipped = true;
      continue;
    }
    margin -= power(a, e);
  }
  return margin;
}

void check_args(int n, int restarts) {
  if (n < 2) throw InvalidInput("oracle: dimension must be >= 2");
  if (restarts < 0) throw InvalidInput("oracle: restarts must be >= 0");
}

}  // namespace

OracleResult min_weighted_residual(const Eigen::VectorXd& fixed, const std::vector<double>& magnitudes,
                                   int n, int restarts, std::uint64_t seed) {
  check_args(n, restarts);
  if (fixed.size() != 0 && fixed.size() != n) throw InvalidInput("oracle: fixed vector has wrong dimension");
  for (double m : magnitudes) {
    if (!(m >= 0.0)) throw InvalidInput("oracle: magnitudes must be non-negative");
  }
  const double fixed_norm = fixed.size() ? fixed.norm() : 0.0;
  const double scale =
      std::max(1.0, fixed_norm + std::accumulate(magnitudes.begin(), magnitudes.end(), 0.0));

  OracleResult out;
  out.predicted = closed_form_minimum(fixed_norm, magnitudes);
  out.restarts = restarts;

  VectorConfig base;
  base.dimension = n;
  base.fixed = fixed.size() ? fixed : Eigen::VectorXd::Zero(n);
  base.weights = magnitudes;

  // Collinear candidate: everything opposing the largest term.
  {
    VectorConfig c = base;
    Eigen::VectorXd axis = Eigen::VectorXd::Unit(n, 0);
    if (fixed_norm > 0.0) axis = base.fixed / fixed_norm;
    std::size_t biggest = magnitudes.size();
    double top = fixed_norm;
    for (std::size_t i = 0; i < magnitudes.size(); ++i) {
      if (magnitudes[i] > top) {
        top = magnitudes[i];
        biggest = i;
      }
    }
    for (std::size_t i = 0; i < magnitudes.size(); ++i) c.vectors.push_back(i == biggest ? axis : -axis);
    if (biggest < magnitudes.size() && fixed_norm > 0.0) {
      c.vectors[biggest] = -axis;
      for (std::size_t i = 0; i < magnitudes.size(); ++i) {
        if (i != biggest) c.vectors[i] = axis;
      }
    }
    out.minimized = c.residual();
    out.argmin = std::move(c);
    out.best_restart = -1;
  }

  std::mt19937_64 rng(seed);
  for (int r = 0; r < restarts; ++r) {
    VectorConfig c = base;
    for (std::size_t i = 0; i < magnitudes.size(); ++i) c.vectors.push_back(random_unit(n, rng));
    const Descent d = descend(c, scale);
    out.sweeps += d.sweeps;
    if (d.converged) ++out.converged_restarts;
    if (d.residual < out.minimized) {
      out.minimized = d.residual;
      out.argmin = std::move(c);
      out.best_restart = r;
    }
  }
  out.converged = out.converged_restarts == restarts;
  return out;
}

OracleResult min_exponent_residual(const std::vector<int>& exponents, int a, int n, int restarts,
                                   std::uint64_t seed) {
  if (a < 1) throw InvalidInput("oracle: a must be positive");
  std::vector<double> m;
  for (int e : exponents) {
    if (e < 0) throw InvalidInput("oracle: exponents must be non-negative");
    m.push_back(std::pow(static_cast<double>(a), e));
  }
  return min_weighted_residual(Eigen::VectorXd(), m, n, restarts, seed);
}

OracleResult min_cage_residual(int k, int a, int n, int restarts, std::uint64_t seed) {
  if (k < 2) throw InvalidInput("min_cage_residual: k must be >= 2");
  if (a < 2) throw InvalidInput("min_cage_residual: a must be >= 2");
  std::vector<int> exps(static_cast<std::size_t>(k));
  std::iota(exps.begin(), exps.end(), 0);
  return min_exponent_residual(exps, a, n, restarts, seed);
}

FlowerBalance flower_balance(int s, int a, double theta) {
  if (s < 0) throw InvalidInput("flower_balance: s must be >= 0");
  if (a < 2) throw InvalidInput("flower_balance: a must be >= 2");
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw InvalidInput("flower_balance: theta must lie in [0, pi]");
  }
  FlowerBalance b;
  const double as = std::pow(static_cast<double>(a), s);
  // cos(theta/2) written as sin((pi - theta)/2) so that theta = pi gives 0.
  b.top = 2.0 * as * std::sin(0.5 * (std::numbers::pi - theta));
  b.lower_total = 2.0 * (as - 1.0) / (a - 1);
  b.attainable = b.top <= b.lower_total * (1.0 + 1e-15);
  return b;
}

OracleResult min_partial_flower_residual(int s, int a, double theta, const std::vector<int>& lower,
                                         int n, int restarts, std::uint64_t seed) {
  check_args(n, restarts);
  const FlowerBalance b = flower_balance(s, a, theta);
  std::vector<double> m;
  for (int e : lower) {
    if (e < 0 || e >= s) throw InvalidInput("min_flower_residual: lower exponents must lie in 0..s-1");
    m.push_back(std::pow(static_cast<double>(a), e));
    m.push_back(std::pow(static_cast<double>(a), e));
  }
  Eigen::VectorXd fixed = Eigen::VectorXd::Zero(n);
  fixed[0] = b.top;
  return min_weighted_residual(fixed, m, n, restarts, seed);
}

OracleResult min_flower_residual(int s, int a, double theta, int n, int restarts, std::uint64_t seed) {
  std::vector<int> lower(static_cast<std::size_t>(std::max(0, s)));
  std::iota(lower.begin(), lower.end(), 0);
  return min_partial_flower_residual(s, a, theta, lower, n, restarts, seed);
}

std::string dominance_margin(const std::vector<int>& exponents, int a) {
  return margin_exact(exponents, a).str();
}

std::vector<std::pair<int, int>> four_vertex_hand_listing() {
  return {{0, 1}, {1, 2}, {0, 2}, {0, 3}, {1, 3}, {2, 3}};
}

namespace {

VertexCheck cluster_check(const std::vector<int>& cluster, const std::vector<std::pair<int, int>>& listing,
                          int a, int n, int restarts, bool with_oracle) {
  VertexCheck c;
  c.vertices = cluster;
  const std::set<int> in(cluster.begin(), cluster.end());
  for (std::size_t e = 0; e < listing.size(); ++e) {
    const bool x = in.count(listing[e].first) > 0;
    const bool y = in.count(listing[e].second) > 0;
    if (x != y) c.exponents.push_back(static_cast<int>(e));
  }
  const cpp_int margin = margin_exact(c.exponents, a);
  c.margin = margin.str();
  c.dominant = margin > 0;
  if (with_oracle) c.oracle = min_exponent_residual(c.exponents, a, n, restarts, 0);
  return c;
}

// Restricted growth strings: block label of each vertex.
bool next_partition(std::vector<int>& label) {
  const int v = static_cast<int>(label.size());
  for (int i = v - 1; i > 0; --i) {
    const int limit = *std::max_element(label.begin(), label.begin() + i) + 1;
    if (label[static_cast<std::size_t>(i)] < limit) {
      ++label[static_cast<std::size_t>(i)];
      std::fill(label.begin() + i + 1, label.end(), 0);
      return true;
    }
  }
  return false;
}

}  // namespace

MergingReport merging_lemma_check(int vertex_count, int a, int n, int restarts,
                                  std::vector<std::pair<int, int>> listing, int max_partition_vertices) {
  if (vertex_count < 3) throw InvalidInput("merging_lemma_check: need at least 3 vertices");
  if (a < 2) throw InvalidInput("merging_lemma_check: a must be >= 2");
  check_args(n, restarts);
  if (listing.empty()) listing = alphabetical_pairs(vertex_count);
  {
    std::set<std::pair<int, int>> seen;
    for (auto [i, j] : listing) {
      if (i > j) std::swap(i, j);
      if (i < 0 || j >= vertex_count || i == j || !seen.insert({i, j}).second) {
        throw InvalidInput("merging_lemma_check: listing is not an ordering of the vertex pairs");
      }
    }
    if (static_cast<int>(seen.size()) != vertex_count * (vertex_count - 1) / 2) {
      throw InvalidInput("merging_lemma_check: listing does not cover every pair");
    }
  }

  MergingReport r;
  r.vertex_count = vertex_count;
  r.a = a;
  r.edge_pairs = listing;
  bool ok = true;
  for (int v = 0; v < vertex_count; ++v) {
    r.vertices.push_back(cluster_check({v}, listing, a, n, restarts, true));
    ok = ok && r.vertices.back().dominant;
  }

  if (vertex_count <= max_partition_vertices) {
    std::vector<int> label(static_cast<std::size_t>(vertex_count), 0);
    while (next_partition(label)) {
      const int blocks = *std::max_element(label.begin(), label.end()) + 1;
      bool all = true;
      for (int b = 0; b < blocks && all; ++b) {
        std::vector<int> cluster;
        for (int v = 0; v < vertex_count; ++v) {
          if (label[static_cast<std::size_t>(v)] == b) cluster.push_back(v);
        }
        all = cluster_check(cluster, listing, a, n, 0, false).dominant;
      }
      ++r.partitions_checked;
      if (all) ++r.partitions_dominant;
    }
    ok = ok && r.partitions_checked == r.partitions_dominant;
  }

  if (vertex_count >= 4) {
    r.merged_examples.push_back(cluster_check({0, 1}, listing, a, n, restarts, true));
    r.merged_examples.push_back(cluster_check({2, 3}, listing, a, n, restarts, true));
  }
  r.all_dominant = ok;
  return r;
}

}  // namespace geonet::oracle
