#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace geonet::oracle {

inline constexpr int kDefaultRestarts = 64;

/// Unit vectors in R^n with weights, plus an optional fixed vector. The
/// residual is |fixed + sum weight_i * vectors_i|.
struct VectorConfig {
  int dimension = 2;
  Eigen::VectorXd fixed;
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> vectors;

  double residual() const;
};

struct OracleResult {
  double minimized = 0.0;
  double predicted = 0.0;  // closed-form minimum
  VectorConfig argmin;
  int restarts = 0;
  int converged_restarts = 0;
  long sweeps = 0;          // coordinate sweeps over all restarts
  int best_restart = -1;    // -1: the seeded collinear candidate
  bool converged = true;    // every restart met the stopping rule

  double gap() const { return minimized - predicted; }
};

/// Smallest |fixed + sum m_i v_i| over unit v_i: max(0, 2 max - total) over
/// the magnitudes together with |fixed|.
double closed_form_minimum(double fixed_norm, const std::vector<double>& magnitudes);

/// Multi-start exact block-coordinate descent (each v_i in turn set to the
/// unit vector opposing the rest), seeded additionally with the collinear
/// candidate. `fixed` may be empty for no fixed term.
OracleResult min_weighted_residual(const Eigen::VectorXd& fixed, const std::vector<double>& magnitudes,
                                   int n, int restarts, std::uint64_t seed);

/// min |sum a^e v_e| over unit vectors, one per listed exponent.
OracleResult min_exponent_residual(const std::vector<int>& exponents, int a, int n, int restarts,
                                   std::uint64_t seed = 0);

/// A cage vertex with k edges of weights 1, a, ..., a^(k-1).
OracleResult min_cage_residual(int k, int a, int n, int restarts = kDefaultRestarts,
                               std::uint64_t seed = 0);

/// A flower vertex whose top petal (weight a^s) has angle theta; its two
/// tangents add up to a fixed vector of length 2 a^s cos(theta/2). Each
/// exponent in `lower` contributes two free unit vectors; exponents left out
/// are trivial petals.
OracleResult min_partial_flower_residual(int s, int a, double theta, const std::vector<int>& lower,
                                         int n, int restarts = kDefaultRestarts, std::uint64_t seed = 0);
/// Every lower petal 0..s-1 present.
OracleResult min_flower_residual(int s, int a, double theta, int n, int restarts = kDefaultRestarts,
                                 std::uint64_t seed = 0);

/// Left and right sides of 2 a^s cos(theta/2) <= 2 (a^s - 1)/(a - 1).
struct FlowerBalance {
  double top = 0.0;
  double lower_total = 0.0;
  bool attainable = false;
};
FlowerBalance flower_balance(int s, int a, double theta);

struct VertexCheck {
  std::vector<int> vertices;   // merged cluster, one entry for a single vertex
  std::vector<int> exponents;  // incident edge exponents, ascending
  std::string margin;          // a^max - sum of the others, exact decimal
  bool dominant = false;       // margin > 0
  OracleResult oracle;
};

struct MergingReport {
  int vertex_count = 0;
  int a = 0;
  std::vector<std::pair<int, int>> edge_pairs;  // pair carried by exponent e
  std::vector<VertexCheck> vertices;
  /// Merged configurations checked exactly: every partition into at least
  /// two clusters, internal edges collapsed.
  long partitions_checked = 0;
  long partitions_dominant = 0;
  std::vector<VertexCheck> merged_examples;
  bool all_dominant = false;
};

/// Edge listing used in the four-vertex hand computation:
/// (0,1) (1,2) (0,2) (0,3) (1,3) (2,3).
std::vector<std::pair<int, int>> four_vertex_hand_listing();

/// Per-vertex dominance for the complete graph with the given edge listing
/// (alphabetical when empty), the oracle minimum at every vertex, and an
/// exact scan of merged configurations (partitions enumerated up to
/// `max_partition_vertices` vertices).
MergingReport merging_lemma_check(int vertex_count, int a, int n, int restarts = kDefaultRestarts,
                                  std::vector<std::pair<int, int>> listing = {},
                                  int max_partition_vertices = 8);

/// a^max - sum of a^others over the exponent multiset, as an exact decimal.
std::string dominance_margin(const std::vector<int>& exponents, int a);

}  // namespace geonet::oracle
