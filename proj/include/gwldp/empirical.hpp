#pragma once

// Empirical pair, offspring and k-generation measures of a typed tree, and
// the linear maps between them. Counts are kept as integers so that the
// combinatorial identities can be checked exactly.

#include "gwldp/model.hpp"
#include "gwldp/tree.hpp"

#include <Eigen/Dense>

#include <compare>
#include <map>
#include <string>
#include <vector>

namespace gwldp {

inline constexpr double kShiftTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Pair measure

struct PairCounts {
  std::size_t num_types = 0;
  std::vector<long long> cells;  // row-major, parent x child
  long long edges = 0;

  long long at(TypeIndex a, TypeIndex b) const {
    return cells[static_cast<std::size_t>(a) * num_types + static_cast<std::size_t>(b)];
  }
};

/// Probability matrix on X x X, rows = parent (first coordinate).
struct PairMeasure {
  Eigen::MatrixXd mass;

  /// Throws DomainError(invalid_measure) unless nonnegative with total 1
  /// within `tol`.
  explicit PairMeasure(Eigen::MatrixXd m, double tol = 1e-9);

  std::size_t num_types() const noexcept { return static_cast<std::size_t>(mass.rows()); }
  Eigen::VectorXd first_marginal() const { return mass.rowwise().sum(); }
  Eigen::VectorXd second_marginal() const { return mass.colwise().sum().transpose(); }
};

PairCounts pair_counts(const TypedTree& tree, std::size_t num_types);
/// L_X. Throws DomainError(no_edges) for a root-only tree.
PairMeasure pair_measure(const TypedTree& tree, std::size_t num_types);
PairMeasure to_measure(const PairCounts& counts);

// ---------------------------------------------------------------------------
// Offspring measure

struct OffspringKey {
  TypeIndex type = 0;
  OffspringConfig config;
  auto operator<=>(const OffspringKey&) const = default;
};

struct OffspringCounts {
  std::size_t num_types = 0;
  std::map<OffspringKey, long long> counts;
  long long total = 0;
};

/// Finitely supported probability measure on X x X*.
class OffspringMeasure {
 public:
  /// Zero atoms are dropped. Throws DomainError(invalid_measure) unless
  /// nonnegative with total 1 within `tol`.
  OffspringMeasure(std::size_t num_types, std::map<OffspringKey, double> mass, double tol = 1e-9);

  std::size_t num_types() const noexcept { return num_types_; }
  const std::map<OffspringKey, double>& mass() const noexcept { return mass_; }
  double operator()(const OffspringKey& key) const;
  /// nu_1(a) = sum_c nu(a, c).
  const Eigen::VectorXd& first_marginal() const noexcept { return first_; }

 private:
  std::size_t num_types_;
  std::map<OffspringKey, double> mass_;
  Eigen::VectorXd first_;
};

OffspringCounts offspring_counts(const TypedTree& tree, std::size_t num_types);
/// M_X.
OffspringMeasure offspring_measure(const TypedTree& tree, std::size_t num_types);
OffspringMeasure to_measure(const OffspringCounts& counts);

/// Canonical key "a:c1.c2=count;..." in OffspringKey order.
std::string offspring_counts_key(const OffspringCounts& counts);

/// nu*(a, c) = u(a) Q{c | a}.
OffspringMeasure stationary_offspring_measure(const OffspringKernel& kernel, const Eigen::VectorXd& u);

/// F(nu)(a, b) = sum_c m(b, c) nu(a, c).
Eigen::MatrixXd contraction_F(const OffspringMeasure& nu);
/// Same map on integer counts, row-major. On a tree it reproduces
/// pair_counts exactly.
std::vector<long long> contraction_F(const OffspringCounts& counts);

/// defect(a) = nu_1(a) - sum_{b,c} m(a, c) nu(b, c).
Eigen::VectorXd shift_defect(const OffspringMeasure& nu);
/// Integer version; on a tree it is the indicator of the root type.
std::vector<long long> shift_defect(const OffspringCounts& counts);
bool is_shift_invariant(const OffspringMeasure& nu, double tol = kShiftTolerance);

// ---------------------------------------------------------------------------
// k-generation measures. A pattern is a typed planar tree of height <= k,
// keyed by serialize_indices(). Vertices at depth k carry no offspring
// information; shallower vertices without children are leaves.

/// Alphabet with labels "0", "1", ... used to parse pattern keys.
TypeAlphabet index_alphabet(std::size_t num_types);

/// Inverse of serialize_indices() for pattern keys.
TypedTree parse_pattern(const std::string& key);

/// Key of the subtree rooted at v truncated at depth k below v.
std::string pattern_key(const TypedTree& tree, std::size_t v, int k);
/// Truncation of a pattern key to depth j.
std::string truncate_pattern(const std::string& key, int j);

/// Depth of every vertex (root = 0).
std::vector<int> vertex_depths(const TypedTree& tree);

struct GenCounts {
  int k = 0;
  std::map<std::string, long long> counts;
  long long total = 0;
};

struct GenMeasureK {
  int k = 0;
  std::map<std::string, double> mass;

  double total() const;
};

GenCounts kgen_counts(const TypedTree& tree, int k);
/// M_X^k. Throws DomainError(domain) for k < 1.
GenMeasureK kgen_measure(const TypedTree& tree, int k);
GenMeasureK to_measure(const GenCounts& counts);
/// Canonical key "pattern=count;..." in key order.
std::string kgen_counts_key(const GenCounts& counts);

/// mu o pi_{k,j}^{-1} for j <= k.
GenMeasureK project(const GenMeasureK& mu, int j);

/// mu tensor_1 Q: every depth-k vertex gets an independent Q-offspring.
/// Patterns whose frontier cannot be extended with positive probability
/// contribute nothing.
GenMeasureK extend_generation(const GenMeasureK& mu, const OffspringKernel& kernel);

/// mu_0 = u on single-vertex patterns, mu_j = mu_{j-1} tensor_1 Q.
GenMeasureK stationary_gen_measure(const OffspringKernel& kernel, const Eigen::VectorXd& u, int k);

/// For every depth-(k-1) pattern a: mu(pi^{-1} a) - sum_b m_k(a, b) mu(b),
/// where m_k(a, b) counts root children of b whose depth-(k-1) subpattern
/// is a.
std::map<std::string, double> shift_defect_k(const GenMeasureK& mu);
bool is_shift_invariant(const GenMeasureK& mu, double tol = kShiftTolerance);

/// Bijection between depth-1 patterns and (type, config) pairs.
GenMeasureK to_gen_measure(const OffspringMeasure& nu);
OffspringMeasure to_offspring_measure(const GenMeasureK& mu, std::size_t num_types);

}  // namespace gwldp
