#pragma once

// Multitype Galton-Watson model: type alphabet, offspring laws and kernels,
// the mean matrix and its Perron-Frobenius data.

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gwldp {

using TypeIndex = int;

class TypeAlphabet {
 public:
  /// Labels must be nonempty, distinct, and free of the characters
  /// `(`, `)`, `,`, whitespace, which the tree serialization reserves.
  explicit TypeAlphabet(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(TypeIndex a) const { return labels_.at(static_cast<std::size_t>(a)); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Throws DomainError(invalid_model) for an unknown label.
  TypeIndex index_of(std::string_view label) const;
  std::optional<TypeIndex> find(std::string_view label) const;

 private:
  std::vector<std::string> labels_;
};

/// Number and ordered types of the children of one vertex. The empty config
/// is the leaf.
struct OffspringConfig {
  std::vector<TypeIndex> children;

  std::size_t arity() const noexcept { return children.size(); }
  auto operator<=>(const OffspringConfig&) const = default;
};

/// Number of occurrences of type `a` among the children of `c`.
int multiplicity(TypeIndex a, const OffspringConfig& c);

/// Finite-support law of the offspring number. Stored probabilities always
/// sum to one; mass dropped by truncating an analytic law is kept in
/// truncation_remainder() for reference only.
class OffspringLaw {
 public:
  /// Probabilities indexed by arity. Must sum to one within 1e-12 and have
  /// p(0) > 0.
  static OffspringLaw from_probs(std::vector<double> probs);
  /// Poisson(lambda) restricted to {0..nmax}, renormalized.
  static OffspringLaw poisson(double lambda, int nmax);
  /// p(k) = 1/k = 1 - p(0).
  static OffspringLaw kary(int k);
  /// Uniform on {0..k}.
  static OffspringLaw uniform(int k);

  double operator()(int n) const noexcept;
  const std::vector<double>& probs() const noexcept { return probs_; }
  double truncation_remainder() const noexcept { return remainder_; }
  int min_arity() const noexcept;
  int max_arity() const noexcept { return static_cast<int>(probs_.size()) - 1; }
  double mean() const noexcept;

  /// p_theta(l) = p(l) e^{theta l} / sum_j p(j) e^{theta j}.
  OffspringLaw tilted(double theta) const;

 private:
  OffspringLaw(std::vector<double> probs, double remainder);

  std::vector<double> probs_;
  double remainder_ = 0.0;
};

/// Row-stochastic transition matrix, Q(a, b) = Q{b | a}.
class PairKernel {
 public:
  explicit PairKernel(Eigen::MatrixXd rows);

  std::size_t num_types() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
  double operator()(TypeIndex from, TypeIndex to) const { return rows_(from, to); }
  const Eigen::MatrixXd& matrix() const noexcept { return rows_; }

  /// Stationary law pi Q = pi (power iteration on Q^T).
  Eigen::VectorXd stationary() const;

 private:
  Eigen::MatrixXd rows_;
};

/// Offspring kernel Q{c | a}: per type a finite-support law on configs.
class OffspringKernel {
 public:
  using Row = std::map<OffspringConfig, double>;

  /// Zero entries are dropped. Each row must sum to one within 1e-12.
  OffspringKernel(std::size_t num_types, std::vector<Row> rows);

  std::size_t num_types() const noexcept { return rows_.size(); }
  const Row& row(TypeIndex a) const { return rows_.at(static_cast<std::size_t>(a)); }
  const std::vector<Row>& rows() const noexcept { return rows_; }
  double prob(TypeIndex a, const OffspringConfig& c) const;
  /// Largest arity in the support.
  int max_arity() const noexcept { return max_arity_; }

 private:
  std::vector<Row> rows_;
  int max_arity_ = 0;
};

/// A(a, b): expected number of type-a children of a type-b parent.
using MeanMatrix = Eigen::MatrixXd;

MeanMatrix mean_matrix(const OffspringKernel& kernel);

/// Q{(n, a_1..a_n) | b} = p(n) prod_i Q{a_i | b}. Refuses when the support
/// would exceed `max_configs` entries per row.
OffspringKernel product_kernel(const OffspringLaw& p, const PairKernel& q,
                               std::size_t max_configs = 1'000'000);

struct TypePartition {
  std::vector<TypeIndex> recurrent;
  /// Ordered so that A(a, b) == 0 whenever a comes at or after b.
  std::vector<TypeIndex> transient;
};

struct PerronResult {
  double value = 0.0;
  Eigen::VectorXd vector;  // nonnegative, sums to one
  int iterations = 0;
  bool converged = false;
  bool shifted = false;
};

/// Power iteration for the dominant eigenpair of a nonnegative matrix,
/// restarting on A + eps I when the plain iteration stalls (periodic
/// supports).
PerronResult perron_vector(const Eigen::MatrixXd& m, double tol = 1e-12,
                           int max_iterations = 100000);

struct SpectralData {
  double rho = 0.0;
  Eigen::VectorXd right;  // A u = rho u, sum u = 1
  Eigen::VectorXd left;   // v A = rho v, sum v = 1
  std::optional<TypePartition> partition;
  bool weakly_irreducible = false;
  bool irreducible = false;

  bool critical(double tol = 1e-9) const noexcept;
};

/// Boolean transitive closure of the support of A: closure(a, b) iff
/// A^*(a, b) > 0.
std::vector<std::vector<bool>> reachability(const MeanMatrix& a);

/// Spectral data and partition search; never fails on structure.
SpectralData diagnose_model(const MeanMatrix& a);

/// As diagnose_model, but throws DomainError(not_weakly_irreducible) when
/// no recurrent/transient partition exists.
SpectralData analyze_model(const MeanMatrix& a);

struct CriticalTilt {
  double theta = 0.0;
  OffspringLaw law;
};

/// Unique theta with mean(p_theta) = 1, to 1e-10.
CriticalTilt find_critical_tilt(const OffspringLaw& p);

class GWSpec {
 public:
  GWSpec(TypeAlphabet alphabet, Eigen::VectorXd root, OffspringKernel kernel,
         double criticality_tol = 1e-9);

  const TypeAlphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t num_types() const noexcept { return alphabet_.size(); }
  const Eigen::VectorXd& root() const noexcept { return root_; }
  const OffspringKernel& kernel() const noexcept { return kernel_; }
  const MeanMatrix& mean() const noexcept { return mean_; }
  const SpectralData& spectral() const noexcept { return spectral_; }
  double criticality_tol() const noexcept { return criticality_tol_; }
  bool is_critical() const noexcept { return spectral_.critical(criticality_tol_); }

  /// Same alphabet and kernel with another root law.
  GWSpec with_root(Eigen::VectorXd root) const;

 private:
  TypeAlphabet alphabet_;
  Eigen::VectorXd root_;
  OffspringKernel kernel_;
  MeanMatrix mean_;
  SpectralData spectral_;
  double criticality_tol_;
};

/// Uniform root law on `n` types.
Eigen::VectorXd uniform_root(std::size_t n);

}  // namespace gwldp
