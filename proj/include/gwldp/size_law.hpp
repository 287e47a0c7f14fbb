#pragma once

// Exact law of the total size |T| by the convolution recursion over
// offspring configs, kept in log domain.

#include "gwldp/model.hpp"

#include <cstddef>
#include <map>
#include <vector>

namespace gwldp {

/// log f_a(n) = log P{|T| = n | X(root) = a} for n = 1..max_size().
/// Also holds the prefix convolutions used to split a total size among
/// the children of a config, which the exact sampler reuses.
class SizeLawTable {
 public:
  int max_size() const noexcept { return max_size_; }
  std::size_t num_types() const noexcept { return log_f_.size(); }

  /// -inf when the probability is zero or n is out of [1, max_size()].
  double log_prob(TypeIndex a, int n) const;
  double prob(TypeIndex a, int n) const;
  /// log sum_a root(a) f_a(n).
  double log_total(const Eigen::VectorXd& root, int n) const;

  /// log W_c(s): probability that independent trees rooted at the children
  /// of `config` (in order) have total size s. Only configs in the kernel row
  /// of some type are tabulated; `j` restricts to the first j children.
  double log_prefix(const OffspringConfig& config, std::size_t j, int s) const;

 private:
  friend SizeLawTable size_law(const OffspringKernel& kernel, int max_size);

  struct Prefix {
    std::size_t parent = 0;  // index of the prefix one shorter
    TypeIndex last = 0;
    std::vector<double> log_w;  // index = total size 0..max_size
  };

  std::size_t prefix_index(const OffspringConfig& config, std::size_t j) const;

  int max_size_ = 0;
  std::vector<std::vector<double>> log_f_;  // [a][n], n = 0..max_size
  std::vector<Prefix> prefixes_;            // prefixes_[0] is the empty prefix
  std::map<std::vector<TypeIndex>, std::size_t> prefix_ids_;
};

/// Throws DomainError(domain) when max_size <= 0.
SizeLawTable size_law(const OffspringKernel& kernel, int max_size);
SizeLawTable size_law(const GWSpec& spec, int max_size);

/// Lattice of admissible sizes {n : f(n) > 0} read off a size-law table.
/// Eventually f(n) > 0 exactly on the residues mod `period`; below
/// `stabilization` the finite lists `exceptions` (in a residue class but
/// f(n) = 0) and `extras` (outside the classes but f(n) > 0) correct it.
/// Period 0 marks a degenerate finite set.
struct AdmissibleSet {
  int period = 0;
  std::vector<int> residues;
  std::vector<int> exceptions;
  std::vector<int> extras;
  int stabilization = 1;
  int max_size = 0;

  /// Defined for 1 <= n <= max_size; throws DomainError(domain) beyond.
  bool contains(int n) const;
  std::vector<int> members() const;
};

AdmissibleSet admissible_set(const SizeLawTable& table, const Eigen::VectorXd& root);

}  // namespace gwldp
