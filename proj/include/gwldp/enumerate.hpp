#pragma once

// Exhaustive enumeration of typed planar trees of a given size and exact
// distributions of the empirical count statistics on {|T| = n}.

#include "gwldp/model.hpp"
#include "gwldp/tree.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gwldp {

/// Number of typed planar trees of size n in the support (all root types
/// with mu(a) > 0), as a double.
double estimate_tree_count(const GWSpec& spec, int n);

using TreeVisitor = std::function<void(const TypedTree& tree, double probability)>;

/// Calls `visit` once per tree of size n in the support with its
/// unconditioned probability mu(root) prod_v Q{C(v) | X(v)}.
/// Throws DomainError(guard_exceeded) when the count estimate exceeds
/// `guard`, before visiting anything.
void enumerate_trees(const GWSpec& spec, int n, const TreeVisitor& visit, double guard = 1e7);

enum class StatisticKind { pair_counts, offspring_counts, kgen_counts };

enum class ExactBackend { automatic, enumeration, count_dp };

struct ExactDistribution {
  StatisticKind kind = StatisticKind::pair_counts;
  int n = 0;
  int k = 0;  // pattern depth for kgen_counts
  std::map<std::string, double> probs;
  double total_mass = 0.0;
};

/// Canonical key of the chosen statistic of one tree (as used by
/// ExactDistribution).
std::string statistic_key(const TypedTree& tree, std::size_t num_types, StatisticKind kind, int k = 1);

/// Canonical key of the pair-count matrix: row-major, comma separated.
std::string pair_counts_key(const std::vector<long long>& row_major);
std::vector<long long> parse_pair_counts_key(const std::string& key);

/// Exact joint law of the chosen count statistic over trees of size n,
/// unnormalized (total mass f(n)). `automatic` uses the count DP for
/// pair_counts when |X| <= 2 and enumeration otherwise.
ExactDistribution exact_statistic_distribution(const GWSpec& spec, int n, StatisticKind kind,
                                               int k = 1,
                                               ExactBackend backend = ExactBackend::automatic,
                                               double guard = 1e7);

/// Count-DP pair_counts distributions for every n = 1..n_max (entry n-1),
/// |X| <= 2 only.
std::vector<ExactDistribution> pair_count_distributions(const GWSpec& spec, int n_max);

/// P{statistic in B | |T| = n}. Throws DomainError(null_conditioning) when
/// the total mass is zero.
double conditioned_event_probability(const ExactDistribution& dist,
                                     const std::function<bool(const std::string&)>& predicate);

}  // namespace gwldp
