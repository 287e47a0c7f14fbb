#pragma once

// Independent reference computations used by the tests and the acceptance
// suite. Nothing here calls the solver it is meant to check.

#include "gwldp/empirical.hpp"
#include "gwldp/model.hpp"

#include <map>
#include <string>

namespace gwldp::verify {

/// Cramer rate of p(k) = 1/k = 1 - p(0): a Bernoulli entropy in x/k.
double cramer_kary(int k, double x);
/// 1 - x + x log x.
double cramer_poisson(double x);

/// Pair rate of the k-ary law, +inf unless k mu_2 >= mu_1.
double pair_rate_kary(const Eigen::MatrixXd& mu, int k, const Eigen::MatrixXd& q);
/// H(mu || mu_1 x Q) + H(mu_1 || mu_2).
double pair_rate_poisson(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& q);

/// Root of 2y^3 + y^2 - 1 on (0, 1) by bisection: e^theta for the tilt
/// making uniform{0..3} critical.
double uniform3_critical_root();

/// Sum over all trees of size n of mu(root) prod Q{C(v) | X(v)}, by a
/// depth-first walk over preorder (type, config) sequences.
double brute_force_size_prob(const GWSpec& spec, int n);

/// Same walk, keyed by serialize_indices() of the tree.
std::map<std::string, double> brute_force_tree_probs(const GWSpec& spec, int n);

struct ChiSquare {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int cells = 0;  // after pooling
};

/// Goodness of fit of `observed` (key -> count) against `probs` (key ->
/// probability, renormalized). Cells with expected count below 5 are pooled
/// in ascending order; an observed key absent from `probs` gives p = 0.
ChiSquare chi_square_gof(const std::map<std::string, long long>& observed,
                         const std::map<std::string, double>& probs);

/// Two-sample homogeneity test on a 2 x K table, pooling sparse columns.
ChiSquare chi_square_homogeneity(const std::map<std::string, long long>& first,
                                 const std::map<std::string, long long>& second);

}  // namespace gwldp::verify
