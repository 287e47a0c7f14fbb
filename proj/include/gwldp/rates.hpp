#pragma once

// Rate functions: relative entropy, Cramer transform of an offspring law,
// the pair-measure rate, the offspring-measure rate J and its k-generation
// version J_k, tilted kernels, and constrained entropy minima.

#include "gwldp/dual.hpp"
#include "gwldp/empirical.hpp"
#include "gwldp/model.hpp"
#include "gwldp/numeric.hpp"

#include <Eigen/Dense>

#include <limits>
#include <map>
#include <string_view>

namespace gwldp {

enum class RateReason { finite, not_abs_continuous, not_shift_invariant, marginal_violation, domain };

std::string_view to_string(RateReason reason);

struct RateValue {
  double value = 0.0;
  RateReason reason = RateReason::finite;

  static RateValue finite(double v) { return {v < 0.0 ? 0.0 : v, RateReason::finite}; }
  static RateValue infinite(RateReason why) { return {std::numeric_limits<double>::infinity(), why}; }
  bool is_finite() const noexcept { return reason == RateReason::finite; }
};

/// H(nu || xi) = sum nu log(nu / xi), 0 log 0 = 0. Keys missing from a map
/// have mass zero.
template <class Key>
RateValue relative_entropy(const std::map<Key, double>& nu, const std::map<Key, double>& xi) {
  double h = 0.0;
  for (const auto& [key, w] : nu) {
    if (w <= 0.0) continue;
    auto it = xi.find(key);
    if (it == xi.end() || it->second <= 0.0) return RateValue::infinite(RateReason::not_abs_continuous);
    h += w * std::log(w / it->second);
  }
  return RateValue::finite(h);
}

RateValue relative_entropy(const Eigen::VectorXd& nu, const Eigen::VectorXd& xi);
RateValue relative_entropy(const Eigen::MatrixXd& nu, const Eigen::MatrixXd& xi);

/// log sum_n p(n) e^{lambda n}.
double log_mgf(const OffspringLaw& p, double lambda);

/// I_p(x) = sup_lambda {lambda x - log_mgf(lambda)}. +inf (domain) outside
/// [0, max arity].
RateValue cramer_rate(const OffspringLaw& p, double x);

/// H(mu || mu_1 x Q) + sum_a mu_2(a) I_p(mu_1(a) / mu_2(a)) when
/// mu_1 << mu_2 (0 I_p(0/0) = 0), else +inf (marginal_violation).
RateValue pair_rate(const PairMeasure& mu, const OffspringLaw& p, const PairKernel& q);

/// H(nu || nu_1 x Q) for shift-invariant nu, else +inf.
RateValue offspring_rate_J(const OffspringMeasure& nu, const OffspringKernel& kernel,
                           double shift_tol = kShiftTolerance);

/// H(mu || (mu o pi_{k,k-1}^{-1}) x_1 Q) for shift-invariant mu, else +inf.
RateValue kgen_rate_Jk(const GenMeasureK& mu, const OffspringKernel& kernel, double shift_tol = kShiftTolerance);

using OffspringFunction = std::map<OffspringKey, double>;

/// U_g(a) = log sum_c Q{c | a} e^{g(a, c)}; g is zero on missing keys.
Eigen::VectorXd log_partition_U(const OffspringFunction& g, const OffspringKernel& kernel);

/// int [g(b, c) - sum_j U_g(c_j)] dnu(b, c).
double variational_functional(const OffspringMeasure& nu, const OffspringFunction& g,
                              const OffspringKernel& kernel);

struct TiltedKernel {
  /// log(nu / (nu_1 Q)) on the support of Q; -inf where nu vanishes.
  OffspringFunction g;
  OffspringKernel kernel;  // e^g Q
  double rho = 0.0;
  Eigen::VectorXd u;
  double entropy = 0.0;     // H(nu || nu_1 x Q)
  double g_integral = 0.0;  // int g dnu
  double max_row_defect = 0.0;  // max_a |sum_c Q e^g - 1|
};

/// Throws DomainError with not_shift_invariant, not_abs_continuous or
/// domain (nu_1 not strictly positive) on failed preconditions.
TiltedKernel tilted_kernel_from_measure(const OffspringMeasure& nu, const OffspringKernel& kernel,
                                        double shift_tol = kShiftTolerance);

struct ConstrainedMin {
  RateValue rate;
  DualSolution dual;
};

/// min H(nu || q) over laws nu on configs with sum_c m(b, c) nu(c) = phi(b).
/// +inf (domain) when phi is outside the moment hull.
ConstrainedMin constrained_entropy_min(const Eigen::VectorXd& phi, const OffspringKernel::Row& q,
                                       const DualOptions& options = {});

/// sum_a mu_2(a) min{H(nu || Q{.|a}) : sum_c m(b, c) nu(c) = mu(a, b)/mu_2(a)}.
RateValue contraction_infimum(const PairMeasure& mu, const OffspringKernel& kernel,
                              const DualOptions& options = {});

/// Two-type population model with mutation probability `mutation`.
struct GeneticModel {
  OffspringLaw law_a;
  OffspringLaw law_b;
  double mutation = 0.0;
};

struct GeneticRate {
  RateValue rate;
  DualSolution dual;
  /// dI/dx by the envelope theorem; NaN when the rate is infinite.
  double derivative = 0.0;
};

/// I(x) for the ratio x >= 0 of type-A to type-B vertices.
GeneticRate genetic_rate(double x, const GeneticModel& model, const DualOptions& options = {});

/// Mean matrix of the two-type model, columns indexed by the parent.
Eigen::Matrix2d genetic_mean_matrix(const GeneticModel& model);

}  // namespace gwldp
