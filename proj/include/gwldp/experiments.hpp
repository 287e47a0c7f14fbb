#pragma once

// Desk-scale numerical experiments and their CSV output.

#include "gwldp/empirical.hpp"
#include "gwldp/enumerate.hpp"
#include "gwldp/model.hpp"
#include "gwldp/rates.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gwldp {

struct CurveRow {
  double x = 0.0;
  double value = 0.0;
  std::optional<double> reference;
  std::optional<double> std_error;
  /// The value is a lower bound (Monte Carlo run without hits).
  bool lower_bound = false;
  std::string note;
};

struct CurveSeries {
  std::string label;
  std::string x_name = "x";
  std::vector<CurveRow> rows;
  /// Written as "# key: value" header lines.
  std::map<std::string, std::string> meta;
};

/// Rows (n, -(1/n) log f(n)) over admissible n <= n_max. Throws
/// DomainError(domain) for a non-critical spec.
CurveSeries decay_curve(const GWSpec& spec, int n_max);

enum class LdpMethod { exact, mc };

/// Event on the canonical key of the statistic for trees of size n.
using KeyEvent = std::function<bool(const std::string& key, int n)>;

struct LdpOptions {
  LdpMethod method = LdpMethod::exact;
  StatisticKind kind = StatisticKind::pair_counts;
  int k = 1;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::optional<double> rate_reference;
};

/// Rows (n, -(1/n) log P{statistic in B | |T| = n}). Monte Carlo draws use
/// the exact conditioned sampler with stream ids 0..samples-1 per n.
CurveSeries ldp_curve(const GWSpec& spec, const KeyEvent& event, const std::vector<int>& ns,
                      const LdpOptions& options);

/// Event {L_X(a, b) >= threshold} on pair-count keys.
KeyEvent pair_fraction_at_least(std::size_t num_types, TypeIndex a, TypeIndex b, double threshold);

struct GridMinimum {
  double value = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd argmin;
  std::size_t evaluated = 0;
};

/// inf of pair_rate over the 2 x 2 pair measures in `region`, by a grid of
/// the given step followed by a pattern search from the best grid point.
GridMinimum grid_infimum_pair_rate(const OffspringLaw& p, const PairKernel& q,
                                   const std::function<bool(const Eigen::Matrix2d&)>& region,
                                   double step = 1.0 / 200.0);

/// Total variation between the size-n conditioned tree laws of the product
/// kernels built from p and from p_theta, per theta.
CurveSeries tilt_invariance_report(const OffspringLaw& p, const PairKernel& q, const Eigen::VectorXd& root,
                                   const std::vector<double>& thetas, int n);

/// Rows (k, J_k(mu o pi_k^{-1})) for k = 1..mu.k. Infinite rows are flagged
/// in `note`.
CurveSeries jk_monotonicity(const GenMeasureK& mu, const OffspringKernel& kernel,
                            double shift_tol = kShiftTolerance);

/// Two Poisson laws truncated at nmax with means in ratio eta, scaled so
/// that the two-type mean matrix has Perron root 1.
GeneticModel critical_poisson_genetic(double eta, double mutation, int nmax);

struct GeneticScan {
  CurveSeries curve;
  double argmin = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int refinements = 0;
  double eta = 0.0;
  /// |x/(1+x) - (x eta (1-p) + p)/(x eta + 1)| at the argmin.
  double residual = 0.0;
  double rate_at_argmin = 0.0;
};

/// Grid evaluation of I(x) followed by bisection on dI/dx inside the
/// bracket around the best grid point; each step halves the bracket.
GeneticScan genetic_scan(const GeneticModel& model, const std::vector<double>& x_grid);

// ---------------------------------------------------------------------------
// Output

/// %.17e, with "inf", "-inf", "nan" spelled out.
std::string format_double(double v);

/// FNV-1a digest (hex) of a canonical dump of the spec.
std::string spec_digest(const GWSpec& spec);

void write_csv(std::ostream& out, const CurveSeries& series);

}  // namespace gwldp
