#include "gwldp/verify/acceptance.hpp"

#include "gwldp/enumerate.hpp"
#include "gwldp/error.hpp"
#include "gwldp/experiments.hpp"
#include "gwldp/rates.hpp"
#include "gwldp/sampler.hpp"
#include "gwldp/size_law.hpp"
#include "gwldp/verify/generators.hpp"
#include "gwldp/verify/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gwldp::verify {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// ---------------------------------------------------------------------------

bool ac1_oracle_equivalence(std::string& detail, const AcceptanceOptions&) {
  const std::vector<std::pair<std::string, GWSpec>> specs = {
      {"binary", binary_spec()}, {"product", product_spec()}, {"weakly-irreducible", weakly_irreducible_spec()}};
  double worst = 0.0;
  int checked = 0;
  for (const auto& [name, spec] : specs) {
    const SizeLawTable table = size_law(spec, 9);
    const AdmissibleSet adm = admissible_set(table, spec.root());
    for (int n = 1; n <= 9; ++n) {
      double enumerated = 0.0;
      enumerate_trees(spec, n, [&](const TypedTree&, double p) { enumerated += p; });
      const double f = std::exp(table.log_total(spec.root(), n));
      if (adm.contains(n) != (enumerated > 0.0)) {
        detail = name + ": admissible set disagrees with enumeration at n=" + std::to_string(n);
        return false;
      }
      if (!adm.contains(n)) continue;
      worst = std::max({worst, std::abs(f - enumerated), std::abs(f - brute_force_size_prob(spec, n))});
      ++checked;
    }
  }
  detail = std::to_string(checked) + " (spec, n) pairs, max |f(n) - enumeration| = " + fmt(worst);
  return worst <= 1e-12;
}

bool ac2_cramer(std::string& detail, const AcceptanceOptions&) {
  double worst = 0.0;
  for (int k : {2, 3}) {
    const OffspringLaw p = OffspringLaw::kary(k);
    for (int i = 0; i < 50; ++i) {
      const double x = k * i / 49.0;
      worst = std::max(worst, std::abs(cramer_rate(p, x).value - cramer_kary(k, x)));
    }
  }
  const OffspringLaw poisson = OffspringLaw::poisson(1.0, 60);
  for (int i = 1; i <= 50; ++i) {
    const double x = 5.0 * i / 50.0;
    worst = std::max(worst, std::abs(cramer_rate(poisson, x).value - cramer_poisson(x)));
  }
  detail = "150 grid points, max error " + fmt(worst);
  return worst <= 1e-6;
}

bool ac3_pair_closed_forms(std::string& detail, const AcceptanceOptions&) {
  Engine eng(3);
  double worst_kary = 0.0, worst_poisson = 0.0;
  for (int k : {2, 3}) {
    const OffspringLaw p = OffspringLaw::kary(k);
    for (int i = 0; i < 100; ++i) {
      const std::size_t types = 2 + static_cast<std::size_t>(i % 2);
      const PairKernel q = random_pair_kernel(eng, types);
      const Eigen::MatrixXd mu = random_pair_measure(eng, types, k);
      const RateValue r = pair_rate(PairMeasure(mu), p, q);
      worst_kary = std::max(worst_kary, std::abs(r.value - pair_rate_kary(mu, k, q.matrix())));
    }
  }
  const OffspringLaw poisson = OffspringLaw::poisson(1.0, 60);
  for (int i = 0; i < 100; ++i) {
    const std::size_t types = 2 + static_cast<std::size_t>(i % 2);
    const PairKernel q = random_pair_kernel(eng, types);
    const Eigen::MatrixXd mu = random_pair_measure(eng, types);
    const RateValue r = pair_rate(PairMeasure(mu), poisson, q);
    worst_poisson = std::max(worst_poisson, std::abs(r.value - pair_rate_poisson(mu, q.matrix())));
  }
  detail = "k-ary max error " + fmt(worst_kary) + ", Poisson max error " + fmt(worst_poisson);
  return worst_kary <= 1e-10 && worst_poisson <= 1e-6;
}

bool ac4_contraction(std::string& detail, const AcceptanceOptions&) {
  Engine eng(4);
  const OffspringLaw p = OffspringLaw::from_probs({0.3, 0.4, 0.3});
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const PairKernel q = random_pair_kernel(eng, 2);
    const OffspringKernel kernel = product_kernel(p, q);
    const PairMeasure mu(random_pair_measure(eng, 2, 2, 0.02));
    const RateValue direct = pair_rate(mu, p, q);
    const RateValue contracted = contraction_infimum(mu, kernel);
    if (!direct.is_finite() || !contracted.is_finite()) {
      detail = "infinite rate on a feasible measure";
      return false;
    }
    worst = std::max(worst, std::abs(direct.value - contracted.value));
  }
  detail = "10 measures, max |contraction - pair_rate| = " + fmt(worst);
  return worst <= 1e-4;
}

bool ac5_zero_rate(std::string& detail, const AcceptanceOptions&) {
  double worst_zero = 0.0;
  for (const GWSpec& spec : {binary_spec(), product_spec(), weakly_irreducible_spec()}) {
    const OffspringMeasure star = stationary_offspring_measure(spec.kernel(), spec.spectral().right);
    const RateValue j = offspring_rate_J(star, spec.kernel());
    if (!j.is_finite()) {
      detail = "J(nu*) infinite";
      return false;
    }
    worst_zero = std::max(worst_zero, j.value);
  }
  Engine eng(5);
  const OffspringKernel base = product_spec().kernel();
  double worst_rho = 0.0, worst_u = 0.0, worst_h = 0.0;
  for (int i = 0; i < 50; ++i) {
    const OffspringMeasure nu = random_shift_invariant(eng, base);
    const TiltedKernel t = tilted_kernel_from_measure(nu, base);
    worst_rho = std::max(worst_rho, std::abs(t.rho - 1.0));
    worst_u = std::max(worst_u, max_abs(t.u - nu.first_marginal()));
    worst_h = std::max(worst_h, std::abs(t.entropy - t.g_integral));
  }
  detail = "J(nu*) <= " + fmt(worst_zero) + "; 50 tilts: |rho-1| " + fmt(worst_rho) + ", |u-nu_1| " +
           fmt(worst_u) + ", |H-int g| " + fmt(worst_h);
  return worst_zero <= 1e-12 && worst_rho <= 1e-8 && worst_u <= 1e-8 && worst_h <= 1e-8;
}

bool ac6_subexponential(std::string& detail, const AcceptanceOptions&) {
  const CurveSeries c = decay_curve(binary_spec(), 2001);
  auto at = [&](int n) {
    for (const auto& r : c.rows)
      if (static_cast<int>(r.x) == n) return r.value;
    throw DomainError(ErrorCode::not_admissible, "missing row " + std::to_string(n));
  };
  const double r501 = at(501), r1001 = at(1001), r2001 = at(2001);
  detail = "r(501) = " + fmt(r501) + ", r(1001) = " + fmt(r1001) + ", r(2001) = " + fmt(r2001);
  return r2001 < 0.02 && r501 > r1001 && r1001 > r2001;
}

bool ac7_tilt_invariance(std::string& detail, const AcceptanceOptions&) {
  const CurveSeries c =
      tilt_invariance_report(OffspringLaw::kary(2), symmetric_kernel(0.75), uniform_root(2), {-0.5, 0.5}, 7);
  double worst = 0.0;
  for (const auto& r : c.rows) worst = std::max(worst, r.value);
  detail = "binary 2-type, n = 7, max TV = " + fmt(worst);
  return c.rows.size() == 2 && worst <= 1e-12;
}

bool ac8_ldp_trend(std::string& detail, const AcceptanceOptions&) {
  // Ternary law: admissible sizes 19, 22, 25 (see README, finite-n LDP).
  const OffspringLaw p = OffspringLaw::from_probs({2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0});
  const PairKernel q = symmetric_kernel(0.1);
  const GWSpec spec(TypeAlphabet({"a", "b"}), uniform_root(2), product_kernel(p, q));
  const GridMinimum ref = grid_infimum_pair_rate(p, q, [](const Eigen::Matrix2d& m) { return m(0, 0) >= 0.4; });

  const AdmissibleSet adm = admissible_set(size_law(spec, 25), spec.root());
  std::vector<int> ns = adm.members();
  ns.erase(std::remove(ns.begin(), ns.end(), 1), ns.end());
  if (ns.size() < 3) {
    detail = "fewer than three admissible sizes";
    return false;
  }
  ns.erase(ns.begin(), ns.end() - 3);
  LdpOptions opts;
  opts.rate_reference = ref.value;
  const CurveSeries c = ldp_curve(spec, pair_fraction_at_least(2, 0, 0, 0.4), ns, opts);
  std::vector<double> gaps;
  std::ostringstream s;
  s << "inf_B I = " << fmt(ref.value) << ";";
  for (const auto& r : c.rows) {
    gaps.push_back(std::abs(r.value - ref.value));
    s << " n=" << r.x << " gap " << fmt(gaps.back());
  }
  const double rel = gaps.back() / ref.value;
  s << "; relative gap " << fmt(rel);
  detail = s.str();
  return gaps[0] > gaps[1] && gaps[1] > gaps[2] && rel < 0.3;
}

bool ac9_jk_ladder(std::string& detail, const AcceptanceOptions&) {
  const GWSpec spec = binary_chain_spec(0.75);
  const OffspringKernel& kernel = spec.kernel();
  Engine eng(9);
  double worst_drop = 0.0;
  double smallest_j3 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 5; ++i) {
    const GenMeasureK mu = random_stationary_mixture(eng, kernel, 3, 2 + i % 2);
    const CurveSeries c = jk_monotonicity(mu, kernel);
    if (c.rows.size() != 3) {
      detail = "expected three rows";
      return false;
    }
    for (const auto& r : c.rows)
      if (!std::isfinite(r.value)) {
        detail = "infinite J_k on a shift-invariant measure: " + r.note;
        return false;
      }
    worst_drop = std::max({worst_drop, c.rows[0].value - c.rows[1].value, c.rows[1].value - c.rows[2].value});
    smallest_j3 = std::min(smallest_j3, c.rows[2].value);
  }
  const GenMeasureK stat = stationary_gen_measure(kernel, spec.spectral().right, 3);
  double worst_zero = 0.0;
  for (const auto& r : jk_monotonicity(stat, kernel).rows) worst_zero = std::max(worst_zero, std::abs(r.value));
  detail = "max J_k - J_{k+1} = " + fmt(worst_drop) + " (min J_3 " + fmt(smallest_j3) +
           "); stationary max |J_k| = " + fmt(worst_zero);
  return worst_drop <= 1e-9 && worst_zero <= 1e-9;
}

bool ac10_sampler(std::string& detail, const AcceptanceOptions& options) {
  const GWSpec spec = binary_chain_spec(0.75);
  const int n = 7;
  const std::size_t draws = 100000;
  std::map<std::string, double> probs;
  enumerate_trees(spec, n, [&](const TypedTree& t, double p) { probs[serialize_indices(t)] += p; });

  auto tally = [&](SamplerMethod m, std::uint64_t seed) {
    std::map<std::string, long long> counts;
    for (const auto& t : sample_many(spec, n, draws, seed, m, options.threads)) ++counts[serialize_indices(t)];
    return counts;
  };
  const auto exact = tally(SamplerMethod::exact, 101);
  const auto rejection = tally(SamplerMethod::rejection, 202);
  const ChiSquare g1 = chi_square_gof(exact, probs);
  const ChiSquare g2 = chi_square_gof(rejection, probs);
  const ChiSquare h = chi_square_homogeneity(exact, rejection);
  detail = std::to_string(probs.size()) + " trees; exact p = " + fmt(g1.p_value) + ", rejection p = " +
           fmt(g2.p_value) + ", homogeneity p = " + fmt(h.p_value);
  return g1.p_value > 1e-3 && g2.p_value > 1e-3 && h.p_value > 1e-3;
}

bool ac11_genetic(std::string& detail, const AcceptanceOptions&) {
  const GeneticModel model = critical_poisson_genetic(1.2, 0.05, 40);
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(0.1 + (10.0 - 0.1) * i / 199.0);
  const GeneticScan scan = genetic_scan(model, grid);
  detail = "argmin x = " + fmt(scan.argmin) + ", residual " + fmt(scan.residual) + ", I(argmin) = " +
           fmt(scan.rate_at_argmin);
  return scan.residual < 1e-6 && scan.rate_at_argmin < 1e-6;
}

}  // namespace

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> list = {
      {1, "size law equals enumeration", 30.0, ac1_oracle_equivalence},
      {2, "Cramer closed forms", 5.0, ac2_cramer},
      {3, "pair-rate closed forms", 10.0, ac3_pair_closed_forms},
      {4, "contraction consistency", 60.0, ac4_contraction},
      {5, "zero-rate certificates and tilted kernels", 30.0, ac5_zero_rate},
      {6, "subexponential size law", 10.0, ac6_subexponential},
      {7, "tilt invariance", 60.0, ac7_tilt_invariance},
      {8, "finite-n LDP trend", 300.0, ac8_ldp_trend},
      {9, "J_k ladder", 60.0, ac9_jk_ladder},
      {10, "sampler correctness", 120.0, ac10_sampler},
      {11, "genetic example", 60.0, ac11_genetic},
  };
  return list;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  std::vector<CriterionResult> out;
  for (const auto& c : acceptance_criteria()) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), c.id) == options.only.end())
      continue;
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    r.limit = c.limit;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.passed = c.run(r.detail, options);
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.seconds > r.limit) {
      r.passed = false;
      r.detail += " [runtime limit exceeded]";
    }
    out.push_back(std::move(r));
  }
  return out;
}

void print_results(std::ostream& out, const std::vector<CriterionResult>& results, bool with_times) {
  for (const auto& r : results) {
    out << (r.passed ? "PASS" : "FAIL") << " AC" << r.id << " " << r.name;
    if (with_times) {
      char time[64];
      std::snprintf(time, sizeof time, " (%.3f s / %g s)", r.seconds, r.limit);
      out << time;
    }
    out << ": " << r.detail << "\n";
  }
}

}  // namespace gwldp::verify
