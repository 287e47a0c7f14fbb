#include "gwldp/rates.hpp"

#include "gwldp/error.hpp"

#include <cmath>

namespace gwldp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string_view to_string(RateReason reason) {
  switch (reason) {
    case RateReason::finite: return "finite";
    case RateReason::not_abs_continuous: return "not_abs_continuous";
    case RateReason::not_shift_invariant: return "not_shift_invariant";
    case RateReason::marginal_violation: return "marginal_violation";
    case RateReason::domain: return "domain";
  }
  return "unknown";
}

RateValue relative_entropy(const Eigen::VectorXd& nu, const Eigen::VectorXd& xi) {
  if (nu.size() != xi.size()) throw DomainError(ErrorCode::domain, "relative entropy of mismatched vectors");
  double h = 0.0;
  for (Eigen::Index i = 0; i < nu.size(); ++i) {
    if (nu(i) <= 0.0) continue;
    if (xi(i) <= 0.0) return RateValue::infinite(RateReason::not_abs_continuous);
    h += nu(i) * std::log(nu(i) / xi(i));
  }
  return RateValue::finite(h);
}

RateValue relative_entropy(const Eigen::MatrixXd& nu, const Eigen::MatrixXd& xi) {
  if (nu.rows() != xi.rows() || nu.cols() != xi.cols())
    throw DomainError(ErrorCode::domain, "relative entropy of mismatched matrices");
  return relative_entropy(Eigen::VectorXd(nu.reshaped()), Eigen::VectorXd(xi.reshaped()));
}

// ---------------------------------------------------------------------------

namespace {

struct TiltStats {
  double log_z = 0.0;
  double mean = 0.0;
  double var = 0.0;
};

TiltStats tilt_stats(const OffspringLaw& p, double lambda) {
  const auto& probs = p.probs();
  LogSumExp acc;
  for (std::size_t n = 0; n < probs.size(); ++n)
    if (probs[n] > 0.0) acc.add(std::log(probs[n]) + lambda * static_cast<double>(n));
  TiltStats s;
  s.log_z = acc.value();
  double m1 = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n)
    if (probs[n] > 0.0) m1 += static_cast<double>(n) * std::exp(std::log(probs[n]) + lambda * static_cast<double>(n) - s.log_z);
  double m2 = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n)
    if (probs[n] > 0.0) {
      const double d = static_cast<double>(n) - m1;
      m2 += d * d * std::exp(std::log(probs[n]) + lambda * static_cast<double>(n) - s.log_z);
    }
  s.mean = m1;
  s.var = m2;
  return s;
}

}  // namespace

double log_mgf(const OffspringLaw& p, double lambda) { return tilt_stats(p, lambda).log_z; }

RateValue cramer_rate(const OffspringLaw& p, double x) {
  const double top = static_cast<double>(p.max_arity());
  if (!(x >= 0.0) || x > top) return RateValue::infinite(RateReason::domain);
  if (x == 0.0) return RateValue::finite(-std::log(p(0)));
  if (x == top) return RateValue::finite(-std::log(p(p.max_arity())));

  // mean(p_lambda) is increasing in lambda; bracket the root, then Newton
  // with bisection fallback
  double lo = -1.0, hi = 1.0;
  while (tilt_stats(p, lo).mean > x && lo > -1e6) lo *= 2.0;
  while (tilt_stats(p, hi).mean < x && hi < 1e6) hi *= 2.0;
  double lambda = 0.0;
  if (lambda <= lo || lambda >= hi) lambda = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    const TiltStats s = tilt_stats(p, lambda);
    const double f = s.mean - x;
    if (std::abs(f) <= 1e-15 * std::max(1.0, x)) break;
    if (f > 0.0) hi = lambda;
    else lo = lambda;
    double next = s.var > 0.0 ? lambda - f / s.var : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - lambda) <= 1e-16 * std::max(1.0, std::abs(lambda))) break;
    lambda = next;
  }
  return RateValue::finite(lambda * x - log_mgf(p, lambda));
}

RateValue pair_rate(const PairMeasure& mu, const OffspringLaw& p, const PairKernel& q) {
  if (q.num_types() != mu.num_types()) throw DomainError(ErrorCode::domain, "pair kernel size mismatch");
  const Eigen::VectorXd m1 = mu.first_marginal();
  const Eigen::VectorXd m2 = mu.second_marginal();
  for (Eigen::Index a = 0; a < m1.size(); ++a)
    if (m1(a) > 0.0 && m2(a) <= 0.0) return RateValue::infinite(RateReason::marginal_violation);

  const Eigen::MatrixXd ref = m1.asDiagonal() * q.matrix();
  RateValue h = relative_entropy(mu.mass, ref);
  if (!h.is_finite()) return h;
  double total = h.value;
  for (Eigen::Index a = 0; a < m1.size(); ++a) {
    if (m2(a) <= 0.0) continue;  // 0 I_p(0/0) = 0
    const RateValue i = cramer_rate(p, m1(a) / m2(a));
    if (!i.is_finite()) return i;
    total += m2(a) * i.value;
  }
  return RateValue::finite(total);
}

RateValue offspring_rate_J(const OffspringMeasure& nu, const OffspringKernel& kernel, double shift_tol) {
  if (nu.num_types() != kernel.num_types()) throw DomainError(ErrorCode::domain, "kernel size mismatch");
  if (!is_shift_invariant(nu, shift_tol)) return RateValue::infinite(RateReason::not_shift_invariant);
  double h = 0.0;
  for (const auto& [key, w] : nu.mass()) {
    const double q = kernel.prob(key.type, key.config);
    if (q <= 0.0) return RateValue::infinite(RateReason::not_abs_continuous);
    h += w * std::log(w / (nu.first_marginal()(key.type) * q));
  }
  return RateValue::finite(h);
}

RateValue kgen_rate_Jk(const GenMeasureK& mu, const OffspringKernel& kernel, double shift_tol) {
  if (mu.k < 1) throw DomainError(ErrorCode::domain, "J_k needs k >= 1");
  if (!is_shift_invariant(mu, shift_tol)) return RateValue::infinite(RateReason::not_shift_invariant);
  const GenMeasureK coarse = project(mu, mu.k - 1);
  double h = 0.0;
  for (const auto& [key, w] : mu.mass) {
    if (w <= 0.0) continue;
    const TypedTree t = parse_pattern(key);
    const auto depth = vertex_depths(t);
    double ref = coarse.mass.at(pattern_key(t, 0, mu.k - 1));
    for (std::size_t v = 0; v < t.size() && ref > 0.0; ++v)
      if (depth[v] == mu.k - 1) ref *= kernel.prob(t.type(v), t.config(v));
    if (ref <= 0.0) return RateValue::infinite(RateReason::not_abs_continuous);
    h += w * std::log(w / ref);
  }
  return RateValue::finite(h);
}

// ---------------------------------------------------------------------------

namespace {

double lookup(const OffspringFunction& g, TypeIndex a, const OffspringConfig& c) {
  auto it = g.find(OffspringKey{a, c});
  return it == g.end() ? 0.0 : it->second;
}

}  // namespace

Eigen::VectorXd log_partition_U(const OffspringFunction& g, const OffspringKernel& kernel) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(kernel.num_types()));
  for (std::size_t a = 0; a < kernel.num_types(); ++a) {
    LogSumExp acc;
    for (const auto& [c, q] : kernel.row(static_cast<TypeIndex>(a)))
      acc.add(std::log(q) + lookup(g, static_cast<TypeIndex>(a), c));
    u(static_cast<Eigen::Index>(a)) = acc.value();
  }
  return u;
}

double variational_functional(const OffspringMeasure& nu, const OffspringFunction& g,
                              const OffspringKernel& kernel) {
  const Eigen::VectorXd u = log_partition_U(g, kernel);
  double total = 0.0;
  for (const auto& [key, w] : nu.mass()) {
    double term = lookup(g, key.type, key.config);
    for (TypeIndex child : key.config.children) term -= u(child);
    total += w * term;
  }
  return total;
}

TiltedKernel tilted_kernel_from_measure(const OffspringMeasure& nu, const OffspringKernel& kernel,
                                        double shift_tol) {
  if (nu.num_types() != kernel.num_types()) throw DomainError(ErrorCode::domain, "kernel size mismatch");
  if (!is_shift_invariant(nu, shift_tol))
    throw DomainError(ErrorCode::not_shift_invariant, "tilted kernel needs a shift-invariant measure");
  const Eigen::VectorXd& first = nu.first_marginal();
  if ((first.array() <= 0.0).any())
    throw DomainError(ErrorCode::domain, "tilted kernel needs a strictly positive first marginal");
  for (const auto& [key, w] : nu.mass())
    if (kernel.prob(key.type, key.config) <= 0.0)
      throw DomainError(ErrorCode::not_abs_continuous, "measure charges a config outside the kernel support");

  OffspringFunction g;
  std::vector<OffspringKernel::Row> rows(kernel.num_types());
  double max_defect = 0.0;
  for (std::size_t a = 0; a < kernel.num_types(); ++a) {
    const auto type = static_cast<TypeIndex>(a);
    double row_sum = 0.0;
    for (const auto& [c, q] : kernel.row(type)) {
      const double w = nu(OffspringKey{type, c});
      const double ga = w > 0.0 ? std::log(w / (first(type) * q)) : -kInf;
      g.emplace(OffspringKey{type, c}, ga);
      const double qt = q * std::exp(ga);
      row_sum += qt;
      if (qt > 0.0) rows[a].emplace(c, qt);
    }
    max_defect = std::max(max_defect, std::abs(row_sum - 1.0));
  }

  OffspringKernel tilted(kernel.num_types(), std::move(rows));
  const PerronResult pr = perron_vector(mean_matrix(tilted));
  double entropy = 0.0, integral = 0.0;
  for (const auto& [key, w] : nu.mass()) {
    const double gv = g.at(key);
    integral += w * gv;
    entropy += w * std::log(w / (first(key.type) * kernel.prob(key.type, key.config)));
  }
  return TiltedKernel{std::move(g), std::move(tilted), pr.value, pr.vector, entropy, integral, max_defect};
}

// ---------------------------------------------------------------------------

ConstrainedMin constrained_entropy_min(const Eigen::VectorXd& phi, const OffspringKernel::Row& q,
                                       const DualOptions& options) {
  DualProblem problem;
  problem.target = phi;
  DualBlock block;
  block.features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q.size()), phi.size());
  Eigen::Index i = 0;
  for (const auto& [c, w] : q) {
    block.log_q.push_back(std::log(w));
    for (TypeIndex b : c.children) {
      if (b >= phi.size()) throw DomainError(ErrorCode::domain, "config type outside the moment vector");
      block.features(i, b) += 1.0;
    }
    ++i;
  }
  problem.blocks.push_back(std::move(block));
  ConstrainedMin out;
  out.dual = solve_moment_dual(problem, options);
  out.rate = out.dual.feasible ? RateValue::finite(out.dual.value) : RateValue::infinite(RateReason::domain);
  return out;
}

RateValue contraction_infimum(const PairMeasure& mu, const OffspringKernel& kernel, const DualOptions& options) {
  if (kernel.num_types() != mu.num_types()) throw DomainError(ErrorCode::domain, "kernel size mismatch");
  const Eigen::VectorXd m1 = mu.first_marginal();
  const Eigen::VectorXd m2 = mu.second_marginal();
  for (Eigen::Index a = 0; a < m1.size(); ++a)
    if (m1(a) > 0.0 && m2(a) <= 0.0) return RateValue::infinite(RateReason::marginal_violation);
  double total = 0.0;
  for (Eigen::Index a = 0; a < m1.size(); ++a) {
    if (m2(a) <= 0.0) continue;
    const Eigen::VectorXd phi = mu.mass.row(a).transpose() / m2(a);
    const auto part = constrained_entropy_min(phi, kernel.row(static_cast<TypeIndex>(a)), options);
    if (!part.rate.is_finite()) return part.rate;
    total += m2(a) * part.rate.value;
  }
  return RateValue::finite(total);
}

// ---------------------------------------------------------------------------

Eigen::Matrix2d genetic_mean_matrix(const GeneticModel& model) {
  const double ma = model.law_a.mean(), mb = model.law_b.mean(), p = model.mutation;
  Eigen::Matrix2d a;
  a << ma * (1.0 - p), mb * p, ma * p, mb * (1.0 - p);
  return a;
}

namespace {

DualBlock genetic_block(const OffspringLaw& law, double mutation, bool type_a, double weight) {
  DualBlock b;
  b.weight = weight;
  const int top = law.max_arity();
  std::vector<std::pair<int, int>> points;
  for (int l = 0; l <= top; ++l)
    for (int m = 0; m <= l; ++m) points.emplace_back(l - m, m);  // (A children, B children)
  b.features.resize(static_cast<Eigen::Index>(points.size()), 2);
  const double lp = std::log(mutation), lq = std::log1p(-mutation);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [n, m] = points[i];
    const int l = n + m;
    const double log_binom = std::lgamma(l + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m + 1.0);
    // a type-A parent keeps its type with prob 1 - p, a type-B parent mutates to A with prob p
    const double log_kind = type_a ? m * lp + n * lq : n * lp + m * lq;
    const double pl = law(l);
    b.log_q.push_back(pl > 0.0 ? std::log(pl) + log_binom + log_kind : -kInf);
    b.features(static_cast<Eigen::Index>(i), 0) = n;
    b.features(static_cast<Eigen::Index>(i), 1) = m;
  }
  return b;
}

}  // namespace

GeneticRate genetic_rate(double x, const GeneticModel& model, const DualOptions& options) {
  GeneticRate out;
  if (!(x >= 0.0) || !std::isfinite(x)) {
    out.rate = RateValue::infinite(RateReason::domain);
    out.derivative = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  if (!(model.mutation > 0.0 && model.mutation < 1.0))
    throw DomainError(ErrorCode::invalid_model, "mutation probability must lie in (0, 1)");
  const double wa = x / (x + 1.0), wb = 1.0 / (x + 1.0);
  DualProblem problem;
  problem.blocks.push_back(genetic_block(model.law_a, model.mutation, true, wa));
  problem.blocks.push_back(genetic_block(model.law_b, model.mutation, false, wb));
  problem.target = Eigen::Vector2d(wa, wb);
  out.dual = solve_moment_dual(problem, options);
  if (!out.dual.feasible) {
    out.rate = RateValue::infinite(RateReason::domain);
    out.derivative = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.rate = RateValue::finite(out.dual.value);
  const auto& lam = out.dual.multipliers;
  if (std::isfinite(lam(0)) && std::isfinite(lam(1)))
    out.derivative = ((lam(0) - out.dual.log_partition[0]) - (lam(1) - out.dual.log_partition[1])) /
                     ((x + 1.0) * (x + 1.0));
  else
    out.derivative = std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace gwldp
