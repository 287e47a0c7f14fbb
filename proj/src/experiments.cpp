#include "gwldp/experiments.hpp"

#include "gwldp/error.hpp"
#include "gwldp/sampler.hpp"
#include "gwldp/size_law.hpp"

#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gwldp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CurveSeries decay_curve(const GWSpec& spec, int n_max) {
  if (!spec.is_critical())
    throw DomainError(ErrorCode::domain, "decay curve needs a critical spec (rho = " + format_double(spec.spectral().rho) + ")");
  const auto table = size_law(spec, n_max);
  const auto admissible = admissible_set(table, spec.root());
  CurveSeries out;
  out.label = "decay";
  out.x_name = "n";
  out.meta["method"] = "exact size law";
  for (int n : admissible.members()) out.rows.push_back({double(n), -table.log_total(spec.root(), n) / n, {}, {}, false, ""});
  return out;
}

KeyEvent pair_fraction_at_least(std::size_t num_types, TypeIndex a, TypeIndex b, double threshold) {
  const auto cell = static_cast<std::size_t>(a) * num_types + static_cast<std::size_t>(b);
  return [cell, threshold](const std::string& key, int n) {
    if (n < 2) return false;
    const auto cells = parse_pair_counts_key(key);
    return static_cast<double>(cells.at(cell)) >= threshold * (n - 1) - 1e-12;
  };
}

CurveSeries ldp_curve(const GWSpec& spec, const KeyEvent& event, const std::vector<int>& ns,
                      const LdpOptions& options) {
  CurveSeries out;
  out.label = "ldp";
  out.x_name = "n";
  out.meta["method"] = options.method == LdpMethod::exact ? "exact" : "mc";
  if (options.method == LdpMethod::mc) {
    out.meta["samples"] = std::to_string(options.samples);
    out.meta["seed"] = std::to_string(options.seed);
  }
  if (ns.empty()) return out;

  std::vector<ExactDistribution> dp;
  const bool use_dp = options.method == LdpMethod::exact && options.kind == StatisticKind::pair_counts &&
                      spec.num_types() <= 2;
  if (use_dp) dp = pair_count_distributions(spec, *std::max_element(ns.begin(), ns.end()));

  for (int n : ns) {
    CurveRow row;
    row.x = n;
    row.reference = options.rate_reference;
    if (options.method == LdpMethod::exact) {
      const ExactDistribution dist =
          use_dp ? dp[static_cast<std::size_t>(n - 1)] : exact_statistic_distribution(spec, n, options.kind, options.k);
      const double prob = conditioned_event_probability(dist, [&](const std::string& key) { return event(key, n); });
      row.value = prob > 0.0 ? -std::log(prob) / n : kInf;
      if (prob <= 0.0) row.note = "empty event";
    } else {
      const auto trees = sample_many(spec, n, options.samples, options.seed, SamplerMethod::exact, options.threads,
                                     static_cast<std::uint64_t>(n) << 32);
      std::size_t hits = 0;
      for (const auto& t : trees) hits += event(statistic_key(t, spec.num_types(), options.kind, options.k), n) ? 1 : 0;
      const double total = static_cast<double>(trees.size());
      if (hits == 0) {
        // 3/N is the 95% upper confidence bound on P after zero hits
        row.value = -std::log(3.0 / total) / n;
        row.lower_bound = true;
        row.note = "no hits";
      } else {
        const double phat = static_cast<double>(hits) / total;
        row.value = -std::log(phat) / n;
        row.std_error = std::sqrt(phat * (1.0 - phat) / total) / (phat * n);
      }
    }
    out.rows.push_back(row);
  }
  return out;
}

GridMinimum grid_infimum_pair_rate(const OffspringLaw& p, const PairKernel& q,
                                   const std::function<bool(const Eigen::Matrix2d&)>& region, double step) {
  if (q.num_types() != 2) throw DomainError(ErrorCode::domain, "grid infimum covers two types");
  GridMinimum best;
  auto eval = [&](const Eigen::Vector3d& z, Eigen::Matrix2d& m) {
    const double last = 1.0 - z.sum();
    if ((z.array() < 0.0).any() || last < -1e-15) return kInf;
    m << z(0), z(1), z(2), std::max(0.0, last);
    if (!region(m)) return kInf;
    ++best.evaluated;
    const RateValue r = pair_rate(PairMeasure(m), p, q);
    return r.value;
  };

  const int steps = static_cast<int>(std::lround(1.0 / step));
  Eigen::Vector3d best_z = Eigen::Vector3d::Zero();
  Eigen::Matrix2d m;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; i + j <= steps; ++j)
      for (int l = 0; i + j + l <= steps; ++l) {
        const Eigen::Vector3d z(i * step, j * step, l * step);
        const double v = eval(z, m);
        if (v < best.value) {
          best.value = v;
          best_z = z;
        }
      }
  if (!std::isfinite(best.value)) return best;

  // pattern search over coordinate and pairwise-exchange directions
  std::vector<Eigen::Vector3d> dirs;
  for (int i = 0; i < 3; ++i) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(i) = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
    for (int j = i + 1; j < 3; ++j) {
      Eigen::Vector3d f = e;
      f(j) = -1.0;
      dirs.push_back(f);
      dirs.push_back(-f);
    }
  }
  double h = step / 2.0;
  while (h > 1e-12) {
    bool improved = false;
    for (const auto& d : dirs) {
      const Eigen::Vector3d z = best_z + h * d;
      const double v = eval(z, m);
      if (v < best.value) {
        best.value = v;
        best_z = z;
        improved = true;
      }
    }
    if (!improved) h /= 2.0;
  }
  best.argmin.resize(2, 2);
  best.argmin << best_z(0), best_z(1), best_z(2), std::max(0.0, 1.0 - best_z.sum());
  return best;
}

CurveSeries tilt_invariance_report(const OffspringLaw& p, const PairKernel& q, const Eigen::VectorXd& root,
                                   const std::vector<double>& thetas, int n) {
  const auto alphabet = index_alphabet(q.num_types());
  auto conditioned = [&](const OffspringLaw& law) {
    const GWSpec spec(alphabet, root, product_kernel(law, q));
    std::map<std::string, double> probs;
    double total = 0.0;
    enumerate_trees(spec, n, [&](const TypedTree& t, double w) {
      probs[serialize_indices(t)] += w;
      total += w;
    });
    if (!(total > 0.0)) throw DomainError(ErrorCode::null_conditioning, "no trees of size " + std::to_string(n));
    for (auto& [key, w] : probs) w /= total;
    return probs;
  };
  const auto base = conditioned(p);
  CurveSeries out;
  out.label = "tilt";
  out.x_name = "theta";
  out.meta["n"] = std::to_string(n);
  for (double theta : thetas) {
    const auto other = conditioned(p.tilted(theta));
    double tv = 0.0;
    for (const auto& [key, w] : base) {
      auto it = other.find(key);
      tv += std::abs(w - (it == other.end() ? 0.0 : it->second));
    }
    for (const auto& [key, w] : other)
      if (!base.count(key)) tv += w;
    out.rows.push_back({theta, 0.5 * tv, {}, {}, false, ""});
  }
  return out;
}

CurveSeries jk_monotonicity(const GenMeasureK& mu, const OffspringKernel& kernel, double shift_tol) {
  CurveSeries out;
  out.label = "jk";
  out.x_name = "k";
  for (int k = 1; k <= mu.k; ++k) {
    const RateValue r = kgen_rate_Jk(project(mu, k), kernel, shift_tol);
    out.rows.push_back({double(k), r.value, {}, {}, false, r.is_finite() ? "" : std::string(to_string(r.reason))});
  }
  return out;
}

GeneticModel critical_poisson_genetic(double eta, double mutation, int nmax) {
  if (!(eta > 0.0) || !(mutation > 0.0 && mutation < 1.0))
    throw DomainError(ErrorCode::invalid_model, "genetic model needs eta > 0 and mutation in (0, 1)");
  auto model_at = [&](double lambda_b) {
    return GeneticModel{OffspringLaw::poisson(eta * lambda_b, nmax), OffspringLaw::poisson(lambda_b, nmax), mutation};
  };
  auto rho = [&](double lambda_b) {
    const Eigen::Matrix2d a = genetic_mean_matrix(model_at(lambda_b));
    const double half = 0.5 * a.trace();
    return half + std::sqrt(half * half - a.determinant());
  };
  double lo = 1e-9, hi = 1.0;
  while (rho(hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rho(mid) < 1.0 ? lo : hi) = mid;
  }
  return model_at(0.5 * (lo + hi));
}

GeneticScan genetic_scan(const GeneticModel& model, const std::vector<double>& x_grid) {
  GeneticScan out;
  out.curve.label = "genetic";
  out.curve.x_name = "x";
  out.eta = model.law_a.mean() / model.law_b.mean();
  out.curve.meta["eta"] = format_double(out.eta);
  out.curve.meta["mutation"] = format_double(model.mutation);
  double best = kInf;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    CurveRow row;
    row.x = x_grid[i];
    try {
      const GeneticRate r = genetic_rate(x_grid[i], model);
      row.value = r.rate.value;
      if (!r.rate.is_finite()) row.note = std::string(to_string(r.rate.reason));
    } catch (const DomainError& e) {
      row.value = std::numeric_limits<double>::quiet_NaN();
      row.note = std::string(to_string(e.code()));
    }
    if (row.value < best) {
      best = row.value;
      best_i = i;
    }
    out.curve.rows.push_back(row);
  }
  if (!std::isfinite(best)) throw DomainError(ErrorCode::dual_failure, "genetic scan found no finite rate");

  double lo = x_grid[best_i > 0 ? best_i - 1 : best_i];
  double hi = x_grid[best_i + 1 < x_grid.size() ? best_i + 1 : best_i];
  while (hi - lo > 1e-13 * std::max(1.0, hi) && out.refinements < 200) {
    const double mid = 0.5 * (lo + hi);
    const double d = genetic_rate(mid, model).derivative;
    if (std::isnan(d)) break;
    (d > 0.0 ? hi : lo) = mid;
    ++out.refinements;
  }
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  out.argmin = 0.5 * (lo + hi);
  const double x = out.argmin, p = model.mutation;
  out.residual = std::abs(x / (1.0 + x) - (x * out.eta * (1.0 - p) + p) / (x * out.eta + 1.0));
  out.rate_at_argmin = genetic_rate(x, model).rate.value;
  out.curve.meta["argmin"] = format_double(out.argmin);
  out.curve.meta["fixed_point_residual"] = format_double(out.residual);
  out.curve.meta["rate_at_argmin"] = format_double(out.rate_at_argmin);
  return out;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17e", v);
  return buf.data();
}

std::string spec_digest(const GWSpec& spec) {
  std::ostringstream dump;
  for (const auto& l : spec.alphabet().labels()) dump << l << ';';
  dump << '|';
  for (Eigen::Index a = 0; a < spec.root().size(); ++a) dump << format_double(spec.root()(a)) << ';';
  dump << '|';
  for (std::size_t a = 0; a < spec.num_types(); ++a) {
    for (const auto& [c, q] : spec.kernel().row(static_cast<TypeIndex>(a))) {
      dump << a << ':';
      for (TypeIndex t : c.children) dump << t << '.';
      dump << '=' << format_double(q) << ';';
    }
    dump << '/';
  }
  dump << '|' << format_double(spec.criticality_tol());
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : dump.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016" PRIx64, h);
  return buf.data();
}

void write_csv(std::ostream& out, const CurveSeries& series) {
  if (!series.label.empty()) out << "# series: " << series.label << '\n';
  for (const auto& [key, value] : series.meta) out << "# " << key << ": " << value << '\n';
  out << series.x_name << ",value,reference,std_error,lower_bound,note\n";
  for (const auto& row : series.rows) {
    std::string note = row.note;
    for (char& ch : note)
      if (ch == ',' || ch == '\n') ch = ' ';
    out << format_double(row.x) << ',' << format_double(row.value) << ','
        << (row.reference ? format_double(*row.reference) : "") << ','
        << (row.std_error ? format_double(*row.std_error) : "") << ',' << (row.lower_bound ? 1 : 0) << ',' << note
        << '\n';
  }
}

}  // namespace gwldp
