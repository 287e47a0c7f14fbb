// gwldp: command-line front end.
//
// Exit status: 0 success, 1 domain error (reason code on stderr), 2 usage
// or config error (offending field on stderr).

#include "gwldp/empirical.hpp"
#include "gwldp/enumerate.hpp"
#include "gwldp/error.hpp"
#include "gwldp/experiments.hpp"
#include "gwldp/model.hpp"
#include "gwldp/model_io.hpp"
#include "gwldp/rates.hpp"
#include "gwldp/sampler.hpp"
#include "gwldp/size_law.hpp"
#include "gwldp/tree.hpp"
#include "gwldp/verify/acceptance.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace gwldp;

namespace {

struct Options {
  std::string model;
  std::string out;
  std::uint64_t seed = 1;
  std::optional<int> n;
  int k = 1;
  int nmax = 0;
  double tol_shift = kShiftTolerance;

  // command specific
  std::string law;
  std::string measure;
  std::string tree;
  std::optional<double> theta;
  double x = 1.0;
  std::size_t count = 1;
  std::string method = "exact";
  unsigned threads = 1;
  std::uint64_t stream = 0;
  int size_cap = 1'000'000;
  std::string kind = "pair";
  std::string emp_kind = "all";
  std::string backend = "auto";
  double guard = 1e7;
  std::string from = "";
  std::string to = "";
  double threshold = 0.5;
  std::vector<int> n_list;
  std::size_t samples = 10000;
  std::string reference = "auto";
  std::vector<double> thetas = {-0.5, 0.5};
  double eta = 1.2;
  double mutation = 0.05;
  double xmin = 0.1;
  double xmax = 10.0;
  int points = 200;
  std::vector<int> only;
};

std::string fd(double v) { return format_double(v); }

ModelConfig need_model(const Options& o) {
  if (o.model.empty()) throw ConfigError("--model", "required for this command");
  return load_model_config(o.model);
}

int need_n(const Options& o) {
  if (!o.n) throw ConfigError("--n", "required for this command");
  return *o.n;
}

int need_nmax(const Options& o) {
  if (o.nmax <= 0) throw ConfigError("--nmax", "required for this command (positive)");
  return o.nmax;
}

/// --law (inline JSON, or @file) or the law of the model file.
OffspringLaw need_law(const Options& o) {
  if (!o.law.empty()) return parse_law(o.law.front() == '@' ? read_text_file(o.law.substr(1)) : o.law);
  if (!o.model.empty()) {
    auto cfg = load_model_config(o.model);
    if (cfg.law) return *cfg.law;
    throw ConfigError("law", "model file has no product-form law");
  }
  throw ConfigError("--law", "required for this command (or --model with a law)");
}

std::string need_measure_text(const Options& o) {
  if (o.measure.empty()) throw ConfigError("--measure", "required for this command");
  return read_text_file(o.measure);
}

void header(std::ostream& out, const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
  out << "# command: " << command << '\n';
  for (const auto& [k, v] : kv) out << "# " << k << ": " << v << '\n';
}

std::string vec(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + fd(v(i));
  return s;
}

std::string labels_of(const std::vector<TypeIndex>& idx, const TypeAlphabet& alphabet) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + alphabet.label(idx[i]);
  return s;
}

std::string config_string(const OffspringConfig& c, const TypeAlphabet& alphabet) {
  return "(" + labels_of(c.children, alphabet) + ")";
}

std::string csv_quote(const std::string& s) { return '"' + s + '"'; }

StatisticKind kind_of(const std::string& s) {
  if (s == "pair") return StatisticKind::pair_counts;
  if (s == "offspring") return StatisticKind::offspring_counts;
  if (s == "kgen") return StatisticKind::kgen_counts;
  throw ConfigError("--kind", "expected pair, offspring or kgen");
}

// ---------------------------------------------------------------------------
// Commands

void cmd_model_validate(const Options& o, std::ostream& out) {
  const GWSpec spec = need_model(o).spec;
  const SpectralData& sd = spec.spectral();
  header(out, "model validate", {{"spec", spec_digest(spec)}});
  out << "types: " << labels_of([&] {
    std::vector<TypeIndex> all;
    for (std::size_t a = 0; a < spec.num_types(); ++a) all.push_back(static_cast<TypeIndex>(a));
    return all;
  }(), spec.alphabet()) << '\n';
  out << "rho: " << fd(sd.rho) << '\n';
  out << "critical: " << (spec.is_critical() ? 1 : 0) << '\n';
  out << "criticality_tol: " << fd(spec.criticality_tol()) << '\n';
  out << "irreducible: " << (sd.irreducible ? 1 : 0) << '\n';
  out << "weakly_irreducible: " << (sd.weakly_irreducible ? 1 : 0) << '\n';
  if (sd.partition) {
    out << "recurrent: " << labels_of(sd.partition->recurrent, spec.alphabet()) << '\n';
    out << "transient: " << labels_of(sd.partition->transient, spec.alphabet()) << '\n';
  }
  out << "right_eigenvector: " << vec(sd.right) << '\n';
  out << "left_eigenvector: " << vec(sd.left) << '\n';
  if (!sd.weakly_irreducible)
    throw DomainError(ErrorCode::not_weakly_irreducible, "no recurrent/transient partition");
}

void cmd_model_tilt(const Options& o, std::ostream& out) {
  const OffspringLaw p = need_law(o);
  double theta = 0.0;
  OffspringLaw tilted = p;
  if (o.theta) {
    theta = *o.theta;
    tilted = p.tilted(theta);
  } else {
    const CriticalTilt t = find_critical_tilt(p);
    theta = t.theta;
    tilted = t.law;
  }
  header(out, "model tilt", {{"mode", o.theta ? "given theta" : "critical"}});
  out << "theta: " << fd(theta) << '\n';
  out << "mean: " << fd(p.mean()) << '\n';
  out << "tilted_mean: " << fd(tilted.mean()) << '\n';
  out << "arity,prob,tilted_prob\n";
  for (int n = 0; n <= p.max_arity(); ++n) out << n << ',' << fd(p(n)) << ',' << fd(tilted(n)) << '\n';
}

void cmd_sizelaw(const Options& o, std::ostream& out) {
  const GWSpec spec = need_model(o).spec;
  const int nmax = need_nmax(o);
  const SizeLawTable table = size_law(spec, nmax);
  const AdmissibleSet adm = admissible_set(table, spec.root());
  std::string residues;
  for (std::size_t i = 0; i < adm.residues.size(); ++i) residues += (i ? "," : "") + std::to_string(adm.residues[i]);
  header(out, "sizelaw", {{"spec", spec_digest(spec)},
                          {"nmax", std::to_string(nmax)},
                          {"period", std::to_string(adm.period)},
                          {"residues", residues},
                          {"stabilization", std::to_string(adm.stabilization)}});
  out << "n,log_prob,admissible\n";
  for (int n = 1; n <= nmax; ++n)
    out << n << ',' << fd(table.log_total(spec.root(), n)) << ',' << (adm.contains(n) ? 1 : 0) << '\n';
}

void cmd_sample(const Options& o, std::ostream& out) {
  const GWSpec spec = need_model(o).spec;
  if (o.method != "exact" && o.method != "rejection") throw ConfigError("--method", "expected exact or rejection");
  header(out, "sample", {{"spec", spec_digest(spec)},
                         {"n", o.n ? std::to_string(*o.n) : "unconditioned"},
                         {"count", std::to_string(o.count)},
                         {"seed", std::to_string(o.seed)},
                         {"first_stream", std::to_string(o.stream)},
                         {"method", o.n ? o.method : "unconditioned"},
                         {"size_cap", std::to_string(o.size_cap)}});
  if (!o.n) {
    for (std::size_t i = 0; i < o.count; ++i) {
      RngHandle rng(o.seed, o.stream + i);
      const auto t = sample_unconditioned(spec, rng, o.size_cap);
      out << (t ? serialize(*t, spec.alphabet()) : std::string("overflow")) << '\n';
    }
    return;
  }
  const auto method = o.method == "exact" ? SamplerMethod::exact : SamplerMethod::rejection;
  for (const auto& t : sample_many(spec, *o.n, o.count, o.seed, method, o.threads, o.stream))
    out << serialize(t, spec.alphabet()) << '\n';
}

void empirical_csv(const Options& o, const GWSpec& spec, const TypedTree& tree, std::ostream& out);

void cmd_empirical(const Options& o, std::ostream& out) {
  const GWSpec spec = need_model(o).spec;
  if (o.tree.empty()) throw ConfigError("--tree", "required for this command");
  const TypedTree tree = parse_tree(o.tree, spec.alphabet());
  const auto& alphabet = spec.alphabet();
  const std::size_t nt = spec.num_types();
  if (o.k < 1) throw ConfigError("--k", "must be at least 1");
  if (o.emp_kind != "all" && o.emp_kind != "pair" && o.emp_kind != "offspring" && o.emp_kind != "kgen")
    throw ConfigError("--kind", "expected all, pair, offspring or kgen");
  header(out, "empirical", {{"spec", spec_digest(spec)},
                            {"kind", o.emp_kind},
                            {"k", std::to_string(o.k)},
                            {"tol_shift", fd(o.tol_shift)},
                            {"size", std::to_string(tree.size())}});
  if (o.emp_kind != "all") {
    empirical_csv(o, spec, tree, out);
    return;
  }
  out << "size: " << tree.size() << '\n';
  out << "height: " << tree.height() << '\n';

  const PairCounts pc = pair_counts(tree, nt);
  out << "pair_counts: " << pair_counts_key(pc.cells) << '\n';
  if (pc.edges > 0) {
    const PairMeasure pm = to_measure(pc);
    out << "pair_measure:\n";
    for (std::size_t a = 0; a < nt; ++a)
      for (std::size_t b = 0; b < nt; ++b)
        out << "  " << alphabet.label(static_cast<TypeIndex>(a)) << ',' << alphabet.label(static_cast<TypeIndex>(b))
            << ',' << fd(pm.mass(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) << '\n';
  }

  const OffspringCounts oc = offspring_counts(tree, nt);
  out << "offspring_counts: " << offspring_counts_key(oc) << '\n';
  out << "offspring_measure:\n";
  for (const auto& [key, c] : oc.counts)
    out << "  " << alphabet.label(key.type) << ',' << config_string(key.config, alphabet) << ','
        << fd(static_cast<double>(c) / static_cast<double>(oc.total)) << '\n';
  const auto defect = shift_defect(oc);
  out << "shift_defect_counts:";
  for (long long d : defect) out << ' ' << d;
  out << '\n';
  out << "shift_invariant: " << (is_shift_invariant(to_measure(oc), o.tol_shift) ? 1 : 0) << '\n';

  const GenCounts gc = kgen_counts(tree, o.k);
  out << "kgen_counts(k=" << o.k << "): " << kgen_counts_key(gc) << '\n';
}

/// CSV key,count,mass of one statistic, keys written with type labels.
void empirical_csv(const Options& o, const GWSpec& spec, const TypedTree& tree, std::ostream& out) {
  const auto& alphabet = spec.alphabet();
  const std::size_t nt = spec.num_types();
  out << "key,count,mass\n";
  if (o.emp_kind == "pair") {
    const PairCounts pc = pair_counts(tree, nt);
    if (pc.edges == 0) throw DomainError(ErrorCode::no_edges, "root-only tree has no edges");
    for (std::size_t a = 0; a < nt; ++a)
      for (std::size_t b = 0; b < nt; ++b) {
        const long long c = pc.at(static_cast<TypeIndex>(a), static_cast<TypeIndex>(b));
        out << csv_quote(alphabet.label(static_cast<TypeIndex>(a)) + ">" + alphabet.label(static_cast<TypeIndex>(b)))
            << ',' << c << ',' << fd(static_cast<double>(c) / static_cast<double>(pc.edges)) << '\n';
      }
  } else if (o.emp_kind == "offspring") {
    const OffspringCounts oc = offspring_counts(tree, nt);
    for (const auto& [key, c] : oc.counts)
      out << csv_quote(alphabet.label(key.type) + ":" + config_string(key.config, alphabet)) << ',' << c << ','
          << fd(static_cast<double>(c) / static_cast<double>(oc.total)) << '\n';
  } else {
    const GenCounts gc = kgen_counts(tree, o.k);
    for (const auto& [key, c] : gc.counts)
      out << csv_quote(serialize(parse_pattern(key), alphabet)) << ',' << c << ','
          << fd(static_cast<double>(c) / static_cast<double>(gc.total)) << '\n';
  }
}

void cmd_rate_cramer(const Options& o, std::ostream& out) {
  const OffspringLaw p = need_law(o);
  const RateValue r = cramer_rate(p, o.x);
  header(out, "rate cramer", {{"x", fd(o.x)}});
  out << "value: " << fd(r.value) << '\n';
  out << "reason: " << to_string(r.reason) << '\n';
}

void cmd_rate_pair(const Options& o, std::ostream& out) {
  const ModelConfig cfg = need_model(o);
  if (!cfg.law || !cfg.transition) throw ConfigError("law", "pair rate needs a product-form model (law + transition)");
  const PairMeasure mu = parse_pair_measure(need_measure_text(o), cfg.spec.alphabet());
  const RateValue r = pair_rate(mu, *cfg.law, *cfg.transition);
  header(out, "rate pair", {{"spec", spec_digest(cfg.spec)}});
  out << "value: " << fd(r.value) << '\n';
  out << "reason: " << to_string(r.reason) << '\n';
  out << "first_marginal: " << vec(mu.first_marginal()) << '\n';
  out << "second_marginal: " << vec(mu.second_marginal()) << '\n';
  const RateValue c = contraction_infimum(mu, cfg.spec.kernel());
  out << "contraction: " << fd(c.value) << '\n';
  out << "contraction_reason: " << to_string(c.reason) << '\n';
}

void cmd_rate_offspring(const Options& o, std::ostream& out) {
  const GWSpec spec = need_model(o).spec;
  const OffspringMeasure nu = parse_offspring_measure(need_measure_text(o), spec.alphabet());
  const RateValue r = offspring_rate_J(nu, spec.kernel(), o.tol_shift);
  header(out, "rate offspring", {{"spec", spec_digest(spec)}, {"tol_shift", fd(o.tol_shift)}});
  out << "value: " << fd(r.value) << '\n';
  out << "reason: " << to_string(r.reason) << '\n';
  out << "shift_defect: " << vec(shift_defect(nu)) << '\n';
  if (!r.is_finite()) return;
  try {
    const TiltedKernel t = tilted_kernel_from_measure(nu, spec.kernel(), o.tol_shift);
    out << "tilt_rho: " << fd(t.rho) << '\n';
    out << "tilt_u: " << vec(t.u) << '\n';
    out << "tilt_entropy: " << fd(t.entropy) << '\n';
    out << "tilt_g_integral: " << fd(t.g_integral) << '\n';
    out << "tilt_max_row_defect: " << fd(t.max_row_defect) << '\n';
    out << "variational_at_tilt: " << fd(variational_functional(nu, t.g, spec.kernel())) << '\n';
  } catch (const DomainError& e) {
    out << "tilt: " << to_string(e.code()) << '\n';
  }
}

void cmd_rate_kgen(const Options& o, std::ostream& out) {
  const GWSpec spec = need_model(o).spec;
  const GenMeasureK mu = parse_gen_measure(need_measure_text(o), spec.alphabet());
  header(out, "rate kgen", {{"spec", spec_digest(spec)}, {"k", std::to_string(mu.k)}, {"tol_shift", fd(o.tol_shift)}});
  const RateValue r = kgen_rate_Jk(mu, spec.kernel(), o.tol_shift);
  out << "value: " << fd(r.value) << '\n';
  out << "reason: " << to_string(r.reason) << '\n';
  out << "k,J_k,reason\n";
  for (int j = 1; j <= mu.k; ++j) {
    const RateValue rj = kgen_rate_Jk(project(mu, j), spec.kernel(), o.tol_shift);
    out << j << ',' << fd(rj.value) << ',' << to_string(rj.reason) << '\n';
  }
}

GeneticModel genetic_model(const Options& o) {
  return critical_poisson_genetic(o.eta, o.mutation, o.nmax > 0 ? o.nmax : 40);
}

void cmd_rate_genetic(const Options& o, std::ostream& out) {
  const GeneticModel model = genetic_model(o);
  const GeneticRate r = genetic_rate(o.x, model);
  header(out, "rate genetic", {{"x", fd(o.x)},
                               {"eta", fd(o.eta)},
                               {"mutation", fd(o.mutation)},
                               {"nmax", std::to_string(o.nmax > 0 ? o.nmax : 40)}});
  out << "value: " << fd(r.rate.value) << '\n';
  out << "reason: " << to_string(r.rate.reason) << '\n';
  out << "derivative: " << fd(r.derivative) << '\n';
  out << "multipliers: " << vec(r.dual.multipliers) << '\n';
  out << "iterations: " << r.dual.iterations << '\n';
  out << "converged: " << (r.dual.converged ? 1 : 0) << '\n';
  out << "feasible: " << (r.dual.feasible ? 1 : 0) << '\n';
  out << "residual: " << fd(r.dual.residual) << '\n';
}

void cmd_exactdist(const Options& o, std::ostream& out) {
  const GWSpec spec = need_model(o).spec;
  const int n = need_n(o);
  ExactBackend backend = ExactBackend::automatic;
  if (o.backend == "enumeration") backend = ExactBackend::enumeration;
  else if (o.backend == "dp") backend = ExactBackend::count_dp;
  else if (o.backend != "auto") throw ConfigError("--backend", "expected auto, enumeration or dp");
  const ExactDistribution d = exact_statistic_distribution(spec, n, kind_of(o.kind), o.k, backend, o.guard);
  if (!(d.total_mass > 0.0)) throw DomainError(ErrorCode::null_conditioning, "no trees of size " + std::to_string(n));
  header(out, "exactdist", {{"spec", spec_digest(spec)},
                            {"n", std::to_string(n)},
                            {"kind", o.kind},
                            {"k", std::to_string(o.k)},
                            {"backend", o.backend},
                            {"total_mass", fd(d.total_mass)}});
  out << "key,probability\n";
  for (const auto& [key, p] : d.probs) out << csv_quote(key) << ',' << fd(p / d.total_mass) << '\n';
}

void cmd_experiment_decay(const Options& o, std::ostream& out) {
  const GWSpec spec = need_model(o).spec;
  CurveSeries c = decay_curve(spec, need_nmax(o));
  c.meta["spec"] = spec_digest(spec);
  c.meta["nmax"] = std::to_string(o.nmax);
  write_csv(out, c);
}

void cmd_experiment_ldp(const Options& o, std::ostream& out) {
  const ModelConfig cfg = need_model(o);
  const GWSpec& spec = cfg.spec;
  if (o.from.empty() || o.to.empty()) throw ConfigError("--from/--to", "event types required");
  const auto fa = spec.alphabet().find(o.from);
  const auto fb = spec.alphabet().find(o.to);
  if (!fa) throw ConfigError("--from", "unknown type label '" + o.from + "'");
  if (!fb) throw ConfigError("--to", "unknown type label '" + o.to + "'");
  const TypeIndex a = *fa, b = *fb;

  std::vector<int> ns = o.n_list;
  if (ns.empty()) {
    const int nmax = need_nmax(o);
    for (int n : admissible_set(size_law(spec, nmax), spec.root()).members())
      if (n > 1) ns.push_back(n);
  }

  LdpOptions opts;
  opts.kind = StatisticKind::pair_counts;
  opts.samples = o.samples;
  opts.seed = o.seed;
  opts.threads = o.threads;
  if (o.method == "mc") opts.method = LdpMethod::mc;
  else if (o.method != "exact") throw ConfigError("--method", "expected exact or mc");

  std::string ref_note = "none";
  if (o.reference == "auto") {
    if (cfg.law && cfg.transition && spec.num_types() == 2) {
      const double thr = o.threshold;
      const GridMinimum g = grid_infimum_pair_rate(
          *cfg.law, *cfg.transition, [&](const Eigen::Matrix2d& m) { return m(a, b) >= thr; });
      opts.rate_reference = g.value;
      ref_note = "grid infimum of the pair rate";
    }
  } else if (o.reference != "none") {
    try {
      opts.rate_reference = std::stod(o.reference);
      ref_note = "given";
    } catch (const std::exception&) {
      throw ConfigError("--reference", "expected auto, none or a number");
    }
  }
  CurveSeries c = ldp_curve(spec, pair_fraction_at_least(spec.num_types(), a, b, o.threshold), ns, opts);
  c.meta["spec"] = spec_digest(spec);
  c.meta["event"] = "L(" + o.from + "," + o.to + ") >= " + fd(o.threshold);
  c.meta["reference"] = ref_note;
  write_csv(out, c);
}

void cmd_experiment_tilt(const Options& o, std::ostream& out) {
  const ModelConfig cfg = need_model(o);
  if (!cfg.law || !cfg.transition) throw ConfigError("law", "tilt experiment needs a product-form model");
  CurveSeries c = tilt_invariance_report(*cfg.law, *cfg.transition, cfg.spec.root(), o.thetas, o.n.value_or(7));
  c.meta["spec"] = spec_digest(cfg.spec);
  write_csv(out, c);
}

void cmd_experiment_jk(const Options& o, std::ostream& out) {
  const GWSpec spec = need_model(o).spec;
  GenMeasureK mu;
  std::string source;
  if (!o.measure.empty()) {
    mu = parse_gen_measure(read_text_file(o.measure), spec.alphabet());
    source = o.measure;
  } else {
    if (o.k < 1) throw ConfigError("--k", "must be at least 1");
    mu = stationary_gen_measure(spec.kernel(), spec.spectral().right, o.k);
    source = "stationary";
  }
  CurveSeries c = jk_monotonicity(mu, spec.kernel(), o.tol_shift);
  c.meta["spec"] = spec_digest(spec);
  c.meta["measure"] = source;
  c.meta["tol_shift"] = fd(o.tol_shift);
  write_csv(out, c);
}

void cmd_experiment_genetic(const Options& o, std::ostream& out) {
  if (o.points < 2 || !(o.xmin > 0.0) || !(o.xmax > o.xmin)) throw ConfigError("--xmin/--xmax/--points", "bad grid");
  std::vector<double> grid;
  for (int i = 0; i < o.points; ++i) grid.push_back(o.xmin + (o.xmax - o.xmin) * i / (o.points - 1));
  GeneticScan s = genetic_scan(genetic_model(o), grid);
  s.curve.meta["nmax"] = std::to_string(o.nmax > 0 ? o.nmax : 40);
  write_csv(out, s.curve);
}

void cmd_verify_all(const Options& o, std::ostream& out) {
  verify::AcceptanceOptions opts;
  opts.only = o.only;
  opts.threads = o.threads;
  const auto results = verify::run_acceptance(opts);
  verify::print_results(out, results, false);
  verify::print_results(std::cerr, results, true);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  if (failed) throw DomainError(ErrorCode::verification_failed, std::to_string(failed) + " criteria failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large deviations of tree-indexed Markov chains: models, exact laws, sampling, rates"};
  app.require_subcommand(1);
  auto opt = std::make_shared<Options>();
  Options& o = *opt;
  std::function<void(const Options&, std::ostream&)> action;

  auto common = [&](CLI::App* c) {
    c->add_option("--model,-m", o.model, "model JSON file");
    c->add_option("--out,-o", o.out, "output file (default stdout)");
  };
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help,
                  void (*fn)(const Options&, std::ostream&)) {
    CLI::App* c = parent->add_subcommand(name, help);
    common(c);
    c->callback([&action, fn] { action = fn; });
    return c;
  };

  CLI::App* model = app.add_subcommand("model", "model checks")->require_subcommand(1);
  leaf(model, "validate", "Perron root, partition, criticality", cmd_model_validate);
  auto* tilt = leaf(model, "tilt", "exponential tilt of the offspring law", cmd_model_tilt);
  tilt->add_option("--law", o.law, "law JSON (inline or @file)");
  tilt->add_option("--theta", o.theta, "tilt parameter (default: critical tilt)");

  auto* sl = leaf(&app, "sizelaw", "exact size law and admissible sizes", cmd_sizelaw);
  sl->add_option("--nmax", o.nmax, "largest size");

  auto* sm = leaf(&app, "sample", "sample trees", cmd_sample);
  sm->add_option("--n", o.n, "conditioned size (omit for unconditioned)");
  sm->add_option("--count", o.count, "number of trees");
  sm->add_option("--seed", o.seed, "seed");
  sm->add_option("--stream", o.stream, "first stream id");
  sm->add_option("--method", o.method, "exact | rejection");
  sm->add_option("--threads", o.threads, "worker threads");
  sm->add_option("--size-cap", o.size_cap, "overflow cap for unconditioned draws");

  auto* em = leaf(&app, "empirical", "empirical measures of a tree", cmd_empirical);
  em->add_option("--tree", o.tree, "tree, e.g. a(b,a(b,b))");
  em->add_option("--k", o.k, "pattern depth");
  em->add_option("--kind", o.emp_kind, "all | pair | offspring | kgen");
  em->add_option("--tol-shift", o.tol_shift, "shift-invariance tolerance");

  CLI::App* rate = app.add_subcommand("rate", "rate functions")->require_subcommand(1);
  auto* rc = leaf(rate, "cramer", "Cramer rate of the offspring law", cmd_rate_cramer);
  rc->add_option("--law", o.law, "law JSON (inline or @file)");
  rc->add_option("--x", o.x, "point");
  auto* rp = leaf(rate, "pair", "pair-measure rate", cmd_rate_pair);
  rp->add_option("--measure", o.measure, "pair measure JSON file");
  auto* ro = leaf(rate, "offspring", "offspring-measure rate J", cmd_rate_offspring);
  ro->add_option("--measure", o.measure, "offspring measure JSON file");
  ro->add_option("--tol-shift", o.tol_shift, "shift-invariance tolerance");
  auto* rk = leaf(rate, "kgen", "k-generation rate J_k", cmd_rate_kgen);
  rk->add_option("--measure", o.measure, "k-generation measure JSON file");
  rk->add_option("--tol-shift", o.tol_shift, "shift-invariance tolerance");
  auto* rg = leaf(rate, "genetic", "two-type genetic model rate", cmd_rate_genetic);
  rg->add_option("--x", o.x, "type ratio");
  rg->add_option("--eta", o.eta, "mean ratio of the two laws");
  rg->add_option("--mutation", o.mutation, "mutation probability");
  rg->add_option("--nmax", o.nmax, "Poisson truncation (default 40)");

  auto* ed = leaf(&app, "exactdist", "exact law of a count statistic", cmd_exactdist);
  ed->add_option("--n", o.n, "tree size");
  ed->add_option("--kind", o.kind, "pair | offspring | kgen");
  ed->add_option("--k", o.k, "pattern depth for kgen");
  ed->add_option("--backend", o.backend, "auto | enumeration | dp");
  ed->add_option("--guard", o.guard, "largest tree count to enumerate");

  CLI::App* ex = app.add_subcommand("experiment", "numerical experiments (CSV)")->require_subcommand(1);
  auto* xd = leaf(ex, "decay", "-(1/n) log P{|T| = n}", cmd_experiment_decay);
  xd->add_option("--nmax", o.nmax, "largest size");
  auto* xl = leaf(ex, "ldp", "finite-n rates of {L(from,to) >= threshold}", cmd_experiment_ldp);
  xl->add_option("--from", o.from, "parent type");
  xl->add_option("--to", o.to, "child type");
  xl->add_option("--threshold", o.threshold, "event threshold");
  xl->add_option("--n-list", o.n_list, "sizes (default: admissible n <= nmax)")->delimiter(',');
  xl->add_option("--nmax", o.nmax, "largest size when --n-list is absent");
  xl->add_option("--method", o.method, "exact | mc");
  xl->add_option("--samples", o.samples, "Monte Carlo draws per size");
  xl->add_option("--seed", o.seed, "seed");
  xl->add_option("--threads", o.threads, "worker threads");
  xl->add_option("--reference", o.reference, "auto | none | value");
  auto* xt = leaf(ex, "tilt", "tilt invariance of the conditioned law", cmd_experiment_tilt);
  xt->add_option("--thetas", o.thetas, "tilt parameters")->delimiter(',');
  xt->add_option("--n", o.n, "tree size (default 7)");
  auto* xj = leaf(ex, "jk", "J_k ladder", cmd_experiment_jk);
  xj->add_option("--measure", o.measure, "k-generation measure JSON (default: stationary)");
  xj->add_option("--k", o.k, "depth of the stationary measure");
  xj->add_option("--tol-shift", o.tol_shift, "shift-invariance tolerance");
  auto* xg = leaf(ex, "genetic", "scan of the genetic-model rate", cmd_experiment_genetic);
  xg->add_option("--eta", o.eta, "mean ratio of the two laws");
  xg->add_option("--mutation", o.mutation, "mutation probability");
  xg->add_option("--nmax", o.nmax, "Poisson truncation (default 40)");
  xg->add_option("--xmin", o.xmin, "grid start");
  xg->add_option("--xmax", o.xmax, "grid end");
  xg->add_option("--points", o.points, "grid size");

  CLI::App* vf = app.add_subcommand("verify", "acceptance suite")->require_subcommand(1);
  auto* va = leaf(vf, "all", "run every acceptance criterion", cmd_verify_all);
  va->add_option("--only", o.only, "criterion ids")->delimiter(',');
  va->add_option("--threads", o.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  // Output is buffered so that a config error leaves no partial file; a
  // domain error still emits what was produced before it.
  std::ostringstream buf;
  auto emit = [&] {
    if (o.out.empty()) {
      std::cout << buf.str();
      return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw ConfigError("--out", "cannot open " + o.out);
    f << buf.str();
  };
  try {
    if (!action) throw ConfigError("", "no command");
    try {
      action(o, buf);
    } catch (const DomainError&) {
      emit();
      throw;
    }
    emit();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
}
