#include "gwldp/model.hpp"

#include "gwldp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace gwldp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_model: return "invalid_model";
    case ErrorCode::invalid_measure: return "invalid_measure";
    case ErrorCode::not_weakly_irreducible: return "not_weakly_irreducible";
    case ErrorCode::tilt_undefined: return "tilt_undefined";
    case ErrorCode::mean_one_unreachable: return "mean_one_unreachable";
    case ErrorCode::null_conditioning: return "null_conditioning";
    case ErrorCode::not_admissible: return "not_admissible";
    case ErrorCode::guard_exceeded: return "guard_exceeded";
    case ErrorCode::budget_exhausted: return "budget_exhausted";
    case ErrorCode::no_edges: return "no_edges";
    case ErrorCode::not_abs_continuous: return "not_abs_continuous";
    case ErrorCode::not_shift_invariant: return "not_shift_invariant";
    case ErrorCode::marginal_violation: return "marginal_violation";
    case ErrorCode::domain: return "domain";
    case ErrorCode::dual_failure: return "dual_failure";
    case ErrorCode::verification_failed: return "verification_failed";
  }
  return "unknown";
}

namespace {

constexpr double kSumTol = 1e-12;

[[noreturn]] void invalid(const std::string& msg) {
  throw DomainError(ErrorCode::invalid_model, msg);
}

}  // namespace

// ---------------------------------------------------------------------------
// TypeAlphabet

TypeAlphabet::TypeAlphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) invalid("type alphabet is empty");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) invalid("empty type label");
    if (l.find_first_of("(), \t\r\n") != std::string::npos)
      invalid("type label '" + l + "' contains a reserved character");
    if (!seen.insert(l).second) invalid("duplicate type label '" + l + "'");
  }
}

std::optional<TypeIndex> TypeAlphabet::find(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<TypeIndex>(i);
  return std::nullopt;
}

TypeIndex TypeAlphabet::index_of(std::string_view label) const {
  if (auto i = find(label)) return *i;
  invalid("unknown type label '" + std::string(label) + "'");
}

int multiplicity(TypeIndex a, const OffspringConfig& c) {
  return static_cast<int>(std::count(c.children.begin(), c.children.end(), a));
}

// ---------------------------------------------------------------------------
// OffspringLaw

OffspringLaw::OffspringLaw(std::vector<double> probs, double remainder)
    : probs_(std::move(probs)), remainder_(remainder) {}

OffspringLaw OffspringLaw::from_probs(std::vector<double> probs) {
  while (!probs.empty() && probs.back() == 0.0) probs.pop_back();
  if (probs.empty()) invalid("offspring law is empty");
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0 + kSumTol)
      invalid("offspring probability out of [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTol) invalid("offspring law does not sum to one");
  if (probs[0] <= 0.0) invalid("offspring law needs p(0) > 0");
  for (double& p : probs) p /= sum;
  return OffspringLaw(std::move(probs), 0.0);
}

OffspringLaw OffspringLaw::poisson(double lambda, int nmax) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) invalid("poisson rate must be positive");
  if (nmax < 0) invalid("poisson truncation must be nonnegative");
  std::vector<double> probs(static_cast<std::size_t>(nmax) + 1);
  double kept = 0.0;
  for (int l = 0; l <= nmax; ++l) {
    probs[l] = std::exp(-lambda + l * std::log(lambda) - std::lgamma(l + 1.0));
    kept += probs[l];
  }
  const double remainder = std::max(0.0, 1.0 - kept);
  for (double& p : probs) p /= kept;
  while (probs.size() > 1 && probs.back() == 0.0) probs.pop_back();
  return OffspringLaw(std::move(probs), remainder);
}

OffspringLaw OffspringLaw::kary(int k) {
  if (k < 2) invalid("k-ary law needs k >= 2");
  std::vector<double> probs(static_cast<std::size_t>(k) + 1, 0.0);
  probs[0] = 1.0 - 1.0 / k;
  probs[k] = 1.0 / k;
  return OffspringLaw(std::move(probs), 0.0);
}

OffspringLaw OffspringLaw::uniform(int k) {
  if (k < 0) invalid("uniform law needs k >= 0");
  return OffspringLaw(std::vector<double>(static_cast<std::size_t>(k) + 1, 1.0 / (k + 1)), 0.0);
}

double OffspringLaw::operator()(int n) const noexcept {
  if (n < 0 || n > max_arity()) return 0.0;
  return probs_[static_cast<std::size_t>(n)];
}

int OffspringLaw::min_arity() const noexcept {
  for (std::size_t n = 0; n < probs_.size(); ++n)
    if (probs_[n] > 0.0) return static_cast<int>(n);
  return 0;
}

double OffspringLaw::mean() const noexcept {
  double m = 0.0;
  for (std::size_t n = 0; n < probs_.size(); ++n) m += static_cast<double>(n) * probs_[n];
  return m;
}

OffspringLaw OffspringLaw::tilted(double theta) const {
  std::vector<double> logw(probs_.size(), -std::numeric_limits<double>::infinity());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < probs_.size(); ++n) {
    if (probs_[n] > 0.0) {
      logw[n] = std::log(probs_[n]) + theta * static_cast<double>(n);
      top = std::max(top, logw[n]);
    }
  }
  std::vector<double> out(probs_.size(), 0.0);
  double sum = 0.0;
  for (std::size_t n = 0; n < probs_.size(); ++n) {
    if (probs_[n] > 0.0) {
      out[n] = std::exp(logw[n] - top);
      sum += out[n];
    }
  }
  for (double& p : out) p /= sum;
  if (out[0] <= 0.0) invalid("tilted law lost its p(0) mass");
  return OffspringLaw(std::move(out), 0.0);
}

// ---------------------------------------------------------------------------
// PairKernel

PairKernel::PairKernel(Eigen::MatrixXd rows) : rows_(std::move(rows)) {
  if (rows_.rows() == 0 || rows_.rows() != rows_.cols()) invalid("pair kernel must be square");
  for (Eigen::Index a = 0; a < rows_.rows(); ++a) {
    for (Eigen::Index b = 0; b < rows_.cols(); ++b)
      if (!std::isfinite(rows_(a, b)) || rows_(a, b) < 0.0)
        invalid("pair kernel entry out of range");
    if (std::abs(rows_.row(a).sum() - 1.0) > kSumTol) invalid("pair kernel row does not sum to one");
  }
}

Eigen::VectorXd PairKernel::stationary() const {
  return perron_vector(rows_.transpose()).vector;
}

// ---------------------------------------------------------------------------
// OffspringKernel

OffspringKernel::OffspringKernel(std::size_t num_types, std::vector<Row> rows) {
  if (num_types == 0) invalid("kernel has no types");
  if (rows.size() != num_types) invalid("kernel needs one row per type");
  rows_.resize(num_types);
  for (std::size_t a = 0; a < num_types; ++a) {
    double sum = 0.0;
    for (const auto& [config, prob] : rows[a]) {
      if (!std::isfinite(prob) || prob < 0.0 || prob > 1.0 + kSumTol)
        invalid("kernel probability out of [0,1]");
      for (TypeIndex child : config.children)
        if (child < 0 || static_cast<std::size_t>(child) >= num_types)
          invalid("kernel config refers to an unknown type");
      if (prob == 0.0) continue;
      sum += prob;
      rows_[a].emplace(config, prob);
      max_arity_ = std::max(max_arity_, static_cast<int>(config.arity()));
    }
    if (std::abs(sum - 1.0) > kSumTol) {
      std::ostringstream os;
      os << "kernel row " << a << " sums to " << sum;
      invalid(os.str());
    }
  }
}

double OffspringKernel::prob(TypeIndex a, const OffspringConfig& c) const {
  const auto& r = row(a);
  auto it = r.find(c);
  return it == r.end() ? 0.0 : it->second;
}

MeanMatrix mean_matrix(const OffspringKernel& kernel) {
  const auto n = static_cast<Eigen::Index>(kernel.num_types());
  MeanMatrix a = MeanMatrix::Zero(n, n);
  for (Eigen::Index parent = 0; parent < n; ++parent)
    for (const auto& [config, prob] : kernel.row(static_cast<TypeIndex>(parent)))
      for (TypeIndex child : config.children) a(child, parent) += prob;
  return a;
}

OffspringKernel product_kernel(const OffspringLaw& p, const PairKernel& q, std::size_t max_configs) {
  const std::size_t n_types = q.num_types();
  std::vector<OffspringKernel::Row> rows(n_types);
  for (std::size_t parent = 0; parent < n_types; ++parent) {
    std::vector<TypeIndex> reachable;
    for (std::size_t b = 0; b < n_types; ++b)
      if (q(static_cast<TypeIndex>(parent), static_cast<TypeIndex>(b)) > 0.0)
        reachable.push_back(static_cast<TypeIndex>(b));

    double estimate = 0.0;
    for (int n = 0; n <= p.max_arity(); ++n)
      if (p(n) > 0.0) estimate += std::pow(static_cast<double>(reachable.size()), n);
    if (estimate > static_cast<double>(max_configs)) {
      std::ostringstream os;
      os << "product kernel row would hold " << estimate << " configs (limit " << max_configs << ")";
      throw DomainError(ErrorCode::guard_exceeded, os.str());
    }

    auto& row = rows[parent];
    for (int n = 0; n <= p.max_arity(); ++n) {
      if (p(n) <= 0.0) continue;
      // odometer over reachable^n
      std::vector<std::size_t> digits(static_cast<std::size_t>(n), 0);
      while (true) {
        OffspringConfig c;
        double prob = p(n);
        for (std::size_t d : digits) {
          c.children.push_back(reachable[d]);
          prob *= q(static_cast<TypeIndex>(parent), reachable[d]);
        }
        row[c] += prob;
        std::size_t i = 0;
        while (i < digits.size() && ++digits[i] == reachable.size()) digits[i++] = 0;
        if (i == digits.size()) break;
      }
    }
  }
  return OffspringKernel(n_types, std::move(rows));
}

// ---------------------------------------------------------------------------
// Spectral analysis

namespace {

PerronResult iterate(const Eigen::MatrixXd& m, double shift, double tol, int max_iterations) {
  const Eigen::Index n = m.rows();
  PerronResult out;
  out.shifted = shift != 0.0;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXd y = m * x + shift * x;
    const double s = y.sum();
    out.iterations = it;
    if (!(s > 0.0)) {
      // nilpotent direction: the spectral radius is zero
      out.value = 0.0;
      out.vector = x;
      out.converged = true;
      return out;
    }
    y /= s;
    const double diff = (y - x).cwiseAbs().maxCoeff();
    x = std::move(y);
    if (diff <= tol) {
      out.converged = true;
      break;
    }
  }
  out.vector = x;
  out.value = (m * x).sum();  // x sums to one
  return out;
}

}  // namespace

PerronResult perron_vector(const Eigen::MatrixXd& m, double tol, int max_iterations) {
  if (m.rows() != m.cols() || m.rows() == 0) invalid("perron_vector needs a square matrix");
  if ((m.array() < 0.0).any()) invalid("perron_vector needs a nonnegative matrix");
  const int first = std::min(max_iterations, 5000);
  PerronResult plain = iterate(m, 0.0, tol, first);
  if (plain.converged) return plain;
  // Periodic supports oscillate; A + eps I has the same Perron vector and a
  // dominant eigenvalue strictly separated from the rest of the spectrum.
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  const double eps = std::max(1e-6, norm);
  PerronResult shifted = iterate(m, eps, tol, max_iterations);
  shifted.iterations += plain.iterations;
  return shifted;
}

bool SpectralData::critical(double tol) const noexcept { return std::abs(rho - 1.0) <= tol; }

std::vector<std::vector<bool>> reachability(const MeanMatrix& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      r[i][j] = a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  return r;
}

SpectralData diagnose_model(const MeanMatrix& a) {
  SpectralData out;
  const auto n = static_cast<std::size_t>(a.rows());
  const PerronResult right = perron_vector(a);
  const PerronResult left = perron_vector(a.transpose());
  out.rho = right.value;
  out.right = right.vector;
  out.left = left.vector;

  const auto closure = reachability(a);
  out.irreducible = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!closure[i][j]) out.irreducible = false;

  // Recurrent candidates reach every type (including themselves).
  TypePartition part;
  std::vector<bool> is_recurrent(n, false);
  for (std::size_t b = 0; b < n; ++b) {
    bool all = true;
    for (std::size_t x = 0; x < n; ++x) all = all && closure[x][b];
    is_recurrent[b] = all;
    if (all) part.recurrent.push_back(static_cast<TypeIndex>(b));
  }
  bool ok = !part.recurrent.empty();
  for (std::size_t b = 0; b < n && ok; ++b) {
    if (is_recurrent[b]) continue;
    if (closure[b][b]) ok = false;
    for (TypeIndex r : part.recurrent)
      if (closure[static_cast<std::size_t>(r)][b]) ok = false;
  }
  if (ok) {
    // Order transients: a type comes after every transient it produces.
    std::vector<bool> placed(n, false);
    std::size_t remaining = n - part.recurrent.size();
    while (remaining > 0) {
      bool progress = false;
      for (std::size_t b = 0; b < n; ++b) {
        if (is_recurrent[b] || placed[b]) continue;
        bool ready = true;
        for (std::size_t x = 0; x < n; ++x)
          if (!is_recurrent[x] && !placed[x] && x != b &&
              a(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(b)) > 0.0)
            ready = false;
        if (ready) {
          part.transient.push_back(static_cast<TypeIndex>(b));
          placed[b] = true;
          --remaining;
          progress = true;
          break;
        }
      }
      if (!progress) {
        ok = false;
        break;
      }
    }
  }
  out.weakly_irreducible = ok;
  if (ok) out.partition = std::move(part);
  return out;
}

SpectralData analyze_model(const MeanMatrix& a) {
  SpectralData out = diagnose_model(a);
  if (!out.weakly_irreducible)
    throw DomainError(ErrorCode::not_weakly_irreducible,
                      "mean matrix is not weakly irreducible: no recurrent/transient partition "
                      "satisfies the reachability conditions");
  return out;
}

// ---------------------------------------------------------------------------
// Critical tilt

namespace {

struct TiltMoments {
  double mean;
  double variance;
};

TiltMoments tilt_moments(const OffspringLaw& p, double theta) {
  double top = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= p.max_arity(); ++n)
    if (p(n) > 0.0) top = std::max(top, std::log(p(n)) + theta * n);
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (int n = 0; n <= p.max_arity(); ++n) {
    if (p(n) <= 0.0) continue;
    const double w = std::exp(std::log(p(n)) + theta * n - top);
    z += w;
    m1 += w * n;
    m2 += w * n * static_cast<double>(n);
  }
  m1 /= z;
  m2 /= z;
  return {m1, std::max(0.0, m2 - m1 * m1)};
}

}  // namespace

CriticalTilt find_critical_tilt(const OffspringLaw& p) {
  const double p0 = p(0), p1 = p(1);
  if (!(p0 > 0.0 && p0 < 1.0 - p1))
    throw DomainError(ErrorCode::tilt_undefined,
                      "critical tilt needs 0 < p(0) < 1 - p(1)");
  if (p.max_arity() < 2)
    throw DomainError(ErrorCode::mean_one_unreachable, "support within {0,1}: mean 1 unreachable");

  if (std::abs(p.mean() - 1.0) <= 1e-15) return {0.0, p};

  double lo = -1.0, hi = 1.0;
  for (int i = 0; tilt_moments(p, lo).mean > 1.0; ++i) {
    lo *= 2.0;
    if (i > 60) throw DomainError(ErrorCode::mean_one_unreachable, "cannot bracket the critical tilt");
  }
  for (int i = 0; tilt_moments(p, hi).mean < 1.0; ++i) {
    hi *= 2.0;
    if (i > 60) throw DomainError(ErrorCode::mean_one_unreachable, "cannot bracket the critical tilt");
  }
  double theta = 0.0;
  for (int it = 0; it < 200; ++it) {
    const TiltMoments m = tilt_moments(p, theta);
    const double f = m.mean - 1.0;
    if (std::abs(f) <= 1e-15) break;
    if (f > 0.0) hi = theta; else lo = theta;
    double next = theta - f / m.variance;
    if (!(m.variance > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == theta) break;
    theta = next;
  }
  OffspringLaw tilted = p.tilted(theta);
  if (std::abs(tilted.mean() - 1.0) > 1e-10)
    throw DomainError(ErrorCode::mean_one_unreachable, "critical tilt did not converge");
  return {theta, std::move(tilted)};
}

// ---------------------------------------------------------------------------
// GWSpec

GWSpec::GWSpec(TypeAlphabet alphabet, Eigen::VectorXd root, OffspringKernel kernel,
               double criticality_tol)
    : alphabet_(std::move(alphabet)),
      root_(std::move(root)),
      kernel_(std::move(kernel)),
      criticality_tol_(criticality_tol) {
  if (kernel_.num_types() != alphabet_.size()) invalid("kernel and alphabet sizes differ");
  if (static_cast<std::size_t>(root_.size()) != alphabet_.size())
    invalid("root distribution and alphabet sizes differ");
  for (Eigen::Index a = 0; a < root_.size(); ++a)
    if (!std::isfinite(root_(a)) || root_(a) < 0.0) invalid("root distribution entry out of range");
  if (std::abs(root_.sum() - 1.0) > kSumTol) invalid("root distribution does not sum to one");
  if (!(criticality_tol_ >= 0.0)) invalid("criticality tolerance must be nonnegative");
  mean_ = mean_matrix(kernel_);
  spectral_ = diagnose_model(mean_);
}

GWSpec GWSpec::with_root(Eigen::VectorXd root) const {
  return GWSpec(alphabet_, std::move(root), kernel_, criticality_tol_);
}

Eigen::VectorXd uniform_root(std::size_t n) {
  return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
}

}  // namespace gwldp
