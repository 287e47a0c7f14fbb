#include "gwldp/verify/oracles.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace gwldp::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kl(const Eigen::VectorXd& nu, const Eigen::VectorXd& xi) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < nu.size(); ++i) {
    if (nu(i) <= 0.0) continue;
    if (xi(i) <= 0.0) return kInf;
    h += nu(i) * std::log(nu(i) / xi(i));
  }
  return h;
}

double pair_entropy(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& q) {
  const Eigen::VectorXd mu1 = mu.rowwise().sum();
  double h = 0.0;
  for (Eigen::Index a = 0; a < mu.rows(); ++a)
    for (Eigen::Index b = 0; b < mu.cols(); ++b) {
      if (mu(a, b) <= 0.0) continue;
      const double ref = mu1(a) * q(a, b);
      if (ref <= 0.0) return kInf;
      h += mu(a, b) * std::log(mu(a, b) / ref);
    }
  return h;
}

// Preorder walk. `pending` is a stack of vertex types still to be expanded,
// top = next vertex in preorder.
struct Walker {
  const GWSpec& spec;
  int n;
  std::vector<std::pair<TypeIndex, const OffspringConfig*>> seq;
  std::vector<TypeIndex> pending;
  double total = 0.0;
  std::map<std::string, double>* trees = nullptr;

  void run(double w) {
    if (pending.empty()) {
      if (static_cast<int>(seq.size()) == n) {
        total += w;
        if (trees) {
          std::size_t pos = 0;
          std::string key;
          write(pos, key);
          (*trees)[key] += w;
        }
      }
      return;
    }
    const TypeIndex a = pending.back();
    pending.pop_back();
    for (const auto& [config, prob] : spec.kernel().row(a)) {
      const int used = static_cast<int>(seq.size()) + 1;
      if (used + static_cast<int>(pending.size() + config.arity()) > n) continue;
      seq.emplace_back(a, &config);
      for (auto it = config.children.rbegin(); it != config.children.rend(); ++it) pending.push_back(*it);
      run(w * prob);
      pending.resize(pending.size() - config.arity());
      seq.pop_back();
    }
    pending.push_back(a);
  }

  void write(std::size_t& pos, std::string& out) const {
    const auto [type, config] = seq[pos++];
    out += std::to_string(type);
    if (config->arity() == 0) return;
    out += '(';
    for (std::size_t i = 0; i < config->arity(); ++i) {
      if (i) out += ',';
      write(pos, out);
    }
    out += ')';
  }
};

double walk(const GWSpec& spec, int n, std::map<std::string, double>* trees) {
  double total = 0.0;
  for (std::size_t a = 0; a < spec.num_types(); ++a) {
    const double r = spec.root()(static_cast<Eigen::Index>(a));
    if (r <= 0.0) continue;
    Walker w{spec, n, {}, {static_cast<TypeIndex>(a)}, 0.0, trees};
    w.run(r);
    total += w.total;
  }
  return total;
}

ChiSquare finish(double stat, int cells, int dof) {
  ChiSquare out;
  out.statistic = stat;
  out.cells = cells;
  out.dof = dof;
  if (dof <= 0) {
    out.p_value = 1.0;
    return out;
  }
  boost::math::chi_squared dist(dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  return out;
}

}  // namespace

double cramer_kary(int k, double x) {
  if (x < 0.0 || x > k) return kInf;
  const double y = x / k;
  const double p = 1.0 / k;
  double h = 0.0;
  if (y > 0.0) h += y * std::log(y / p);
  if (y < 1.0) h += (1.0 - y) * std::log((1.0 - y) / (1.0 - p));
  return h;
}

double cramer_poisson(double x) {
  if (x < 0.0) return kInf;
  return x == 0.0 ? 1.0 : 1.0 - x + x * std::log(x);
}

double pair_rate_kary(const Eigen::MatrixXd& mu, int k, const Eigen::MatrixXd& q) {
  const Eigen::VectorXd mu1 = mu.rowwise().sum();
  const Eigen::VectorXd mu2 = mu.colwise().sum().transpose();
  if (((k * mu2 - mu1).array() < -1e-15).any()) return kInf;
  const Eigen::VectorXd rest = ((k * mu2 - mu1) / (k - 1.0)).cwiseMax(0.0);
  return pair_entropy(mu, q) + (k - 1.0) / k * kl(rest, mu2) + kl(mu1, mu2) / k;
}

double pair_rate_poisson(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& q) {
  const Eigen::VectorXd mu1 = mu.rowwise().sum();
  const Eigen::VectorXd mu2 = mu.colwise().sum().transpose();
  return pair_entropy(mu, q) + kl(mu1, mu2);
}

double uniform3_critical_root() {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
    const double mid = 0.5 * (lo + hi);
    (2.0 * mid * mid * mid + mid * mid - 1.0 < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double brute_force_size_prob(const GWSpec& spec, int n) { return walk(spec, n, nullptr); }

std::map<std::string, double> brute_force_tree_probs(const GWSpec& spec, int n) {
  std::map<std::string, double> out;
  walk(spec, n, &out);
  return out;
}

ChiSquare chi_square_gof(const std::map<std::string, long long>& observed,
                         const std::map<std::string, double>& probs) {
  long long total = 0;
  for (const auto& [key, c] : observed) total += c;
  double mass = 0.0;
  for (const auto& [key, p] : probs) mass += p;
  for (const auto& [key, c] : observed)
    if (c > 0 && !probs.count(key)) return {kInf, 0, 0.0, 0};

  struct Cell {
    double expected;
    long long observed;
  };
  std::vector<Cell> cells;
  for (const auto& [key, p] : probs) {
    auto it = observed.find(key);
    cells.push_back({static_cast<double>(total) * p / mass, it == observed.end() ? 0 : it->second});
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& x, const Cell& y) { return x.expected < y.expected; });

  std::vector<Cell> pooled;
  Cell acc{0.0, 0};
  for (const auto& c : cells) {
    acc.expected += c.expected;
    acc.observed += c.observed;
    if (acc.expected >= 5.0) {
      pooled.push_back(acc);
      acc = {0.0, 0};
    }
  }
  if (acc.expected > 0.0) {
    if (pooled.empty()) {
      pooled.push_back(acc);
    } else {
      pooled.back().expected += acc.expected;
      pooled.back().observed += acc.observed;
    }
  }
  double stat = 0.0;
  for (const auto& c : pooled) {
    const double d = static_cast<double>(c.observed) - c.expected;
    stat += d * d / c.expected;
  }
  const int k = static_cast<int>(pooled.size());
  return finish(stat, k, k - 1);
}

ChiSquare chi_square_homogeneity(const std::map<std::string, long long>& first,
                                 const std::map<std::string, long long>& second) {
  std::map<std::string, std::pair<long long, long long>> table;
  for (const auto& [key, c] : first) table[key].first += c;
  for (const auto& [key, c] : second) table[key].second += c;
  long long n1 = 0, n2 = 0;
  for (const auto& [key, c] : table) {
    n1 += c.first;
    n2 += c.second;
  }
  if (n1 == 0 || n2 == 0) return {0.0, 0, 1.0, 0};
  const double f1 = static_cast<double>(n1) / static_cast<double>(n1 + n2);
  const double f2 = 1.0 - f1;

  std::vector<std::pair<long long, long long>> cols;
  for (const auto& [key, c] : table) cols.push_back(c);
  std::stable_sort(cols.begin(), cols.end(), [](const auto& x, const auto& y) {
    return x.first + x.second < y.first + y.second;
  });
  const double min_frac = std::min(f1, f2);
  std::vector<std::pair<long long, long long>> pooled;
  std::pair<long long, long long> acc{0, 0};
  for (const auto& c : cols) {
    acc.first += c.first;
    acc.second += c.second;
    if (static_cast<double>(acc.first + acc.second) * min_frac >= 5.0) {
      pooled.push_back(acc);
      acc = {0, 0};
    }
  }
  if (acc.first + acc.second > 0) {
    if (pooled.empty()) {
      pooled.push_back(acc);
    } else {
      pooled.back().first += acc.first;
      pooled.back().second += acc.second;
    }
  }
  double stat = 0.0;
  for (const auto& [o1, o2] : pooled) {
    const double col = static_cast<double>(o1 + o2);
    const double e1 = col * f1, e2 = col * f2;
    stat += (o1 - e1) * (o1 - e1) / e1 + (o2 - e2) * (o2 - e2) / e2;
  }
  const int k = static_cast<int>(pooled.size());
  return finish(stat, k, k - 1);
}

}  // namespace gwldp::verify
