#include "gwldp/size_law.hpp"

#include "gwldp/error.hpp"
#include "gwldp/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gwldp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double SizeLawTable::log_prob(TypeIndex a, int n) const {
  if (n < 1 || n > max_size_) return kNegInf;
  return log_f_.at(static_cast<std::size_t>(a))[static_cast<std::size_t>(n)];
}

double SizeLawTable::prob(TypeIndex a, int n) const { return std::exp(log_prob(a, n)); }

double SizeLawTable::log_total(const Eigen::VectorXd& root, int n) const {
  LogSumExp acc;
  for (std::size_t a = 0; a < log_f_.size(); ++a)
    if (root(static_cast<Eigen::Index>(a)) > 0.0)
      acc.add(std::log(root(static_cast<Eigen::Index>(a))) + log_prob(static_cast<TypeIndex>(a), n));
  return acc.value();
}

std::size_t SizeLawTable::prefix_index(const OffspringConfig& config, std::size_t j) const {
  if (j > config.arity()) throw DomainError(ErrorCode::domain, "prefix longer than config");
  const std::vector<TypeIndex> key(config.children.begin(),
                                   config.children.begin() + static_cast<std::ptrdiff_t>(j));
  auto it = prefix_ids_.find(key);
  if (it == prefix_ids_.end()) throw DomainError(ErrorCode::domain, "config not tabulated in size law");
  return it->second;
}

double SizeLawTable::log_prefix(const OffspringConfig& config, std::size_t j, int s) const {
  if (s < 0 || s > max_size_) return kNegInf;
  return prefixes_[prefix_index(config, j)].log_w[static_cast<std::size_t>(s)];
}

SizeLawTable size_law(const OffspringKernel& kernel, int max_size) {
  if (max_size <= 0) throw DomainError(ErrorCode::domain, "size law needs max_size > 0");
  SizeLawTable t;
  t.max_size_ = max_size;
  const auto n_types = kernel.num_types();
  const auto width = static_cast<std::size_t>(max_size) + 1;
  t.log_f_.assign(n_types, std::vector<double>(width, kNegInf));

  // prefix trie over the child sequences of every config in the kernel
  t.prefixes_.push_back({0, 0, std::vector<double>(width, kNegInf)});
  t.prefixes_[0].log_w[0] = 0.0;
  t.prefix_ids_[{}] = 0;
  for (const auto& row : kernel.rows()) {
    for (const auto& entry : row) {
      const auto& kids = entry.first.children;
      std::vector<TypeIndex> key;
      std::size_t parent = 0;
      for (TypeIndex child : kids) {
        key.push_back(child);
        auto [it, inserted] = t.prefix_ids_.emplace(key, t.prefixes_.size());
        if (inserted) t.prefixes_.push_back({parent, child, std::vector<double>(width, kNegInf)});
        parent = it->second;
      }
    }
  }
  std::vector<std::size_t> prefix_len(t.prefixes_.size(), 0);
  for (const auto& [key, id] : t.prefix_ids_) prefix_len[id] = key.size();

  // per (type, config) the prefix id of the full child sequence and log prob
  struct Term {
    std::size_t prefix;
    double log_q;
  };
  std::vector<std::vector<Term>> terms(n_types);
  for (std::size_t a = 0; a < n_types; ++a)
    for (const auto& [config, q] : kernel.row(static_cast<TypeIndex>(a)))
      terms[a].push_back({t.prefix_ids_.at(config.children), std::log(q)});

  for (int n = 1; n <= max_size; ++n) {
    const int s = n - 1;
    // prefixes at total size s (ids grow with length, parents come first)
    for (std::size_t id = 1; id < t.prefixes_.size(); ++id) {
      if (static_cast<int>(prefix_len[id]) > s) continue;
      auto& pre = t.prefixes_[id];
      const auto& parent = t.prefixes_[pre.parent].log_w;
      const auto& last = t.log_f_[static_cast<std::size_t>(pre.last)];
      LogSumExp acc;
      for (int size = 1; size <= s; ++size) acc.add(parent[static_cast<std::size_t>(s - size)] + last[static_cast<std::size_t>(size)]);
      pre.log_w[static_cast<std::size_t>(s)] = acc.value();
    }
    for (std::size_t a = 0; a < n_types; ++a) {
      LogSumExp acc;
      for (const Term& term : terms[a]) acc.add(term.log_q + t.prefixes_[term.prefix].log_w[static_cast<std::size_t>(s)]);
      t.log_f_[a][static_cast<std::size_t>(n)] = acc.value();
    }
  }
  return t;
}

SizeLawTable size_law(const GWSpec& spec, int max_size) { return size_law(spec.kernel(), max_size); }

// ---------------------------------------------------------------------------

namespace {

bool in_classes(const AdmissibleSet& s, int n) {
  if (s.period <= 0) return false;
  return std::find(s.residues.begin(), s.residues.end(), n % s.period) != s.residues.end();
}

bool listed(const std::vector<int>& v, int n) { return std::binary_search(v.begin(), v.end(), n); }

}  // namespace

bool AdmissibleSet::contains(int n) const {
  if (n < 1) return false;
  if (n > max_size)
    throw DomainError(ErrorCode::domain,
                      "size " + std::to_string(n) + " beyond the admissible-set table (" +
                          std::to_string(max_size) + ")");
  const bool rule = in_classes(*this, n);
  if (n >= stabilization) return rule;
  return (rule && !listed(exceptions, n)) || listed(extras, n);
}

std::vector<int> AdmissibleSet::members() const {
  std::vector<int> out;
  for (int n = 1; n <= max_size; ++n)
    if (contains(n)) out.push_back(n);
  return out;
}

AdmissibleSet admissible_set(const SizeLawTable& table, const Eigen::VectorXd& root) {
  AdmissibleSet out;
  out.max_size = table.max_size();
  const int nmax = table.max_size();
  std::vector<bool> positive(static_cast<std::size_t>(nmax) + 1, false);
  std::vector<int> support;
  for (int n = 1; n <= nmax; ++n) {
    positive[static_cast<std::size_t>(n)] = std::isfinite(table.log_total(root, n));
    if (positive[static_cast<std::size_t>(n)]) support.push_back(n);
  }

  auto gap_gcd = [](const std::vector<int>& s) {
    int d = 0;
    for (int n : s) d = std::gcd(d, n - s.front());
    return d;
  };
  // the lattice is read from the upper half of the table, where early
  // contributions of transient root types have died out
  std::vector<int> tail;
  for (int n : support)
    if (2 * n > nmax) tail.push_back(n);
  out.period = tail.size() >= 2 ? gap_gcd(tail) : gap_gcd(support);

  if (out.period > 0) {
    for (int n : (tail.size() >= 2 ? tail : support)) {
      const int r = n % out.period;
      if (std::find(out.residues.begin(), out.residues.end(), r) == out.residues.end())
        out.residues.push_back(r);
    }
    std::sort(out.residues.begin(), out.residues.end());
  }

  out.stabilization = nmax + 1;
  for (int n = nmax; n >= 1; --n) {
    if (positive[static_cast<std::size_t>(n)] != in_classes(out, n)) break;
    out.stabilization = n;
  }
  for (int n = 1; n < out.stabilization; ++n) {
    const bool rule = in_classes(out, n);
    if (rule && !positive[static_cast<std::size_t>(n)]) out.exceptions.push_back(n);
    if (!rule && positive[static_cast<std::size_t>(n)]) out.extras.push_back(n);
  }
  return out;
}

}  // namespace gwldp
