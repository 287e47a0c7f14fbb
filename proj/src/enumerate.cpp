#include "gwldp/enumerate.hpp"

#include "gwldp/empirical.hpp"
#include "gwldp/error.hpp"

#include <cstdint>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace gwldp {

namespace {

/// cnt[a][s]: number of support trees of size s with root type a.
std::vector<std::vector<double>> tree_counts(const OffspringKernel& kernel, int n) {
  const auto types = kernel.num_types();
  const auto width = static_cast<std::size_t>(n) + 1;
  std::vector<std::vector<double>> cnt(types, std::vector<double>(width, 0.0));
  for (int s = 1; s <= n; ++s) {
    for (std::size_t a = 0; a < types; ++a) {
      double total = 0.0;
      for (const auto& [c, q] : kernel.row(static_cast<TypeIndex>(a))) {
        // forest counts over the children, total size s - 1
        std::vector<double> forest(static_cast<std::size_t>(s), 0.0);
        forest[0] = 1.0;
        for (TypeIndex child : c.children) {
          std::vector<double> next(static_cast<std::size_t>(s), 0.0);
          for (int t = 0; t < s; ++t) {
            if (forest[static_cast<std::size_t>(t)] == 0.0) continue;
            for (int u = 1; t + u < s; ++u)
              next[static_cast<std::size_t>(t + u)] +=
                  forest[static_cast<std::size_t>(t)] * cnt[static_cast<std::size_t>(child)][static_cast<std::size_t>(u)];
          }
          forest = std::move(next);
        }
        total += forest[static_cast<std::size_t>(s - 1)];
      }
      cnt[a][static_cast<std::size_t>(s)] = total;
    }
  }
  return cnt;
}

/// Preorder (type, arity) sequence of a subtree.
struct Subtree {
  std::vector<std::pair<TypeIndex, int>> preorder;
  double prob = 0.0;
};

class Enumerator {
 public:
  Enumerator(const OffspringKernel& kernel, int n) : kernel_(kernel), cnt_(tree_counts(kernel, n)) {
    memo_.resize(kernel.num_types());
    for (auto& m : memo_) m.resize(static_cast<std::size_t>(n) + 1);
    done_.assign(kernel.num_types(), std::vector<bool>(static_cast<std::size_t>(n) + 1, false));
  }

  template <class Emit>
  void generate(TypeIndex a, int s, Emit&& emit) {
    if (cnt_[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] == 0.0) return;
    for (const auto& [c, q] : kernel_.row(a)) {
      Subtree acc;
      acc.preorder.emplace_back(a, static_cast<int>(c.arity()));
      acc.prob = q;
      children(c, 0, s - 1, acc, emit);
    }
  }

 private:
  const std::vector<Subtree>& list(TypeIndex a, int s) {
    auto& slot = memo_[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)];
    if (!done_[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)]) {
      generate(a, s, [&](const Subtree& t) { slot.push_back(t); });
      done_[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)] = true;
    }
    return slot;
  }

  template <class Emit>
  void children(const OffspringConfig& c, std::size_t i, int remaining, Subtree& acc, Emit& emit) {
    if (i == c.arity()) {
      if (remaining == 0) emit(acc);
      return;
    }
    const int others = static_cast<int>(c.arity() - i - 1);
    const TypeIndex child = c.children[i];
    for (int size = 1; size + others <= remaining; ++size) {
      if (cnt_[static_cast<std::size_t>(child)][static_cast<std::size_t>(size)] == 0.0) continue;
      for (const Subtree& sub : list(child, size)) {
        const auto mark = acc.preorder.size();
        const double saved = acc.prob;
        acc.preorder.insert(acc.preorder.end(), sub.preorder.begin(), sub.preorder.end());
        acc.prob *= sub.prob;
        children(c, i + 1, remaining - size, acc, emit);
        acc.preorder.resize(mark);
        acc.prob = saved;
      }
    }
  }

  const OffspringKernel& kernel_;
  std::vector<std::vector<double>> cnt_;
  std::vector<std::vector<std::vector<Subtree>>> memo_;
  std::vector<std::vector<bool>> done_;
};

TypedTree from_preorder(const std::vector<std::pair<TypeIndex, int>>& seq) {
  TypedTree tree(seq.front().first);
  std::vector<std::pair<std::size_t, int>> open;  // vertex, children still to attach
  if (seq.front().second > 0) open.emplace_back(0, seq.front().second);
  for (std::size_t i = 1; i < seq.size(); ++i) {
    auto& top = open.back();
    const std::size_t v = tree.add_child(top.first, seq[i].first);
    if (--top.second == 0) open.pop_back();
    if (seq[i].second > 0) open.emplace_back(v, seq[i].second);
  }
  return tree;
}

}  // namespace

double estimate_tree_count(const GWSpec& spec, int n) {
  if (n < 1) return 0.0;
  const auto cnt = tree_counts(spec.kernel(), n);
  double total = 0.0;
  for (std::size_t a = 0; a < spec.num_types(); ++a)
    if (spec.root()(static_cast<Eigen::Index>(a)) > 0.0) total += cnt[a][static_cast<std::size_t>(n)];
  return total;
}

void enumerate_trees(const GWSpec& spec, int n, const TreeVisitor& visit, double guard) {
  if (n < 1) throw DomainError(ErrorCode::domain, "enumeration needs n >= 1");
  const double estimate = estimate_tree_count(spec, n);
  if (estimate > guard) {
    std::ostringstream msg;
    msg << "enumeration of size " << n << " would visit about " << estimate << " trees (guard " << guard << ")";
    throw DomainError(ErrorCode::guard_exceeded, msg.str());
  }
  Enumerator e(spec.kernel(), n);
  for (std::size_t a = 0; a < spec.num_types(); ++a) {
    const double mu = spec.root()(static_cast<Eigen::Index>(a));
    if (mu <= 0.0) continue;
    e.generate(static_cast<TypeIndex>(a), n,
               [&](const Subtree& t) { visit(from_preorder(t.preorder), mu * t.prob); });
  }
}

std::string statistic_key(const TypedTree& tree, std::size_t num_types, StatisticKind kind, int k) {
  switch (kind) {
    case StatisticKind::pair_counts: return pair_counts_key(pair_counts(tree, num_types).cells);
    case StatisticKind::offspring_counts: return offspring_counts_key(offspring_counts(tree, num_types));
    case StatisticKind::kgen_counts: return kgen_counts_key(kgen_counts(tree, k));
  }
  return {};
}

std::string pair_counts_key(const std::vector<long long>& row_major) {
  std::string out;
  for (std::size_t i = 0; i < row_major.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(row_major[i]);
  }
  return out;
}

std::vector<long long> parse_pair_counts_key(const std::string& key) {
  std::vector<long long> out;
  std::size_t pos = 0;
  while (pos <= key.size()) {
    const auto next = key.find(',', pos);
    const auto piece = key.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (piece.empty()) throw ConfigError("pair_counts_key", "malformed key '" + key + "'");
    out.push_back(std::stoll(piece));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

namespace {

ExactDistribution by_enumeration(const GWSpec& spec, int n, StatisticKind kind, int k, double guard) {
  ExactDistribution dist;
  dist.kind = kind;
  dist.n = n;
  dist.k = k;
  const auto types = spec.num_types();
  enumerate_trees(
      spec, n,
      [&](const TypedTree& t, double p) {
        dist.probs[statistic_key(t, types, kind, k)] += p;
        dist.total_mass += p;
      },
      guard);
  return dist;
}

using PackedMap = std::unordered_map<std::uint64_t, double>;

constexpr int kCellBits = 16;

}  // namespace

std::vector<ExactDistribution> pair_count_distributions(const GWSpec& spec, int n_max) {
  const auto types = spec.num_types();
  if (types > 2) throw DomainError(ErrorCode::domain, "count DP supports at most two types");
  if (n_max < 1) throw DomainError(ErrorCode::domain, "count DP needs n >= 1");
  if (n_max >= (1 << kCellBits)) throw DomainError(ErrorCode::domain, "count DP size limit exceeded");
  const auto& kernel = spec.kernel();
  const auto width = static_cast<std::size_t>(n_max) + 1;

  // d[a][s]: packed pair-count vector -> probability, trees of size s rooted at a
  std::vector<std::vector<PackedMap>> d(types, std::vector<PackedMap>(width));

  // forest prefix tables per (parent type, config): prefix[i][t] covers the
  // first i children with total size t, edges from the parent included
  struct ConfigTable {
    const OffspringConfig* config;
    double q;
    std::vector<std::vector<PackedMap>> prefix;
  };
  std::vector<std::vector<ConfigTable>> tables(types);
  for (std::size_t a = 0; a < types; ++a) {
    for (const auto& [c, q] : kernel.row(static_cast<TypeIndex>(a))) {
      ConfigTable tab{&c, q, std::vector<std::vector<PackedMap>>(c.arity() + 1, std::vector<PackedMap>(width))};
      tab.prefix[0][0][0] = 1.0;
      tables[a].push_back(std::move(tab));
    }
  }

  for (int s = 1; s <= n_max; ++s) {
    const int t = s - 1;
    for (std::size_t a = 0; a < types; ++a) {
      for (auto& tab : tables[a]) {
        const auto& kids = tab.config->children;
        for (std::size_t i = 1; i <= kids.size(); ++i) {
          const auto shift = kCellBits * (a * types + static_cast<std::size_t>(kids[i - 1]));
          const std::uint64_t edge = std::uint64_t{1} << shift;
          auto& out = tab.prefix[i][static_cast<std::size_t>(t)];
          for (int u = 1; u <= t; ++u) {
            const auto& left = tab.prefix[i - 1][static_cast<std::size_t>(t - u)];
            const auto& right = d[static_cast<std::size_t>(kids[i - 1])][static_cast<std::size_t>(u)];
            if (left.empty() || right.empty()) continue;
            for (const auto& [kl, pl] : left)
              for (const auto& [kr, pr] : right) out[kl + kr + edge] += pl * pr;
          }
        }
      }
    }
    for (std::size_t a = 0; a < types; ++a) {
      auto& out = d[a][static_cast<std::size_t>(s)];
      for (const auto& tab : tables[a]) {
        const auto& full = tab.prefix[tab.config->arity()][static_cast<std::size_t>(t)];
        for (const auto& [key, p] : full) out[key] += tab.q * p;
      }
    }
  }

  std::vector<ExactDistribution> result;
  for (int s = 1; s <= n_max; ++s) {
    ExactDistribution dist;
    dist.kind = StatisticKind::pair_counts;
    dist.n = s;
    dist.k = 1;
    for (std::size_t a = 0; a < types; ++a) {
      const double mu = spec.root()(static_cast<Eigen::Index>(a));
      if (mu <= 0.0) continue;
      for (const auto& [key, p] : d[a][static_cast<std::size_t>(s)]) {
        std::vector<long long> cells(types * types);
        for (std::size_t i = 0; i < cells.size(); ++i)
          cells[i] = static_cast<long long>((key >> (kCellBits * i)) & ((std::uint64_t{1} << kCellBits) - 1));
        dist.probs[pair_counts_key(cells)] += mu * p;
      }
    }
    for (const auto& [key, p] : dist.probs) dist.total_mass += p;
    result.push_back(std::move(dist));
  }
  return result;
}

ExactDistribution exact_statistic_distribution(const GWSpec& spec, int n, StatisticKind kind, int k,
                                               ExactBackend backend, double guard) {
  if (n < 1) throw DomainError(ErrorCode::domain, "exact distribution needs n >= 1");
  if (kind == StatisticKind::kgen_counts && k < 1)
    throw DomainError(ErrorCode::domain, "k-generation counts need k >= 1");
  const bool dp_ok = kind == StatisticKind::pair_counts && spec.num_types() <= 2;
  if (backend == ExactBackend::count_dp && !dp_ok)
    throw DomainError(ErrorCode::domain, "count DP backend covers pair_counts with at most two types");
  if (backend == ExactBackend::count_dp || (backend == ExactBackend::automatic && dp_ok))
    return pair_count_distributions(spec, n).back();
  return by_enumeration(spec, n, kind, k, guard);
}

double conditioned_event_probability(const ExactDistribution& dist,
                                     const std::function<bool(const std::string&)>& predicate) {
  if (!(dist.total_mass > 0.0))
    throw DomainError(ErrorCode::null_conditioning, "conditioning on an event of probability zero");
  double hit = 0.0;
  for (const auto& [key, p] : dist.probs)
    if (predicate(key)) hit += p;
  return hit / dist.total_mass;
}

}  // namespace gwldp
