#include "gwldp/sampler.hpp"

#include "gwldp/error.hpp"

#include <cmath>
#include <deque>
#include <exception>
#include <thread>

namespace gwldp {

namespace {

/// Per-type config list with probabilities in kernel order.
struct KernelTable {
  std::vector<std::vector<const OffspringConfig*>> configs;
  std::vector<std::vector<double>> probs;
  std::vector<double> root;

  explicit KernelTable(const GWSpec& spec) {
    const auto& kernel = spec.kernel();
    configs.resize(kernel.num_types());
    probs.resize(kernel.num_types());
    for (std::size_t a = 0; a < kernel.num_types(); ++a)
      for (const auto& [c, q] : kernel.row(static_cast<TypeIndex>(a))) {
        configs[a].push_back(&c);
        probs[a].push_back(q);
      }
    root.assign(spec.root().data(), spec.root().data() + spec.root().size());
  }
};

std::optional<TypedTree> grow(const KernelTable& kt, RngHandle& rng, int size_cap) {
  TypedTree tree(static_cast<TypeIndex>(rng.categorical(kt.root)));
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    const auto a = static_cast<std::size_t>(tree.type(v));
    const OffspringConfig& c = *kt.configs[a][rng.categorical(kt.probs[a])];
    if (tree.size() + c.arity() > static_cast<std::size_t>(size_cap)) return std::nullopt;
    for (TypeIndex child : c.children) queue.push_back(tree.add_child(v, child));
  }
  return tree;
}

void check_admissible(const AdmissibleSet& admissible, int n) {
  if (!admissible.contains(n))
    throw DomainError(ErrorCode::not_admissible, "size " + std::to_string(n) + " is not admissible");
}

}  // namespace

std::optional<TypedTree> sample_unconditioned(const GWSpec& spec, RngHandle& rng, int size_cap) {
  if (size_cap < 1) throw DomainError(ErrorCode::domain, "size cap must be positive");
  return grow(KernelTable(spec), rng, size_cap);
}

TypedTree sample_conditioned_rejection(const GWSpec& spec, int n, RngHandle& rng, const SampleBudget& budget,
                                       const AdmissibleSet& admissible) {
  if (budget.max_attempts <= 0 || budget.size_cap <= 0)
    throw DomainError(ErrorCode::domain, "sample budget must be positive");
  if (n < 1) throw DomainError(ErrorCode::not_admissible, "size must be at least 1");
  check_admissible(admissible, n);
  const KernelTable kt(spec);
  for (long long attempt = 1; attempt <= budget.max_attempts; ++attempt) {
    auto tree = grow(kt, rng, n);
    if (tree && static_cast<int>(tree->size()) == n) return std::move(*tree);
  }
  throw DomainError(ErrorCode::budget_exhausted, "no tree of size " + std::to_string(n) + " after " +
                                                     std::to_string(budget.max_attempts) + " attempts");
}

TypedTree sample_conditioned_rejection(const GWSpec& spec, int n, RngHandle& rng, const SampleBudget& budget) {
  if (n < 1) throw DomainError(ErrorCode::not_admissible, "size must be at least 1");
  const auto table = size_law(spec, n);
  return sample_conditioned_rejection(spec, n, rng, budget, admissible_set(table, spec.root()));
}

TypedTree sample_conditioned_exact(const GWSpec& spec, int n, RngHandle& rng, const SizeLawTable& table) {
  if (n < 1 || n > table.max_size())
    throw DomainError(ErrorCode::domain, "size " + std::to_string(n) + " outside the size-law table");
  const auto types = spec.num_types();
  std::vector<double> logw(types);
  for (std::size_t a = 0; a < types; ++a) {
    const double mu = spec.root()(static_cast<Eigen::Index>(a));
    logw[a] = mu > 0.0 ? std::log(mu) + table.log_prob(static_cast<TypeIndex>(a), n) : -INFINITY;
  }
  bool any = false;
  for (double w : logw) any = any || std::isfinite(w);
  if (!any) throw DomainError(ErrorCode::null_conditioning, "P{|T| = " + std::to_string(n) + "} is zero");

  TypedTree tree(static_cast<TypeIndex>(rng.categorical_log(logw)));
  std::vector<std::pair<std::size_t, int>> stack{{0, n}};  // vertex, subtree size
  std::vector<const OffspringConfig*> configs;
  while (!stack.empty()) {
    const auto [v, s] = stack.back();
    stack.pop_back();
    const TypeIndex a = tree.type(v);

    configs.clear();
    logw.clear();
    for (const auto& [c, q] : spec.kernel().row(a)) {
      configs.push_back(&c);
      logw.push_back(std::log(q) + table.log_prefix(c, c.arity(), s - 1));
    }
    const OffspringConfig& c = *configs[rng.categorical_log(logw)];

    // split s - 1 among the children, last child first
    std::vector<int> sizes(c.arity());
    int remaining = s - 1;
    for (std::size_t j = c.arity(); j-- > 0;) {
      logw.assign(static_cast<std::size_t>(remaining) + 1, -INFINITY);
      for (int t = 1; t <= remaining; ++t)
        logw[static_cast<std::size_t>(t)] =
            table.log_prefix(c, j, remaining - t) + table.log_prob(c.children[j], t);
      const int t = static_cast<int>(rng.categorical_log(logw));
      sizes[j] = t;
      remaining -= t;
    }
    for (std::size_t j = 0; j < c.arity(); ++j) stack.emplace_back(tree.add_child(v, c.children[j]), sizes[j]);
  }
  return tree;
}

std::vector<TypedTree> sample_many(const GWSpec& spec, int n, std::size_t count, std::uint64_t seed,
                                   SamplerMethod method, unsigned threads, std::uint64_t first_stream) {
  const auto table = size_law(spec, n);
  const auto admissible = admissible_set(table, spec.root());
  if (!admissible.contains(n))
    throw DomainError(ErrorCode::not_admissible, "size " + std::to_string(n) + " is not admissible");

  std::vector<std::optional<TypedTree>> out(count);
  std::vector<std::exception_ptr> errors(std::max(1u, threads));
  auto work = [&](std::size_t slot, std::size_t begin, std::size_t end) {
    try {
      for (std::size_t i = begin; i < end; ++i) {
        RngHandle rng(seed, first_stream + i);
        out[i] = method == SamplerMethod::exact
                     ? sample_conditioned_exact(spec, n, rng, table)
                     : sample_conditioned_rejection(spec, n, rng, SampleBudget{}, admissible);
      }
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2) {
    work(0, 0, count);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + threads - 1) / threads;
    for (std::size_t b = 0, slot = 0; b < count; b += chunk, ++slot)
      pool.emplace_back(work, slot, b, std::min(count, b + chunk));
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<TypedTree> trees;
  trees.reserve(count);
  for (auto& t : out) trees.push_back(std::move(*t));
  return trees;
}

}  // namespace gwldp
