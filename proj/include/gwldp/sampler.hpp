#pragma once

// Unconditioned and size-conditioned sampling of typed trees.

#include "gwldp/model.hpp"
#include "gwldp/rng.hpp"
#include "gwldp/size_law.hpp"
#include "gwldp/tree.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace gwldp {

struct SampleBudget {
  long long max_attempts = 10'000'000;
  int size_cap = 1'000'000;
};

/// Breadth-first growth from a mu-distributed root. Returns nullopt
/// (overflow) as soon as the tree exceeds `size_cap` vertices.
std::optional<TypedTree> sample_unconditioned(const GWSpec& spec, RngHandle& rng, int size_cap);

/// Draws unconditioned trees until one has exactly n vertices. Throws
/// DomainError(not_admissible) when n is outside the admissible set and
/// DomainError(budget_exhausted) after budget.max_attempts failures.
TypedTree sample_conditioned_rejection(const GWSpec& spec, int n, RngHandle& rng, const SampleBudget& budget = {});
TypedTree sample_conditioned_rejection(const GWSpec& spec, int n, RngHandle& rng, const SampleBudget& budget,
                                       const AdmissibleSet& admissible);

/// Exact recursive size splitting driven by the size-law table. Throws
/// DomainError(null_conditioning) when f(n) = 0 and DomainError(domain)
/// when n exceeds the table.
TypedTree sample_conditioned_exact(const GWSpec& spec, int n, RngHandle& rng, const SizeLawTable& table);

enum class SamplerMethod { exact, rejection };

/// `count` conditioned trees; tree i uses stream `first_stream + i` of
/// `seed`, so the output does not depend on `threads`.
std::vector<TypedTree> sample_many(const GWSpec& spec, int n, std::size_t count, std::uint64_t seed,
                                   SamplerMethod method, unsigned threads = 1, std::uint64_t first_stream = 0);

}  // namespace gwldp
