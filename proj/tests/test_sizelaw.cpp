#include "gwldp/enumerate.hpp"
#include "gwldp/error.hpp"
#include "gwldp/size_law.hpp"
#include "gwldp/verify/generators.hpp"
#include "gwldp/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace gwldp;

namespace {

GWSpec one_type(const OffspringLaw& p) {
  return GWSpec(index_alphabet(1), uniform_root(1), product_kernel(p, PairKernel(Eigen::MatrixXd::Ones(1, 1))));
}

}  // namespace

TEST_SUITE("size_law") {
  TEST_CASE("binary size law") {
    const SizeLawTable t = size_law(verify::binary_spec(), 9);
    CHECK(t.prob(0, 1) == doctest::Approx(0.5));
    CHECK(t.prob(0, 3) == doctest::Approx(0.125));
    CHECK(t.prob(0, 5) == doctest::Approx(1.0 / 16.0));
    CHECK(t.prob(0, 7) == doctest::Approx(5.0 / 128.0));
    CHECK(t.prob(0, 2) == 0.0);
    CHECK(t.prob(0, 4) == 0.0);
    CHECK(std::isinf(t.log_prob(0, 4)));
    CHECK(std::isinf(t.log_prob(0, 10)));
    CHECK_THROWS_AS(size_law(verify::binary_spec(), 0), DomainError);
  }

  TEST_CASE("size law agrees with the brute-force walk") {
    for (const GWSpec& spec : {verify::binary_spec(), verify::product_spec(), verify::weakly_irreducible_spec()}) {
      const SizeLawTable t = size_law(spec, 9);
      for (int n = 1; n <= 9; ++n) {
        const double brute = verify::brute_force_size_prob(spec, n);
        CHECK(std::abs(std::exp(t.log_total(spec.root(), n)) - brute) <= 1e-12);
      }
    }
  }

  TEST_CASE("admissible sets") {
    const GWSpec b = verify::binary_spec();
    const AdmissibleSet ab = admissible_set(size_law(b, 60), b.root());
    CHECK(ab.period == 2);
    CHECK(ab.residues == std::vector<int>{1});
    CHECK(ab.contains(21));
    CHECK_FALSE(ab.contains(22));
    CHECK_THROWS_AS((void)ab.contains(61), DomainError);

    const GWSpec p = one_type(OffspringLaw::poisson(1.0, 30));
    const AdmissibleSet ap = admissible_set(size_law(p, 40), p.root());
    CHECK(ap.period == 1);
    for (int n = 1; n <= 40; ++n) CHECK(ap.contains(n));

    const GWSpec k3 = one_type(OffspringLaw::kary(3));
    const AdmissibleSet a3 = admissible_set(size_law(k3, 40), k3.root());
    CHECK(a3.period == 3);
    CHECK(a3.residues == std::vector<int>{1});
    const std::vector<int> m = a3.members();
    CHECK(m.front() == 1);
    CHECK(m[1] == 4);
    for (int n : m) CHECK(n % 3 == 1);
  }

  TEST_CASE("admissible set matches positivity of the size law") {
    for (const GWSpec& spec : {verify::binary_spec(), verify::product_spec(), verify::weakly_irreducible_spec()}) {
      const SizeLawTable t = size_law(spec, 40);
      const AdmissibleSet a = admissible_set(t, spec.root());
      for (int n = 1; n <= 40; ++n) CHECK(a.contains(n) == std::isfinite(t.log_total(spec.root(), n)));
    }
  }

  TEST_CASE("decay on the admissible lattice is monotone for the binary law") {
    const SizeLawTable t = size_law(verify::binary_spec(), 201);
    double prev = 1.0;
    for (int n = 1; n <= 201; n += 2) {
      const double f = t.prob(0, n);
      CHECK(f > 0.0);
      CHECK(f <= prev);
      prev = f;
    }
  }
}

TEST_SUITE("enumerate") {
  TEST_CASE("n = 3 binary has a single tree") {
    int trees = 0;
    double mass = 0.0;
    enumerate_trees(verify::binary_spec(), 3, [&](const TypedTree& t, double p) {
      ++trees;
      mass += p;
      CHECK(t.size() == 3);
    });
    CHECK(trees == 1);
    CHECK(mass == doctest::Approx(0.125));
  }

  TEST_CASE("enumeration agrees with the brute-force tree probabilities") {
    for (const GWSpec& spec : {verify::binary_spec(), verify::product_spec(), verify::weakly_irreducible_spec()}) {
      for (int n = 1; n <= 7; ++n) {
        const auto brute = verify::brute_force_tree_probs(spec, n);
        std::map<std::string, double> got;
        enumerate_trees(spec, n, [&](const TypedTree& t, double p) { got[serialize_indices(t)] += p; });
        REQUIRE(got.size() == brute.size());
        for (const auto& [key, p] : brute) CHECK(std::abs(got[key] - p) <= 1e-14);
      }
    }
  }

  TEST_CASE("guard refuses before visiting") {
    int visits = 0;
    CHECK_THROWS_AS(enumerate_trees(verify::product_spec(), 15, [&](const TypedTree&, double) { ++visits; }, 10.0),
                    DomainError);
    CHECK(visits == 0);
  }

  TEST_CASE("count DP agrees with enumeration for pair counts") {
    const GWSpec spec = verify::binary_chain_spec(0.75);
    const auto dps = pair_count_distributions(spec, 9);
    for (int n = 2; n <= 9; ++n) {
      const ExactDistribution en =
          exact_statistic_distribution(spec, n, StatisticKind::pair_counts, 1, ExactBackend::enumeration);
      const ExactDistribution& dp = dps[static_cast<std::size_t>(n - 1)];
      CHECK(std::abs(en.total_mass - dp.total_mass) <= 1e-14);
      REQUIRE(en.probs.size() == dp.probs.size());
      for (const auto& [key, p] : en.probs) {
        auto it = dp.probs.find(key);
        REQUIRE(it != dp.probs.end());
        CHECK(std::abs(it->second - p) <= 1e-14);
      }
    }
  }

  TEST_CASE("conditioned event probability at n = 5") {
    const GWSpec spec = verify::binary_chain_spec(0.75);
    const ExactDistribution d = exact_statistic_distribution(spec, 5, StatisticKind::pair_counts);
    CHECK(d.total_mass == doctest::Approx(1.0 / 16.0));

    // P{all four edges a->a or b->b} by hand: two shapes, root type free,
    // each of the four edges keeps the type with probability 3/4.
    const double all_same = conditioned_event_probability(d, [](const std::string& key) {
      const auto c = parse_pair_counts_key(key);
      return c[1] == 0 && c[2] == 0;
    });
    CHECK(all_same == doctest::Approx(std::pow(0.75, 4)).epsilon(1e-12));

    const double whole = conditioned_event_probability(d, [](const std::string&) { return true; });
    CHECK(whole == doctest::Approx(1.0));

    const ExactDistribution d2 = exact_statistic_distribution(spec, 2, StatisticKind::pair_counts);
    CHECK_THROWS_AS(conditioned_event_probability(d2, [](const std::string&) { return true; }), DomainError);
  }

  TEST_CASE("offspring statistic support under a deterministic type swap") {
    // a -> (b) or leaf, b -> (a) or leaf: every edge switches type.
    std::vector<OffspringKernel::Row> rows(2);
    rows[0][OffspringConfig{}] = 0.5;
    rows[0][OffspringConfig{{1}}] = 0.5;
    rows[1][OffspringConfig{}] = 0.5;
    rows[1][OffspringConfig{{0}}] = 0.5;
    const GWSpec spec(TypeAlphabet({"a", "b"}), uniform_root(2), OffspringKernel(2, rows));
    const ExactDistribution d = exact_statistic_distribution(spec, 4, StatisticKind::pair_counts);
    for (const auto& [key, p] : d.probs) {
      const auto c = parse_pair_counts_key(key);
      CHECK(c[0] == 0);
      CHECK(c[3] == 0);
      CHECK(c[1] + c[2] == 3);
    }
    CHECK(d.probs.size() == 2);
  }

  TEST_CASE("kgen statistic masses sum to the size probability") {
    const GWSpec spec = verify::product_spec();
    for (int k = 1; k <= 2; ++k) {
      const ExactDistribution d = exact_statistic_distribution(spec, 5, StatisticKind::kgen_counts, k);
      double s = 0.0;
      for (const auto& [key, p] : d.probs) s += p;
      CHECK(s == doctest::Approx(d.total_mass).epsilon(1e-12));
      CHECK(d.total_mass == doctest::Approx(verify::brute_force_size_prob(spec, 5)).epsilon(1e-12));
    }
  }
}
