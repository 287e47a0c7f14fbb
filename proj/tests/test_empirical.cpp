#include "gwldp/empirical.hpp"
#include "gwldp/error.hpp"
#include "gwldp/sampler.hpp"
#include "gwldp/tree.hpp"
#include "gwldp/verify/generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace gwldp;

namespace {

std::vector<TypedTree> sample_trees() {
  std::vector<TypedTree> out;
  const GWSpec spec = verify::product_spec();
  for (int n : {2, 5, 9, 14})
    for (auto& t : sample_many(spec, n, 25, 1234, SamplerMethod::exact)) out.push_back(std::move(t));
  return out;
}

}  // namespace

TEST_SUITE("empirical") {
  TEST_CASE("pair measure of a small tree") {
    const TypeAlphabet ab({"a", "b"});
    const TypedTree t = parse_tree("a(b,a(b,b))", ab);
    const PairCounts c = pair_counts(t, 2);
    CHECK(c.edges == 4);
    CHECK(c.at(0, 0) == 1);
    CHECK(c.at(0, 1) == 3);
    CHECK(c.at(1, 0) == 0);
    const PairMeasure m = pair_measure(t, 2);
    CHECK(m.mass(0, 1) == doctest::Approx(0.75));
    CHECK_THROWS_AS(pair_measure(parse_tree("a", ab), 2), DomainError);
  }

  TEST_CASE("pair measure is the contraction of the offspring measure") {
    for (const TypedTree& t : sample_trees()) {
      const auto n = static_cast<double>(t.size());
      const OffspringCounts oc = offspring_counts(t, 2);
      CHECK(contraction_F(oc) == pair_counts(t, 2).cells);
      const Eigen::MatrixXd f = contraction_F(offspring_measure(t, 2));
      const Eigen::MatrixXd l = pair_measure(t, 2).mass;
      CHECK((l - n / (n - 1.0) * f).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("shift defect of a tree is the root indicator") {
    for (const TypedTree& t : sample_trees()) {
      const std::vector<long long> d = shift_defect(offspring_counts(t, 2));
      for (TypeIndex a = 0; a < 2; ++a) CHECK(d[static_cast<std::size_t>(a)] == (t.type(0) == a ? 1 : 0));
      const Eigen::VectorXd dm = shift_defect(offspring_measure(t, 2));
      CHECK(dm(t.type(0)) == doctest::Approx(1.0 / static_cast<double>(t.size())));
    }
  }

  TEST_CASE("stationary measure is shift invariant") {
    const GWSpec spec = verify::product_spec();
    const OffspringMeasure nu = stationary_offspring_measure(spec.kernel(), spec.spectral().right);
    CHECK(is_shift_invariant(nu));
    CHECK(shift_defect(nu).cwiseAbs().maxCoeff() <= 1e-10);
    const GenMeasureK mu = stationary_gen_measure(spec.kernel(), spec.spectral().right, 3);
    CHECK(mu.total() == doctest::Approx(1.0));
    CHECK(is_shift_invariant(mu));
  }

  TEST_CASE("depth-one patterns are in bijection with offspring atoms") {
    for (const TypedTree& t : sample_trees()) {
      const OffspringMeasure m = offspring_measure(t, 2);
      const GenMeasureK g = to_gen_measure(m);
      CHECK(g.k == 1);
      const GenMeasureK direct = kgen_measure(t, 1);
      REQUIRE(direct.mass.size() == g.mass.size());
      for (const auto& [key, w] : g.mass) CHECK(direct.mass.at(key) == doctest::Approx(w));
      const OffspringMeasure back = to_offspring_measure(g, 2);
      REQUIRE(back.mass().size() == m.mass().size());
      for (const auto& [key, w] : m.mass()) CHECK(back(key) == doctest::Approx(w));
    }
  }

  TEST_CASE("pattern keys, truncation and projection") {
    const TypeAlphabet ab({"a", "b"});
    const TypedTree t = parse_tree("a(b,a(b,b))", ab);
    CHECK(pattern_key(t, 0, 1) == "0(1,0)");
    CHECK(pattern_key(t, 0, 2) == "0(1,0(1,1))");
    CHECK(pattern_key(t, 1, 2) == "1");
    CHECK(truncate_pattern("0(1,0(1,1))", 1) == "0(1,0)");
    CHECK(truncate_pattern("0(1,0(1,1))", 0) == "0");
    CHECK(serialize_indices(parse_pattern("0(1,0(1,1))")) == "0(1,0(1,1))");
    CHECK(vertex_depths(t) == std::vector<int>{0, 1, 1, 2, 2});

    const GenMeasureK m2 = kgen_measure(t, 2);
    const GenMeasureK p1 = project(m2, 1);
    const GenMeasureK m1 = kgen_measure(t, 1);
    REQUIRE(p1.mass.size() == m1.mass.size());
    for (const auto& [key, w] : m1.mass) CHECK(p1.mass.at(key) == doctest::Approx(w));
    CHECK_THROWS_AS(kgen_measure(t, 0), DomainError);
  }

  TEST_CASE("k-generation shift defect by hand") {
    // a(b,a(b,b)) with k = 2: five depth-2 patterns of mass 1/5. The only
    // depth-1 pattern not matched by a child is the root's, 0(1,0).
    const TypeAlphabet ab({"a", "b"});
    const TypedTree t = parse_tree("a(b,a(b,b))", ab);
    const auto d = shift_defect_k(kgen_measure(t, 2));
    for (const auto& [key, v] : d) {
      if (key == "0(1,0)")
        CHECK(v == doctest::Approx(0.2));
      else
        CHECK(std::abs(v) <= 1e-15);
    }
    CHECK(d.count("0(1,0)") == 1);
    CHECK_FALSE(is_shift_invariant(kgen_measure(t, 2)));
  }

  TEST_CASE("measure validation") {
    Eigen::MatrixXd bad(2, 2);
    bad << 0.5, 0.5, 0.5, -0.5;
    CHECK_THROWS_AS(PairMeasure{bad}, DomainError);
    std::map<OffspringKey, double> m;
    m[OffspringKey{0, OffspringConfig{}}] = 0.7;
    CHECK_THROWS_AS(OffspringMeasure(1, m), DomainError);
  }
}
