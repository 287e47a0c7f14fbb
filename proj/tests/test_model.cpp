#include "gwldp/empirical.hpp"
#include "gwldp/error.hpp"
#include "gwldp/model.hpp"
#include "gwldp/tree.hpp"
#include "gwldp/verify/generators.hpp"
#include "gwldp/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace gwldp;

namespace {

OffspringKernel::Row row_of(std::initializer_list<std::pair<std::vector<TypeIndex>, double>> items) {
  OffspringKernel::Row r;
  for (const auto& [kids, p] : items) r[OffspringConfig{kids}] = p;
  return r;
}

bool throws_code(ErrorCode code, const std::function<void()>& f) {
  try {
    f();
  } catch (const DomainError& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("multiplicity counts occurrences") {
    CHECK(multiplicity(0, OffspringConfig{{0, 1, 0}}) == 2);
    CHECK(multiplicity(0, OffspringConfig{}) == 0);
    CHECK(multiplicity(1, OffspringConfig{{0, 0}}) == 0);
  }

  TEST_CASE("alphabet rejects duplicates and reserved characters") {
    CHECK_THROWS_AS(TypeAlphabet({"a", "a"}), DomainError);
    CHECK_THROWS_AS(TypeAlphabet({"a(b"}), DomainError);
    CHECK_THROWS_AS(TypeAlphabet({""}), DomainError);
    const TypeAlphabet ab({"a", "b"});
    CHECK(ab.index_of("b") == 1);
    CHECK_FALSE(ab.find("c").has_value());
  }

  TEST_CASE("offspring law validation and analytic laws") {
    CHECK_THROWS_AS(OffspringLaw::from_probs({0.5, 0.4}), DomainError);
    CHECK_THROWS_AS(OffspringLaw::from_probs({0.0, 1.0}), DomainError);
    const OffspringLaw k3 = OffspringLaw::kary(3);
    CHECK(k3(3) == doctest::Approx(1.0 / 3.0));
    CHECK(k3(0) == doctest::Approx(2.0 / 3.0));
    CHECK(k3.mean() == doctest::Approx(1.0));
    const OffspringLaw poi = OffspringLaw::poisson(1.0, 10);
    double s = 0.0;
    for (double p : poi.probs()) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(poi.truncation_remainder() > 0.0);
    CHECK(poi.truncation_remainder() < 1e-6);
  }

  TEST_CASE("mean matrix examples") {
    const GWSpec b = verify::binary_spec();
    CHECK(b.mean()(0, 0) == doctest::Approx(1.0));

    std::vector<OffspringKernel::Row> rows = {row_of({{{1}, 1.0}}), row_of({{{0}, 1.0}})};
    const MeanMatrix a = mean_matrix(OffspringKernel(2, rows));
    CHECK(a(0, 0) == 0.0);
    CHECK(a(1, 0) == 1.0);
    CHECK(a(0, 1) == 1.0);
    CHECK(a(1, 1) == 0.0);

    // columns index the parent
    const GWSpec w = verify::weakly_irreducible_spec();
    CHECK(w.mean()(0, 0) == doctest::Approx(1.0));
    CHECK(w.mean()(1, 0) == doctest::Approx(0.5));
    CHECK(w.mean()(0, 1) == 0.0);
  }

  TEST_CASE("mean matrix of a truncated law uses the renormalized law") {
    const OffspringLaw p = OffspringLaw::poisson(1.0, 5);
    const GWSpec s(index_alphabet(1), uniform_root(1), product_kernel(p, PairKernel(Eigen::MatrixXd::Ones(1, 1))));
    CHECK(s.mean()(0, 0) == doctest::Approx(p.mean()).epsilon(1e-14));
  }

  TEST_CASE("product kernel entries and row sums") {
    const OffspringKernel k = product_kernel(OffspringLaw::kary(2), verify::symmetric_kernel(0.75));
    CHECK(k.prob(0, OffspringConfig{{0, 1}}) == doctest::Approx(0.5 * 0.75 * 0.25));
    const OffspringKernel one = product_kernel(OffspringLaw::from_probs({0.5, 0.5}), verify::symmetric_kernel(0.3));
    CHECK(one.prob(1, OffspringConfig{{0}}) == doctest::Approx(0.5 * 0.7));

    verify::Engine eng(11);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int i = 0; i < 100; ++i) {
      std::vector<double> probs(static_cast<std::size_t>(2 + i % 3));
      double z = 0.0;
      for (auto& p : probs) z += (p = u(eng));
      for (auto& p : probs) p /= z;
      const OffspringKernel kk = product_kernel(OffspringLaw::from_probs(probs), verify::random_pair_kernel(eng, 2 + i % 2));
      for (std::size_t a = 0; a < kk.num_types(); ++a) {
        double s = 0.0;
        for (const auto& [c, p] : kk.row(static_cast<TypeIndex>(a))) s += p;
        CHECK(std::abs(s - 1.0) <= 1e-12);
      }
    }
  }

  TEST_CASE("analyze_model on small matrices") {
    Eigen::MatrixXd swap(2, 2);
    swap << 0, 1, 1, 0;
    const SpectralData s = analyze_model(swap);
    CHECK(s.rho == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.right(0) == doctest::Approx(0.5));
    CHECK(s.critical());
    CHECK(s.irreducible);
    REQUIRE(s.partition);
    CHECK(s.partition->recurrent.size() == 2);

    const SpectralData sub = analyze_model(Eigen::MatrixXd::Constant(1, 1, 0.9));
    CHECK(sub.rho == doctest::Approx(0.9));
    CHECK_FALSE(sub.critical());

    const GWSpec w = verify::weakly_irreducible_spec();
    REQUIRE(w.spectral().partition);
    CHECK(w.spectral().partition->recurrent == std::vector<TypeIndex>{0});
    CHECK(w.spectral().partition->transient == std::vector<TypeIndex>{1});
    CHECK(w.spectral().weakly_irreducible);
    CHECK_FALSE(w.spectral().irreducible);
    CHECK(w.spectral().rho == doctest::Approx(w.mean()(0, 0)));

    Eigen::MatrixXd two(2, 2);
    two << 1, 0, 0, 1;
    CHECK(throws_code(ErrorCode::not_weakly_irreducible, [&] { analyze_model(two); }));
  }

  TEST_CASE("partition satisfies the recurrent/transient conditions via closure") {
    const GWSpec w = verify::weakly_irreducible_spec();
    const auto reach = reachability(w.mean());
    const auto& part = *w.spectral().partition;
    for (TypeIndex r : part.recurrent)
      for (TypeIndex s : part.recurrent) CHECK(reach[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)]);
    for (TypeIndex t : part.transient)
      for (TypeIndex r : part.recurrent) CHECK_FALSE(reach[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)]);
  }

  TEST_CASE("Perron data satisfies A u = rho u on random kernels") {
    verify::Engine eng(12);
    for (int i = 0; i < 20; ++i) {
      const OffspringKernel k = product_kernel(OffspringLaw::from_probs({0.3, 0.2, 0.5}), verify::random_pair_kernel(eng, 3));
      const MeanMatrix a = mean_matrix(k);
      const SpectralData s = analyze_model(a);
      CHECK((a * s.right - s.rho * s.right).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(s.right.sum() == doctest::Approx(1.0));
    }
  }

  TEST_CASE("critical tilt") {
    CHECK(find_critical_tilt(OffspringLaw::kary(2)).theta == 0.0);
    const CriticalTilt t = find_critical_tilt(OffspringLaw::uniform(3));
    CHECK(std::abs(t.law.mean() - 1.0) <= 1e-10);
    CHECK(t.theta == doctest::Approx(std::log(verify::uniform3_critical_root())).epsilon(1e-9));
    CHECK(throws_code(ErrorCode::tilt_undefined, [] { find_critical_tilt(OffspringLaw::from_probs({0.5, 0.5})); }));
  }

  TEST_CASE("tilting twice with opposite parameters is the identity") {
    const OffspringLaw p = OffspringLaw::from_probs({0.2, 0.3, 0.1, 0.4});
    for (double th : {-1.3, -0.2, 0.7, 2.0}) {
      const OffspringLaw back = p.tilted(th).tilted(-th);
      for (int n = 0; n <= p.max_arity(); ++n) CHECK(std::abs(back(n) - p(n)) <= 1e-12);
    }
  }

  TEST_CASE("spec criticality flag uses the tolerance") {
    const GWSpec b = verify::binary_spec();
    CHECK(b.is_critical());
    const GWSpec sub(index_alphabet(1), uniform_root(1),
                     product_kernel(OffspringLaw::from_probs({0.6, 0.0, 0.4}), PairKernel(Eigen::MatrixXd::Ones(1, 1))));
    CHECK_FALSE(sub.is_critical());
    CHECK_THROWS_AS(GWSpec(index_alphabet(1), Eigen::VectorXd::Constant(1, 0.5), b.kernel()), DomainError);
  }
}

TEST_SUITE("tree") {
  TEST_CASE("serialize round trip and validity") {
    const TypeAlphabet ab({"a", "b"});
    const TypedTree t = parse_tree("a(b,a(b,b))", ab);
    CHECK(t.size() == 5);
    CHECK(t.valid());
    CHECK(t.height() == 2);
    CHECK(serialize(t, ab) == "a(b,a(b,b))");
    CHECK(serialize_indices(t) == "0(1,0(1,1))");
    CHECK(t.config(0) == OffspringConfig{{1, 0}});
    CHECK(parse_tree(" a ( b , b ) ", ab) == parse_tree("a(b,b)", ab));
    CHECK_THROWS_AS(parse_tree("a(b,", ab), ConfigError);
    CHECK_THROWS_AS(parse_tree("a(c)", ab), ConfigError);
    CHECK_THROWS_AS(parse_tree("a()", ab), ConfigError);
  }
}
