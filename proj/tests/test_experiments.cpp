#include "gwldp/enumerate.hpp"
#include "gwldp/error.hpp"
#include "gwldp/experiments.hpp"
#include "gwldp/model_io.hpp"
#include "gwldp/size_law.hpp"
#include "gwldp/verify/generators.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace gwldp;

TEST_SUITE("experiments") {
  TEST_CASE("decay curve rows") {
    const CurveSeries c = decay_curve(verify::binary_spec(), 21);
    REQUIRE(c.rows.size() == 11);
    CHECK(c.rows[0].x == 1.0);
    CHECK(c.rows[0].value == doctest::Approx(std::log(2.0)));
    CHECK(c.rows[2].value == doctest::Approx(std::log(16.0) / 5.0));
    const GWSpec sub(index_alphabet(1), uniform_root(1),
                     product_kernel(OffspringLaw::from_probs({0.6, 0.0, 0.4}), PairKernel(Eigen::MatrixXd::Ones(1, 1))));
    CHECK_THROWS_AS(decay_curve(sub, 21), DomainError);
  }

  TEST_CASE("the whole space has rate zero") {
    const GWSpec spec = verify::binary_chain_spec(0.75);
    const KeyEvent all = [](const std::string&, int) { return true; };
    LdpOptions opt;
    const CurveSeries c = ldp_curve(spec, all, {3, 5, 7, 9}, opt);
    REQUIRE(c.rows.size() == 4);
    for (const auto& r : c.rows) CHECK(std::abs(r.value) <= 1e-12);
    opt.method = LdpMethod::mc;
    opt.samples = 200;
    for (const auto& r : ldp_curve(spec, all, {9, 15}, opt).rows) CHECK(std::abs(r.value) <= 1e-12);
  }

  TEST_CASE("exact curve matches the enumerated event probability") {
    const GWSpec spec = verify::binary_chain_spec(0.75);
    const KeyEvent ev = pair_fraction_at_least(2, 0, 1, 0.4);
    const std::vector<int> ns = {5, 7, 9};
    const CurveSeries c = ldp_curve(spec, ev, ns, LdpOptions{});
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const int n = ns[i];
      const ExactDistribution d =
          exact_statistic_distribution(spec, n, StatisticKind::pair_counts, 1, ExactBackend::enumeration);
      const double p = conditioned_event_probability(d, [&](const std::string& key) { return ev(key, n); });
      CHECK(c.rows[i].value == doctest::Approx(-std::log(p) / n).epsilon(1e-12));
    }
  }

  TEST_CASE("Monte Carlo curves are reproducible and flag zero hits") {
    const GWSpec spec = verify::binary_chain_spec(0.75);
    const KeyEvent ev = pair_fraction_at_least(2, 0, 1, 0.4);
    LdpOptions opt;
    opt.method = LdpMethod::mc;
    opt.samples = 500;
    opt.seed = 17;
    const CurveSeries a = ldp_curve(spec, ev, {11, 21}, opt);
    opt.threads = 3;
    const CurveSeries b = ldp_curve(spec, ev, {11, 21}, opt);
    std::ostringstream sa, sb;
    write_csv(sa, a);
    write_csv(sb, b);
    CHECK(sa.str() == sb.str());
    for (const auto& r : a.rows) CHECK(r.std_error.has_value());

    const KeyEvent never = [](const std::string&, int) { return false; };
    const CurveSeries z = ldp_curve(spec, never, {11}, opt);
    REQUIRE(z.rows.size() == 1);
    CHECK(z.rows[0].lower_bound);
    CHECK(std::isfinite(z.rows[0].value));
    CHECK(z.rows[0].value > 0.0);
  }

  TEST_CASE("conditioned law does not see the offspring tilt") {
    const PairKernel q = verify::symmetric_kernel(0.7);
    const CurveSeries zero = tilt_invariance_report(OffspringLaw::kary(2), q, uniform_root(2), {0.0}, 7);
    REQUIRE(zero.rows.size() == 1);
    CHECK(zero.rows[0].value == 0.0);

    const OffspringLaw u3 = OffspringLaw::uniform(3);
    const double theta = find_critical_tilt(u3).theta;
    const CurveSeries c = tilt_invariance_report(u3, q, uniform_root(2), {theta, -0.5, 0.5}, 6);
    for (const auto& r : c.rows) CHECK(r.value <= 1e-12);
  }

  TEST_CASE("grid infimum over the whole simplex is zero") {
    const GridMinimum m = grid_infimum_pair_rate(OffspringLaw::kary(2), verify::symmetric_kernel(0.75),
                                                 [](const Eigen::Matrix2d&) { return true; }, 1.0 / 40.0);
    CHECK(m.value <= 1e-6);
    CHECK(m.evaluated > 0);
  }

  TEST_CASE("J_k is nondecreasing in k") {
    const GWSpec spec = verify::product_spec();
    verify::Engine eng(31);
    const GenMeasureK mu = verify::random_stationary_mixture(eng, spec.kernel(), 3);
    const CurveSeries c = jk_monotonicity(mu, spec.kernel());
    REQUIRE(c.rows.size() == 3);
    for (std::size_t i = 1; i < c.rows.size(); ++i) CHECK(c.rows[i].value >= c.rows[i - 1].value - 1e-9);
  }

  TEST_CASE("CSV format") {
    CurveSeries s;
    s.label = "demo";
    s.x_name = "n";
    s.meta["seed"] = "3";
    s.rows.push_back(CurveRow{1.0, 0.5, 0.25, std::nullopt, false, "a,b"});
    s.rows.push_back(CurveRow{2.0, INFINITY, std::nullopt, 0.125, true, ""});
    std::ostringstream out;
    write_csv(out, s);
    CHECK(out.str() ==
          "# series: demo\n"
          "# seed: 3\n"
          "n,value,reference,std_error,lower_bound,note\n"
          "1.00000000000000000e+00,5.00000000000000000e-01,2.50000000000000000e-01,,0,a b\n"
          "2.00000000000000000e+00,inf,,1.25000000000000000e-01,1,\n");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK(format_double(NAN) == "nan");
  }

  TEST_CASE("spec digest separates models") {
    CHECK(spec_digest(verify::binary_chain_spec(0.75)) == spec_digest(verify::binary_chain_spec(0.75)));
    CHECK(spec_digest(verify::binary_chain_spec(0.75)) != spec_digest(verify::binary_chain_spec(0.7)));
  }
}

TEST_SUITE("model_io") {
  TEST_CASE("product form model") {
    const ModelConfig c = parse_model_config(R"({
      "description": "chain",
      "alphabet": ["a", "b"],
      "root": {"a": 0.5, "b": 0.5},
      "law": {"probs": [0.5, 0.0, 0.5]},
      "transition": [[0.75, 0.25], [0.25, 0.75]]
    })");
    CHECK(c.description == "chain");
    REQUIRE(c.law);
    REQUIRE(c.transition);
    CHECK(spec_digest(c.spec) == spec_digest(verify::binary_chain_spec(0.75)));
  }

  TEST_CASE("explicit kernel model") {
    const GWSpec s = parse_model(R"({
      "alphabet": ["r", "t"],
      "root": [1.0, 0.0],
      "kernel": {
        "r": [{"arity": 0, "children": [], "prob": 0.5},
              {"arity": 3, "children": ["r", "r", "t"], "prob": 0.5}],
        "t": [{"arity": 0, "children": [], "prob": 1.0}]
      }
    })");
    CHECK(spec_digest(s) == spec_digest(verify::weakly_irreducible_spec()));
    CHECK_FALSE(parse_model_config(R"({"alphabet": ["x"], "root": [1], "law": {"kary": 2}, "transition": [[1]]})")
                    .description.size());
  }

  TEST_CASE("config errors name the field") {
    auto path_of = [](const std::string& text) -> std::string {
      try {
        parse_model(text);
      } catch (const ConfigError& e) {
        return e.path();
      }
      return "no error";
    };
    CHECK(path_of("{") != "no error");
    CHECK(path_of(R"({"alphabet": ["a"], "root": [1], "kernel": {"a": [{"arity": 0, "children": [], "prob": "x"}]}})") ==
          "kernel.a[0].prob");
    CHECK(path_of(R"({"alphabet": ["a"], "root": [1], "law": {"kary": 2}, "transition": [[1]], "colour": 1})") ==
          "colour");
    CHECK(path_of(R"({"alphabet": ["a"], "root": [1], "law": {"kary": 2}, "transition": [[1]]})") == "no error");
    CHECK(path_of(R"({"alphabet": ["a", "b"], "root": {"c": 1}, "law": {"kary": 2}, "transition": [[1, 0], [0, 1]]})")
              .rfind("root", 0) == 0);
  }

  TEST_CASE("measure files") {
    const TypeAlphabet ab({"a", "b"});
    const PairMeasure m = parse_pair_measure(R"({"pair": [[0.3, 0.2], [0.15, 0.35]]})", ab);
    CHECK(m.mass(1, 0) == doctest::Approx(0.15));
    const OffspringMeasure o = parse_offspring_measure(
        R"({"offspring": [{"type": "a", "children": ["a", "b"], "mass": 0.5}, {"type": "b", "children": [], "mass": 0.5}]})",
        ab);
    CHECK(o(OffspringKey{0, OffspringConfig{{0, 1}}}) == doctest::Approx(0.5));
    const GenMeasureK g = parse_gen_measure(R"j({"kgen": {"k": 1, "patterns": {"a(b)": 0.5, "b": 0.5}}})j", ab);
    CHECK(g.mass.at("0(1)") == doctest::Approx(0.5));
    CHECK_THROWS_AS(parse_pair_measure(R"({"pair": [[0.3, 0.2]]})", ab), ConfigError);
  }
}
