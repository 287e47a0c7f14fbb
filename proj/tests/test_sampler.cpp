#include "gwldp/error.hpp"
#include "gwldp/rng.hpp"
#include "gwldp/sampler.hpp"
#include "gwldp/size_law.hpp"
#include "gwldp/verify/generators.hpp"
#include "gwldp/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace gwldp;

TEST_SUITE("rng") {
  TEST_CASE("Philox4x32-10 known answers") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxBlock{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          PhiloxBlock{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          PhiloxBlock{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("handles are determined by seed and stream") {
    RngHandle a(7, 3), b(7, 3), c(7, 4), d(8, 3);
    bool differs_stream = false, differs_seed = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a(), y = b(), z = c(), w = d();
      CHECK(x == y);
      differs_stream |= x != z;
      differs_seed |= x != w;
    }
    CHECK(differs_stream);
    CHECK(differs_seed);
  }

  TEST_CASE("uniform01 range and mean") {
    RngHandle r(1);
    double s = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const double u = r.uniform01();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      s += u;
    }
    CHECK(std::abs(s / 100000 - 0.5) < 0.005);
  }

  TEST_CASE("categorical draws follow the weights") {
    RngHandle r(2);
    const std::vector<double> w = {1.0, 0.0, 3.0};
    const std::vector<double> lw = {std::log(1.0), -INFINITY, std::log(3.0)};
    int hits[3] = {0, 0, 0}, hits_log[3] = {0, 0, 0};
    for (int i = 0; i < 40000; ++i) {
      ++hits[r.categorical(w)];
      ++hits_log[r.categorical_log(lw)];
    }
    CHECK(hits[1] == 0);
    CHECK(hits_log[1] == 0);
    CHECK(std::abs(hits[2] / 40000.0 - 0.75) < 0.01);
    CHECK(std::abs(hits_log[2] / 40000.0 - 0.75) < 0.01);
  }
}

TEST_SUITE("sampler") {
  TEST_CASE("sample_many is reproducible and independent of the thread count") {
    const GWSpec spec = verify::product_spec();
    for (auto method : {SamplerMethod::exact, SamplerMethod::rejection}) {
      const auto one = sample_many(spec, 9, 200, 42, method, 1);
      const auto four = sample_many(spec, 9, 200, 42, method, 4);
      REQUIRE(one.size() == 200);
      for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].size() == 9);
        CHECK(one[i] == four[i]);
      }
      const auto shifted = sample_many(spec, 9, 100, 42, method, 2, 100);
      for (std::size_t i = 0; i < shifted.size(); ++i) CHECK(shifted[i] == one[100 + i]);
    }
  }

  TEST_CASE("n = 1 gives the root law") {
    // Root law (0.3, 0.7); both types can be leaves, so the size-one
    // conditional root law is proportional to mu(a) Q{leaf | a}.
    std::vector<OffspringKernel::Row> rows(2);
    rows[0][OffspringConfig{}] = 0.5;
    rows[0][OffspringConfig{{0, 1}}] = 0.5;
    rows[1][OffspringConfig{}] = 0.25;
    rows[1][OffspringConfig{{1}}] = 0.75;
    Eigen::VectorXd root(2);
    root << 0.3, 0.7;
    const GWSpec spec(TypeAlphabet({"a", "b"}), root, OffspringKernel(2, rows));
    const double pa = 0.3 * 0.5 / (0.3 * 0.5 + 0.7 * 0.25);
    const auto trees = sample_many(spec, 1, 20000, 5, SamplerMethod::exact);
    int a = 0;
    for (const auto& t : trees) {
      CHECK(t.size() == 1);
      a += t.type(0) == 0;
    }
    CHECK(std::abs(a / 20000.0 - pa) < 4.0 * std::sqrt(pa * (1 - pa) / 20000.0));
  }

  TEST_CASE("n = 3 binary is the unique tree") {
    const GWSpec spec = verify::binary_spec();
    for (auto method : {SamplerMethod::exact, SamplerMethod::rejection})
      for (const auto& t : sample_many(spec, 3, 50, 9, method)) CHECK(serialize_indices(t) == "0(0,0)");
  }

  TEST_CASE("exact sampler frequencies match the tree law") {
    const GWSpec spec = verify::product_spec();
    const int n = 5;
    const auto probs = verify::brute_force_tree_probs(spec, n);
    std::map<std::string, long long> obs;
    for (const auto& t : sample_many(spec, n, 20000, 77, SamplerMethod::exact, 2)) ++obs[serialize_indices(t)];
    const verify::ChiSquare c = verify::chi_square_gof(obs, probs);
    CHECK(c.p_value > 1e-4);
  }

  TEST_CASE("inadmissible sizes are refused") {
    const GWSpec spec = verify::binary_spec();
    RngHandle r(1);
    CHECK_THROWS_AS(sample_conditioned_rejection(spec, 4, r), DomainError);
    const SizeLawTable t = size_law(spec, 10);
    CHECK_THROWS_AS(sample_conditioned_exact(spec, 4, r, t), DomainError);
    CHECK_THROWS_AS(sample_conditioned_exact(spec, 11, r, t), DomainError);
  }

  TEST_CASE("subcritical overflow frequency") {
    // p(0) = 0.6, p(2) = 0.4: P{|T| > 1} = 0.4, and with size cap 1 every
    // tree that branches overflows.
    const GWSpec spec(index_alphabet(1), uniform_root(1),
                      product_kernel(OffspringLaw::from_probs({0.6, 0.0, 0.4}), PairKernel(Eigen::MatrixXd::Ones(1, 1))));
    RngHandle r(3);
    int overflow = 0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) overflow += !sample_unconditioned(spec, r, 1).has_value();
    CHECK(std::abs(overflow / double(draws) - 0.4) < 4.0 * std::sqrt(0.24 / draws));

    // with a large cap, overflow of a subcritical tree is rare
    int big = 0;
    for (int i = 0; i < 2000; ++i) big += !sample_unconditioned(spec, r, 1000).has_value();
    CHECK(big == 0);
  }
}
