#include "gwldp/dual.hpp"
#include "gwldp/empirical.hpp"
#include "gwldp/experiments.hpp"
#include "gwldp/rates.hpp"
#include "gwldp/verify/generators.hpp"
#include "gwldp/verify/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace gwldp;

TEST_SUITE("rates") {
  TEST_CASE("relative entropy") {
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(8), xi = Eigen::VectorXd::Constant(8, 1.0 / 8.0);
    nu(3) = 1.0;
    CHECK(relative_entropy(nu, xi).value == doctest::Approx(std::log(8.0)));
    CHECK(relative_entropy(xi, xi).value == doctest::Approx(0.0));
    Eigen::VectorXd half(2), point(2);
    half << 0.5, 0.5;
    point << 1.0, 0.0;
    CHECK(relative_entropy(point, half).value == doctest::Approx(std::log(2.0)));
    const RateValue inf = relative_entropy(half, point);
    CHECK_FALSE(inf.is_finite());
    CHECK(inf.reason == RateReason::not_abs_continuous);
    CHECK(std::isinf(inf.value));
  }

  TEST_CASE("Cramer rate at special points") {
    const OffspringLaw b = OffspringLaw::kary(2);
    CHECK(cramer_rate(b, 0.0).value == doctest::Approx(std::log(2.0)));
    CHECK(cramer_rate(b, 2.0).value == doctest::Approx(std::log(2.0)));
    CHECK(cramer_rate(b, 1.0).value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cramer_rate(b, 2.5).reason == RateReason::domain);
    CHECK(cramer_rate(b, -0.1).reason == RateReason::domain);
    const OffspringLaw poi = OffspringLaw::poisson(1.0, 60);
    CHECK(cramer_rate(poi, 2.0).value == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-9));
    CHECK(cramer_rate(poi, 1.0).value == doctest::Approx(0.0).epsilon(1e-12));
    for (double x : {0.3, 1.1, 2.7}) CHECK(cramer_rate(OffspringLaw::kary(3), x).value == doctest::Approx(verify::cramer_kary(3, x)));
  }

  TEST_CASE("Cramer rate is convex and equals a dense-grid supremum") {
    const OffspringLaw p = OffspringLaw::from_probs({0.2, 0.5, 0.1, 0.2});
    for (double x = 0.1; x < 2.9; x += 0.2) {
      const double mid = cramer_rate(p, x).value;
      const double lo = cramer_rate(p, x - 0.05).value, hi = cramer_rate(p, x + 0.05).value;
      CHECK(mid <= 0.5 * (lo + hi) + 1e-12);

      double sup = -INFINITY;
      for (double l = -20.0; l <= 20.0; l += 1e-3) sup = std::max(sup, l * x - log_mgf(p, l));
      CHECK(mid >= sup - 1e-9);
      CHECK(mid - sup <= 1e-5);
    }
  }

  TEST_CASE("pair rate vanishes at the typical measure") {
    const PairKernel q = verify::symmetric_kernel(0.75);
    Eigen::MatrixXd mu = 0.5 * q.matrix();  // stationary law (1/2, 1/2)
    const RateValue r = pair_rate(PairMeasure(mu), OffspringLaw::kary(2), q);
    CHECK(r.is_finite());
    CHECK(r.value == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("pair rate infinite cases") {
    const PairKernel q = verify::symmetric_kernel(0.75);
    Eigen::MatrixXd mu(2, 2);
    mu << 0.5, 0.0, 0.5, 0.0;  // b is a parent but never a child
    CHECK(pair_rate(PairMeasure(mu), OffspringLaw::kary(2), q).reason == RateReason::marginal_violation);

    Eigen::MatrixXd kids(2, 2);
    kids << 0.5, 0.2, 0.2, 0.1;  // equal marginals
    CHECK(std::isfinite(pair_rate(PairMeasure(kids), OffspringLaw::kary(2), q).value));
    Eigen::MatrixXd heavy(2, 2);
    heavy << 0.1, 0.7, 0.1, 0.1;  // a: parent mass 0.8 exceeds twice the child mass 0.2
    CHECK(std::isinf(pair_rate(PairMeasure(heavy), OffspringLaw::kary(2), q).value));
    CHECK(std::isinf(verify::pair_rate_kary(heavy, 2, q.matrix())));
  }

  TEST_CASE("pair rate against closed forms on random measures") {
    verify::Engine eng(21);
    for (int i = 0; i < 20; ++i) {
      const PairKernel q = verify::random_pair_kernel(eng, 2 + i % 2);
      const Eigen::MatrixXd mu = verify::random_pair_measure(eng, 2 + i % 2, 2);
      CHECK(pair_rate(PairMeasure(mu), OffspringLaw::kary(2), q).value ==
            doctest::Approx(verify::pair_rate_kary(mu, 2, q.matrix())).epsilon(1e-10));
    }
  }

  TEST_CASE("J vanishes at the stationary measure and is infinite off the shift-invariant set") {
    for (const GWSpec& spec : {verify::binary_spec(), verify::product_spec(), verify::weakly_irreducible_spec()}) {
      const OffspringMeasure star = stationary_offspring_measure(spec.kernel(), spec.spectral().right);
      const RateValue j = offspring_rate_J(star, spec.kernel());
      CHECK(j.is_finite());
      CHECK(j.value <= 1e-10);
    }
    const TypeAlphabet ab({"a", "b"});
    const OffspringMeasure tree = offspring_measure(parse_tree("a(b,a(b,b))", ab), 2);
    CHECK(offspring_rate_J(tree, verify::product_spec().kernel()).reason == RateReason::not_shift_invariant);
  }

  TEST_CASE("variational functional is bounded by J") {
    const GWSpec spec = verify::product_spec();
    verify::Engine eng(22);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
      const OffspringMeasure nu = verify::random_shift_invariant(eng, spec.kernel());
      const double j = offspring_rate_J(nu, spec.kernel()).value;
      for (int trial = 0; trial < 5; ++trial) {
        OffspringFunction f;
        for (const auto& [key, w] : nu.mass()) f[key] = g(eng);
        CHECK(variational_functional(nu, f, spec.kernel()) <= j + 1e-10);
      }
      const TiltedKernel t = tilted_kernel_from_measure(nu, spec.kernel());
      CHECK(variational_functional(nu, t.g, spec.kernel()) == doctest::Approx(j).epsilon(1e-8));
      CHECK(t.rho == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(t.entropy == doctest::Approx(j));
    }
  }

  TEST_CASE("J_1 agrees with J under the pattern bijection") {
    const GWSpec spec = verify::product_spec();
    verify::Engine eng(23);
    for (int i = 0; i < 5; ++i) {
      const OffspringMeasure nu = verify::random_shift_invariant(eng, spec.kernel());
      CHECK(kgen_rate_Jk(to_gen_measure(nu), spec.kernel()).value ==
            doctest::Approx(offspring_rate_J(nu, spec.kernel()).value).epsilon(1e-10));
    }
  }

  TEST_CASE("constrained entropy minimum for a product row") {
    // For the row p(n) prod qhat(a_i), the minimum splits into the arity
    // cost I_p(z) and z times the type cost, z = sum phi.
    const OffspringLaw p = OffspringLaw::from_probs({0.3, 0.4, 0.3});
    const PairKernel q = verify::symmetric_kernel(0.7);
    const OffspringKernel k = product_kernel(p, q);
    const Eigen::VectorXd qhat = q.matrix().row(0).transpose();
    for (const auto& phi_list : {std::vector<double>{0.5, 0.5}, std::vector<double>{1.2, 0.3}, std::vector<double>{0.1, 0.2}}) {
      Eigen::VectorXd phi(2);
      phi << phi_list[0], phi_list[1];
      const double z = phi.sum();
      const double expected = z * relative_entropy(Eigen::VectorXd(phi / z), qhat).value + cramer_rate(p, z).value;
      const ConstrainedMin m = constrained_entropy_min(phi, k.row(0));
      CHECK(m.rate.value == doctest::Approx(expected).epsilon(1e-8));
    }
    Eigen::VectorXd out(2);
    out << 1.5, 1.0;  // total 2.5 exceeds the maximal arity
    CHECK(std::isinf(constrained_entropy_min(out, k.row(0)).rate.value));
  }

  TEST_CASE("genetic rate vanishes at the fixed point") {
    const double eta = 1.2, mut = 0.05;
    const GeneticModel model = critical_poisson_genetic(eta, mut, 40);
    const Eigen::Matrix2d a = genetic_mean_matrix(model);
    const Eigen::EigenSolver<Eigen::Matrix2d> es(a);
    CHECK(es.eigenvalues().real().maxCoeff() == doctest::Approx(1.0).epsilon(1e-9));

    // x/(1+x) = (x eta (1-p) + p)/(x eta + 1) as a quadratic in x
    const double qa = eta * mut, qb = 1.0 - eta * (1.0 - mut) - mut, qc = -mut;
    const double x_star = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
    CHECK(x_star > 0.0);
    const GeneticRate at = genetic_rate(x_star, model);
    CHECK(at.rate.value <= 1e-8);
    CHECK(std::abs(at.derivative) <= 1e-4);
    CHECK(genetic_rate(x_star + 0.5, model).rate.value > 0.0);
    CHECK(genetic_rate(0.5 * x_star, model).rate.value > 0.0);
    CHECK(genetic_rate(x_star + 0.5, model).derivative > 0.0);
    CHECK(genetic_rate(0.5 * x_star, model).derivative < 0.0);
  }
}

TEST_SUITE("dual") {
  TEST_CASE("single block recovers the Cramer rate") {
    const OffspringLaw p = OffspringLaw::from_probs({0.25, 0.25, 0.5});
    DualProblem prob;
    DualBlock b;
    b.features = Eigen::MatrixXd(3, 1);
    for (int n = 0; n < 3; ++n) {
      b.log_q.push_back(std::log(p(n)));
      b.features(n, 0) = n;
    }
    prob.blocks.push_back(b);
    prob.target = Eigen::VectorXd::Constant(1, 0.7);
    const DualSolution s = solve_moment_dual(prob);
    CHECK(s.converged);
    CHECK(s.feasible);
    CHECK(s.value == doctest::Approx(cramer_rate(p, 0.7).value).epsilon(1e-10));

    prob.target(0) = 0.0;  // boundary: face reduction to the leaf
    const DualSolution edge = solve_moment_dual(prob);
    CHECK(edge.value == doctest::Approx(-std::log(0.25)).epsilon(1e-10));

    prob.target(0) = 3.0;
    CHECK_FALSE(solve_moment_dual(prob).feasible);
  }
}
