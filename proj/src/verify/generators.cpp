#include "gwldp/verify/generators.hpp"

#include "gwldp/error.hpp"

#include <cmath>

namespace gwldp::verify {

namespace {

std::vector<OffspringKernel::Row> tilt_rows(const std::vector<OffspringKernel::Row>& rows, double theta) {
  std::vector<OffspringKernel::Row> out(rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    double z = 0.0;
    for (const auto& [c, w] : rows[a]) z += w * std::exp(theta * static_cast<double>(c.arity()));
    for (const auto& [c, w] : rows[a]) out[a][c] = w * std::exp(theta * static_cast<double>(c.arity())) / z;
  }
  return out;
}

double perron_root(const std::vector<OffspringKernel::Row>& rows) {
  return perron_vector(mean_matrix(OffspringKernel(rows.size(), rows)), 1e-14).value;
}

Eigen::VectorXd right_vector(const OffspringKernel& kernel) {
  const PerronResult r = perron_vector(mean_matrix(kernel), 1e-14);
  return r.vector;
}

}  // namespace

GWSpec binary_spec() {
  const PairKernel q(Eigen::MatrixXd::Ones(1, 1));
  return GWSpec(index_alphabet(1), uniform_root(1), product_kernel(OffspringLaw::kary(2), q));
}

PairKernel symmetric_kernel(double qaa) {
  Eigen::MatrixXd q(2, 2);
  q << qaa, 1.0 - qaa, 1.0 - qaa, qaa;
  return PairKernel(q);
}

GWSpec product_spec() {
  Eigen::MatrixXd q(2, 2);
  q << 0.6, 0.4, 0.3, 0.7;
  return GWSpec(TypeAlphabet({"a", "b"}), uniform_root(2),
                product_kernel(OffspringLaw::from_probs({0.3, 0.4, 0.3}), PairKernel(q)));
}

GWSpec weakly_irreducible_spec() {
  std::vector<OffspringKernel::Row> rows(2);
  rows[0][OffspringConfig{}] = 0.5;
  rows[0][OffspringConfig{{0, 0, 1}}] = 0.5;
  rows[1][OffspringConfig{}] = 1.0;
  Eigen::VectorXd root(2);
  root << 1.0, 0.0;
  return GWSpec(TypeAlphabet({"r", "t"}), root, OffspringKernel(2, rows));
}

GWSpec binary_chain_spec(double qaa) {
  return GWSpec(TypeAlphabet({"a", "b"}), uniform_root(2),
                product_kernel(OffspringLaw::kary(2), symmetric_kernel(qaa)));
}

PairKernel random_pair_kernel(Engine& eng, std::size_t num_types, double floor) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(num_types);
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) q(a, b) = floor + unif(eng);
    q.row(a) /= q.row(a).sum();
  }
  return PairKernel(q);
}

Eigen::MatrixXd random_pair_measure(Engine& eng, std::size_t num_types, int k, double slack) {
  std::exponential_distribution<double> expo(1.0);
  const auto n = static_cast<Eigen::Index>(num_types);
  const double floor = 0.02;
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Eigen::MatrixXd mu(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) mu(a, b) = floor + expo(eng);
    mu /= mu.sum();
    if (k <= 0) return mu;
    const Eigen::VectorXd mu1 = mu.rowwise().sum();
    const Eigen::VectorXd mu2 = mu.colwise().sum().transpose();
    if ((k * mu2 - mu1).minCoeff() >= slack) return mu;
  }
  throw DomainError(ErrorCode::domain, "random_pair_measure: rejection budget exhausted");
}

OffspringKernel random_critical_kernel(Engine& eng, const OffspringKernel& base, double noise) {
  std::normal_distribution<double> gauss(0.0, noise);
  std::vector<OffspringKernel::Row> rows(base.num_types());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    double z = 0.0;
    for (const auto& [c, w] : base.row(static_cast<TypeIndex>(a))) {
      const double v = w * std::exp(gauss(eng));
      rows[a][c] = v;
      z += v;
    }
    for (auto& [c, w] : rows[a]) w /= z;
  }

  double lo = -1.0, hi = 1.0;
  while (perron_root(tilt_rows(rows, lo)) > 1.0) lo *= 2.0;
  while (perron_root(tilt_rows(rows, hi)) < 1.0) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (perron_root(tilt_rows(rows, mid)) < 1.0 ? lo : hi) = mid;
  }
  return OffspringKernel(rows.size(), tilt_rows(rows, 0.5 * (lo + hi)));
}

OffspringMeasure random_shift_invariant(Engine& eng, const OffspringKernel& base, double noise) {
  const OffspringKernel k = random_critical_kernel(eng, base, noise);
  return stationary_offspring_measure(k, right_vector(k));
}

GenMeasureK random_stationary_mixture(Engine& eng, const OffspringKernel& base, int k, int parts,
                                      double noise) {
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  std::vector<double> w(static_cast<std::size_t>(parts));
  double z = 0.0;
  for (auto& x : w) z += (x = unif(eng));
  GenMeasureK out;
  out.k = k;
  for (int i = 0; i < parts; ++i) {
    const OffspringKernel q = random_critical_kernel(eng, base, noise);
    const GenMeasureK mu = stationary_gen_measure(q, right_vector(q), k);
    for (const auto& [key, m] : mu.mass) out.mass[key] += w[static_cast<std::size_t>(i)] / z * m;
  }
  return out;
}

}  // namespace gwldp::verify
