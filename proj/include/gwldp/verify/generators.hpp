#pragma once

// Random test inputs and the fixed catalog of small models.

#include "gwldp/empirical.hpp"
#include "gwldp/model.hpp"

#include <random>
#include <vector>

namespace gwldp::verify {

using Engine = std::mt19937_64;

// ---------------------------------------------------------------------------
// Catalog

/// Single type, p(0) = p(2) = 1/2.
GWSpec binary_spec();
/// Two types, product kernel p = (0.3, 0.4, 0.3), Q{a|a} = 0.6, Q{b|b} = 0.7.
GWSpec product_spec();
/// r: leaf w.p. 1/2, (r, r, t) w.p. 1/2; t: leaf. t is transient.
GWSpec weakly_irreducible_spec();
/// p(0) = p(2) = 1/2 with the symmetric two-type Q, Q{a|a} = qaa.
GWSpec binary_chain_spec(double qaa);

/// Symmetric 2 x 2 transition matrix with Q{a|a} = Q{b|b} = qaa.
PairKernel symmetric_kernel(double qaa);

// ---------------------------------------------------------------------------
// Random inputs

/// Row-stochastic matrix with entries bounded below by `floor`.
PairKernel random_pair_kernel(Engine& eng, std::size_t num_types, double floor = 0.05);

/// Pair measure with all entries >= floor / n^2 and k mu_2 >= mu_1 + slack
/// (checked by rejection). k = 0 drops the arity constraint.
Eigen::MatrixXd random_pair_measure(Engine& eng, std::size_t num_types, int k = 0, double slack = 0.0);

/// Reweights every kernel row by e^{noise}, then tilts each row by
/// e^{theta * arity} with theta chosen so that the mean matrix has Perron
/// root one. The base kernel needs leaves and non-leaves in every row.
OffspringKernel random_critical_kernel(Engine& eng, const OffspringKernel& base, double noise = 0.5);

/// u(a) Q'{c | a} for a random critical reweighting Q' of `base`; shift
/// invariant with the support of `base`.
OffspringMeasure random_shift_invariant(Engine& eng, const OffspringKernel& base, double noise = 0.5);

/// Convex combination of stationary depth-k measures of `parts` random
/// critical reweightings of `base`.
GenMeasureK random_stationary_mixture(Engine& eng, const OffspringKernel& base, int k, int parts = 2,
                                      double noise = 0.5);

}  // namespace gwldp::verify
