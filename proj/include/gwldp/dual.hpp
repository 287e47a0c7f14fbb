#pragma once

// Entropy minimization under linear moment constraints through its convex
// dual. Blocks share one multiplier vector:
//
//   minimize   sum_k w_k H(nu_k || q_k)
//   subject to sum_k w_k E_{nu_k}[f_k] = target
//
// has dual  max_lambda  lambda.target - sum_k w_k log Z_k(lambda),
// Z_k(lambda) = sum_c q_k(c) exp(lambda.f_k(c)), with the optimal nu_k an
// exponential tilt of q_k.

#include <Eigen/Dense>

#include <vector>

namespace gwldp {

struct DualBlock {
  double weight = 1.0;
  std::vector<double> log_q;  // one entry per support point
  Eigen::MatrixXd features;   // rows = support points; entries must be >= 0
};

struct DualProblem {
  std::vector<DualBlock> blocks;
  Eigen::VectorXd target;
};

struct DualOptions {
  double grad_tol = 1e-10;
  int max_iterations = 200;
  double lambda_cap = 1e3;
  double residual_tol = 1e-8;
};

struct DualSolution {
  /// Coordinates removed by face reduction (zero target) hold -inf.
  Eigen::VectorXd multipliers;
  Eigen::VectorXd moments;
  int iterations = 0;
  bool converged = false;
  bool feasible = true;
  double residual = 0.0;  // max-norm of moments - target
  /// sum_k w_k H(nu_k || q_k) at the returned multipliers; +inf when
  /// infeasible.
  double value = 0.0;
  /// log Z_k at the returned multipliers.
  std::vector<double> log_partition;
  /// Optimal nu_k per block, zero on points removed by face reduction.
  std::vector<Eigen::VectorXd> tilted;
};

/// Damped Newton with Armijo backtracking from lambda = 0. Returns
/// feasible = false when |lambda| exceeds lambda_cap with the residual above
/// residual_tol; throws DomainError(dual_failure) when the iteration budget
/// runs out without either outcome.
DualSolution solve_moment_dual(const DualProblem& problem, const DualOptions& options = {});

}  // namespace gwldp
