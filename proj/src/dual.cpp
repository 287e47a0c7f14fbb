#include "gwldp/dual.hpp"

#include "gwldp/error.hpp"
#include "gwldp/numeric.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gwldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Reduced {
  double weight;
  std::size_t block;
  std::vector<std::size_t> rows;  // kept support points
  Eigen::VectorXd log_q;
  Eigen::MatrixXd f;  // kept rows x active coords
};

struct Eval {
  double objective = 0.0;  // sum_k w_k log Z_k - lambda.t
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  std::vector<double> log_z;
  std::vector<Eigen::VectorXd> probs;
};

Eval evaluate(const std::vector<Reduced>& blocks, const Eigen::VectorXd& lambda, const Eigen::VectorXd& t,
              bool second_order) {
  const auto d = lambda.size();
  Eval e;
  e.grad = -t;
  if (second_order) e.hess = Eigen::MatrixXd::Zero(d, d);
  e.objective = -lambda.dot(t);
  for (const auto& b : blocks) {
    const Eigen::VectorXd s = b.log_q + b.f * lambda;
    LogSumExp acc;
    for (Eigen::Index i = 0; i < s.size(); ++i) acc.add(s(i));
    const double log_z = acc.value();
    const Eigen::VectorXd p = (s.array() - log_z).exp().matrix();
    const Eigen::VectorXd mean = b.f.transpose() * p;
    e.objective += b.weight * log_z;
    e.grad += b.weight * mean;
    if (second_order) {
      const Eigen::MatrixXd centered = b.f.rowwise() - mean.transpose();
      e.hess += b.weight * (centered.transpose() * p.asDiagonal() * centered);
    }
    e.log_z.push_back(log_z);
    e.probs.push_back(p);
  }
  return e;
}

DualSolution infeasible(const DualProblem& problem, int iterations, double residual) {
  DualSolution out;
  out.multipliers = Eigen::VectorXd::Constant(problem.target.size(), std::numeric_limits<double>::quiet_NaN());
  out.moments = Eigen::VectorXd::Constant(problem.target.size(), std::numeric_limits<double>::quiet_NaN());
  out.iterations = iterations;
  out.feasible = false;
  out.converged = false;
  out.residual = residual;
  out.value = kInf;
  return out;
}

}  // namespace

DualSolution solve_moment_dual(const DualProblem& problem, const DualOptions& options) {
  const auto dim = problem.target.size();
  for (const auto& b : problem.blocks) {
    if (b.features.cols() != dim || b.features.rows() != static_cast<Eigen::Index>(b.log_q.size()))
      throw DomainError(ErrorCode::domain, "dual block shape mismatch");
    if ((b.features.array() < 0.0).any()) throw DomainError(ErrorCode::domain, "dual features must be nonnegative");
    if (b.weight < 0.0) throw DomainError(ErrorCode::domain, "dual block weight must be nonnegative");
  }
  if ((problem.target.array() < 0.0).any()) return infeasible(problem, 0, kInf);

  // face reduction: a zero target forces every point charging it to zero mass
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < dim; ++j)
    if (problem.target(j) > 0.0) active.push_back(j);
  const auto d = static_cast<Eigen::Index>(active.size());
  Eigen::VectorXd t(d);
  for (Eigen::Index j = 0; j < d; ++j) t(j) = problem.target(active[static_cast<std::size_t>(j)]);

  std::vector<Reduced> blocks;
  for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
    const auto& b = problem.blocks[k];
    if (b.weight == 0.0) continue;
    Reduced r{b.weight, k, {}, {}, {}};
    for (Eigen::Index i = 0; i < b.features.rows(); ++i) {
      bool keep = std::isfinite(b.log_q[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < dim && keep; ++j)
        if (problem.target(j) <= 0.0 && b.features(i, j) > 0.0) keep = false;
      if (keep) r.rows.push_back(static_cast<std::size_t>(i));
    }
    if (r.rows.empty()) return infeasible(problem, 0, kInf);
    const auto m = static_cast<Eigen::Index>(r.rows.size());
    r.log_q.resize(m);
    r.f.resize(m, d);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto row = static_cast<Eigen::Index>(r.rows[static_cast<std::size_t>(i)]);
      r.log_q(i) = b.log_q[static_cast<std::size_t>(row)];
      for (Eigen::Index j = 0; j < d; ++j) r.f(i, j) = b.features(row, active[static_cast<std::size_t>(j)]);
    }
    blocks.push_back(std::move(r));
  }

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(d);
  Eval e = evaluate(blocks, lambda, t, true);
  int it = 0;
  bool converged = d == 0 || e.grad.lpNorm<Eigen::Infinity>() <= options.grad_tol;
  while (!converged && it < options.max_iterations) {
    ++it;
    const double ridge = 1e-12 * std::max(1.0, e.hess.trace());
    const Eigen::MatrixXd h = e.hess + ridge * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd step = h.ldlt().solve(-e.grad);
    if (!step.allFinite() || step.dot(e.grad) >= 0.0) step = -e.grad;
    const double slope = step.dot(e.grad);
    double alpha = 1.0;
    Eval next;
    for (int halvings = 0;; ++halvings) {
      next = evaluate(blocks, lambda + alpha * step, t, false);
      if (next.objective <= e.objective + 1e-4 * alpha * slope) break;
      if (halvings == 60) break;
      alpha *= 0.5;
    }
    lambda += alpha * step;
    e = evaluate(blocks, lambda, t, true);
    const double residual = e.grad.lpNorm<Eigen::Infinity>();
    if (residual <= options.grad_tol) {
      converged = true;
      break;
    }
    if (lambda.norm() > options.lambda_cap && residual > options.residual_tol)
      return infeasible(problem, it, residual);
  }

  const double residual = d == 0 ? 0.0 : e.grad.lpNorm<Eigen::Infinity>();
  if (!converged) {
    if (residual > options.residual_tol) {
      std::ostringstream msg;
      msg << "dual solver did not converge after " << it << " iterations (residual " << residual << ")";
      throw DomainError(ErrorCode::dual_failure, msg.str());
    }
    converged = true;
  }

  DualSolution out;
  out.iterations = it;
  out.converged = converged;
  out.residual = residual;
  out.multipliers = Eigen::VectorXd::Constant(dim, -kInf);
  for (Eigen::Index j = 0; j < d; ++j) out.multipliers(active[static_cast<std::size_t>(j)]) = lambda(j);
  out.moments = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index j = 0; j < d; ++j) out.moments(active[static_cast<std::size_t>(j)]) = e.grad(j) + t(j);
  out.log_partition.assign(problem.blocks.size(), 0.0);
  out.tilted.resize(problem.blocks.size());
  for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
    const auto& b = problem.blocks[k];
    out.tilted[k] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(b.log_q.size()));
    if (b.weight == 0.0)
      for (std::size_t i = 0; i < b.log_q.size(); ++i) out.tilted[k](static_cast<Eigen::Index>(i)) = std::exp(b.log_q[i]);
  }
  double value = 0.0;
  for (std::size_t r = 0; r < blocks.size(); ++r) {
    const auto& b = blocks[r];
    const Eigen::VectorXd& p = e.probs[r];
    out.log_partition[b.block] = e.log_z[r];
    double h = 0.0;  // H(nu || q) = sum p (s - log Z - log q) = lambda.E f - log Z
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      out.tilted[b.block](static_cast<Eigen::Index>(b.rows[static_cast<std::size_t>(i)])) = p(i);
      if (p(i) > 0.0) h += p(i) * (std::log(p(i)) - b.log_q(i));
    }
    value += b.weight * std::max(0.0, h);
  }
  out.value = value;
  return out;
}

}  // namespace gwldp
