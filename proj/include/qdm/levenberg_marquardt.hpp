#pragma once

#include <cmath>
#include <concepts>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace qdm {

struct DampedLsqOptions {
  int max_iterations = 500;
  double cost_tolerance = 1e-10;   // relative decrease on an accepted step
  double param_tolerance = 1e-8;   // step norm relative to parameter norm
  double damping_init = 1e-3;
  double damping_up = 4.0;         // applied on rejected steps
  double damping_down = 3.0;       // divides on accepted steps
  double damping_max = 1e16;
};

enum class StopReason { CostTolerance, StepTolerance, MaxIterations, DampingOverflow, ZeroCost };

struct DampedLsqResult {
  Eigen::VectorXd x;
  double cost = 0.0;                 // 0.5 * sum r^2
  std::vector<double> cost_history;  // initial cost, then one entry per accepted step
  int iterations = 0;
  bool converged = false;
  StopReason reason = StopReason::MaxIterations;
};

/// A residual model: fills r(x) and, when jac is non-null, dr/dx.
template <typename P>
concept ResidualProblem = requires(const P& p, const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* j) {
  { p.evaluate(x, r, j) } -> std::same_as<void>;
};

/// Levenberg-Marquardt with diagonal (Marquardt) scaling: damping is
/// multiplied on rejected steps and divided on accepted ones.
template <ResidualProblem Problem>
DampedLsqResult damped_least_squares(const Problem& problem, Eigen::VectorXd x0, const DampedLsqOptions& opt) {
  DampedLsqResult out;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  problem.evaluate(x0, r, &jac);
  double cost = 0.5 * r.squaredNorm();
  out.cost_history.push_back(cost);

  Eigen::VectorXd x = std::move(x0);
  double damping = opt.damping_init;
  Eigen::VectorXd r_trial;
  Eigen::MatrixXd normal = jac.transpose() * jac;
  Eigen::VectorXd gradient = jac.transpose() * r;

  auto step_small = [&](const Eigen::VectorXd& step) {
    return step.norm() <= opt.param_tolerance * (x.norm() + opt.param_tolerance);
  };

  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (cost == 0.0) {
      out.converged = true;
      out.reason = StopReason::ZeroCost;
      break;
    }
    Eigen::VectorXd diag = normal.diagonal();
    const double floor = 1e-12 * std::max(diag.maxCoeff(), 1e-300);
    diag = diag.cwiseMax(floor);
    Eigen::MatrixXd lhs = normal;
    lhs.diagonal() += damping * diag;
    const Eigen::VectorXd step = lhs.ldlt().solve(-gradient);
    if (!step.allFinite()) {
      damping *= opt.damping_up;
      if (damping > opt.damping_max) {
        out.reason = StopReason::DampingOverflow;
        break;
      }
      continue;
    }

    const Eigen::VectorXd x_trial = x + step;
    problem.evaluate(x_trial, r_trial, nullptr);
    const double cost_trial = 0.5 * r_trial.squaredNorm();

    if (std::isfinite(cost_trial) && cost_trial < cost) {
      const double relative_decrease = (cost - cost_trial) / cost;
      x = x_trial;
      cost = cost_trial;
      out.cost_history.push_back(cost);
      damping = std::max(damping / opt.damping_down, 1e-15);
      if (relative_decrease < opt.cost_tolerance) {
        out.converged = true;
        out.reason = StopReason::CostTolerance;
        ++it;
        break;
      }
      if (step_small(step)) {
        out.converged = true;
        out.reason = StopReason::StepTolerance;
        ++it;
        break;
      }
      problem.evaluate(x, r, &jac);
      normal.noalias() = jac.transpose() * jac;
      gradient.noalias() = jac.transpose() * r;
    } else {
      if (step_small(step)) {
        out.converged = true;
        out.reason = StopReason::StepTolerance;
        ++it;
        break;
      }
      damping *= opt.damping_up;
      if (damping > opt.damping_max) {
        out.reason = StopReason::DampingOverflow;
        ++it;
        break;
      }
    }
  }
  out.iterations = it;
  out.x = std::move(x);
  out.cost = cost;
  return out;
}

}  // namespace qdm
