#pragma once

// Small dense unconstrained minimizers (downhill simplex, BFGS) with a
// std::function interface.

#include <Eigen/Dense>

#include <functional>

namespace dampchan::optim {

using Objective = std::function<double(const Eigen::VectorXd&)>;
// Returns f(x) and writes the gradient into *grad when grad != nullptr.
using DifferentiableObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd* grad)>;

enum class Status { Converged, MaxIterations, Stalled };

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  Status status = Status::MaxIterations;
};

struct SimplexOptions {
  int max_iterations = 4000;
  // Stop once the characteristic simplex size drops below this.
  double size_tol = 1e-10;
};

struct BfgsOptions {
  int max_iterations = 5000;
  // Relative objective change below which an iteration counts as converged.
  double rel_tol = 1e-10;
  // Absolute gradient-norm floor.
  double grad_tol = 1e-12;
  double initial_step = 1e-2;
  double line_tol = 0.1;
};

Result simplex_minimize(const Objective& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                        const SimplexOptions& opts = {});

Result bfgs_minimize(const DifferentiableObjective& f, const Eigen::VectorXd& x0, const BfgsOptions& opts = {});

// BFGS; when the line search stalls away from a stationary point, a simplex
// pass restarts the search and BFGS resumes from its result.
Result quasi_newton(const DifferentiableObjective& f, const Eigen::VectorXd& x0, const BfgsOptions& opts = {},
                    int max_fallbacks = 2);

// Central differences with step rel_step * max(1, |x_i|).
Eigen::VectorXd finite_difference_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-6);

}  // namespace dampchan::optim
