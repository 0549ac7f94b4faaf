#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spex::optim {

// Objective returning f(x); when grad is non-null it must also fill the gradient.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;
// Value-only objective, differentiated numerically.
using ValueFn = std::function<double(const Eigen::VectorXd& x)>;

struct Options {
  int max_iterations = 500;
  // Converged when ||grad||_inf < grad_tol * (1 + |f|).
  double grad_tol = 1e-5;
  // Also converged when the relative decrease over an iteration falls below this.
  double f_rel_tol = 0.0;
  double armijo = 1e-4;
  int max_backtracks = 60;
  double max_step = 10.0;  // cap on the infinity norm of a single step
};

struct Result {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> trace;  // objective after each accepted step
};

// Thrown when the iteration limit is reached; carries the best point found.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, Result best) : std::runtime_error(what), best_(std::move(best)) {}
  const Result& best() const { return best_; }

 private:
  Result best_;
};

// BFGS on the inverse Hessian with backtracking Armijo line search.
// Non-finite trial values are treated as failed steps. Throws NonConvergence
// when max_iterations is hit.
Result minimize_bfgs(const Objective& fn, Eigen::VectorXd x0, const Options& opts = {});

// Central-difference helpers. step[i] is the absolute step for coordinate i.
Eigen::VectorXd fd_gradient(const ValueFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& step);
Eigen::MatrixXd fd_hessian(const ValueFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& step);
Eigen::MatrixXd fd_hessian_from_gradient(const Objective& fn, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& step);

// Wraps a value-only function with a central-difference gradient.
Objective with_fd_gradient(ValueFn f, Eigen::VectorXd step);

// Default relative step: h_i = scale * max(1, |x_i|).
Eigen::VectorXd relative_steps(const Eigen::VectorXd& x, double scale);

}  // namespace spex::optim
