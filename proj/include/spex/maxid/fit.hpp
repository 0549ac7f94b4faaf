#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spex/maxid/pll.hpp"

namespace spex::maxid {

struct DependenceOptions {
  bool seasonal = false;
  bool estimate_nu = false;  // nu fixed at `nu` otherwise
  double nu = 1.0;
  int angular_nodes = 60;
  int max_iterations = 200;
  double grad_tol = 1e-6;
  double fd_step = 1e-4;      // gradient step on the working scale
  double hessian_step = 2e-3;  // Hessian and score step
};

// Working-scale parameter vector <-> MaxIdParams.
std::vector<std::string> parameter_names(const DependenceOptions& opts);
Eigen::VectorXd to_working(const MaxIdParams& p, const DependenceOptions& opts);
MaxIdParams from_working(const Eigen::VectorXd& theta, const DependenceOptions& opts);

struct ClicParts {
  Eigen::MatrixXd J;  // Hessian of -PLL
  Eigen::MatrixXd K;  // sum over replicates of score outer products
  double trace = 0.0;  // tr(J^-1 K)
  double clic = 0.0;
};

// CLIC = -2 PLL + 2 tr(J^-1 K) at theta (working scale).
ClicParts clic(const PairwiseLikelihood& pll, const DependenceOptions& opts, const Eigen::VectorXd& theta,
               double pll_value);

struct MaxIdFit {
  MaxIdParams params;
  std::vector<std::string> names;
  Eigen::VectorXd theta;
  Eigen::VectorXd se;  // Hessian-based standard errors on the working scale
  double pll = 0.0;
  ClicParts information;
  int iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> trace;  // -PLL after each accepted step

  nlohmann::json to_json() const;
};

// Maximizes the pairwise likelihood by BFGS. Default start: alpha0_beta = 0,
// alpha0_lambda = ln(median pair distance), alpha1 = 0.
MaxIdFit fit_dependence(const PairwiseLikelihood& pll, const DependenceOptions& opts,
                        std::optional<MaxIdParams> start = std::nullopt);

MaxIdParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const MaxIdParams& p);

}  // namespace spex::maxid
