#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "spex/common/error.hpp"
#include "spex/evd/gev.hpp"
#include "spex/gam/design.hpp"

namespace spex::gam {

// xi = 0.5 tanh(eta) keeps the shape inside (-0.5, 0.5).
double shape_from_eta(double eta);
double eta_from_shape(double xi);

struct GamFitOptions {
  // One value per penalized block (Design::penalized_labels order); when
  // empty every block uses default_smoothing.
  std::vector<double> smoothing;
  double default_smoothing = 1.0;
  int max_iterations = 500;
  double grad_tol = 1e-5;
  bool polish = true;  // Newton refinement after the quasi-Newton phase
};

struct MarginalFit {
  std::shared_ptr<const Design> design;
  Eigen::VectorXd coef;  // stacked location, log_scale, shape
  std::vector<double> smoothing;
  double penalized_nll = 0.0;
  double nll = 0.0;
  Eigen::MatrixXd information;  // Hessian of the penalized nll
  Eigen::MatrixXd covariance;
  Eigen::VectorXd se;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::string message;

  Eigen::VectorXd coefficients(Part p) const;
  Eigen::VectorXd linear_predictor(Part p, const MaximaTable& table) const;
  // Per-row GEV parameters; warns when covariates leave the training range.
  std::vector<evd::GevParams> predict(const MaximaTable& table) const;
  // Index of a named coefficient (Design::coefficient_names), or throws.
  Eigen::Index coefficient_index(const std::string& name) const;

  nlohmann::json to_json() const;
  static MarginalFit from_json(const nlohmann::json& j);
};

// Non-convergence; best() is the last iterate.
class MarginalNonConvergence : public NumericError {
 public:
  MarginalNonConvergence(const std::string& what, MarginalFit best) : NumericError(what), best_(std::move(best)) {}
  const MarginalFit& best() const { return best_; }

 private:
  MarginalFit best_;
};

// Penalized maximum likelihood: minimizes sum of GEV nll plus
// 0.5 * sum_k lambda_k c_k' S_k c_k, from a moment-based start.
MarginalFit fit_marginal(std::shared_ptr<const Design> design, const MaximaTable& table, const GamFitOptions& opts = {});
MarginalFit fit_marginal(const ModelFormula& formula, const MaximaTable& table, const GamFitOptions& opts = {});

// Mean-and-variance start for a stationary GEV (xi = 0).
evd::GevParams moment_start(const std::vector<double>& data);

}  // namespace spex::gam
