#include "spex/gam/fit.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "spex/common/log.hpp"
#include "spex/optim/quasi_newton.hpp"

namespace spex::gam {
namespace {

// Penalized negative log-likelihood on column-scaled coefficients.
class Objective {
 public:
  Objective(const Design& design, const MaximaTable& table, const std::vector<double>& smoothing)
      : y_(table.maximum) {
    for (int p = 0; p < kParts; ++p) {
      x_[p] = design.matrix(static_cast<Part>(p), table);
      offset_[p] = design.part_offset(static_cast<Part>(p));
    }
    const Eigen::Index total = design.total_columns();
    scale_.resize(total);
    for (int p = 0; p < kParts; ++p) {
      for (Eigen::Index j = 0; j < x_[p].cols(); ++j) {
        const double rms = std::sqrt(x_[p].col(j).squaredNorm() / std::max<Eigen::Index>(1, x_[p].rows()));
        const double s = rms > 1e-12 ? rms : 1.0;
        scale_[offset_[p] + j] = s;
        x_[p].col(j) /= s;
      }
    }
    const Eigen::MatrixXd s = design.penalty(smoothing);
    const Eigen::VectorXd inv = scale_.cwiseInverse();
    penalty_ = inv.asDiagonal() * s * inv.asDiagonal();
  }

  // Coefficients on the original scale <-> working scale.
  Eigen::VectorXd to_working(const Eigen::VectorXd& beta) const { return beta.cwiseProduct(scale_); }
  Eigen::VectorXd from_working(const Eigen::VectorXd& theta) const { return theta.cwiseQuotient(scale_); }
  const Eigen::VectorXd& scale() const { return scale_; }

  // Returns the penalized nll; fills grad when non-null. +inf off support.
  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd* grad, double* plain_nll = nullptr) const {
    Eigen::VectorXd eta[kParts];
    for (int p = 0; p < kParts; ++p) eta[p] = x_[p] * theta.segment(offset_[p], x_[p].cols());
    const Eigen::Index n = static_cast<Eigen::Index>(y_.size());
    Eigen::VectorXd g[kParts];
    if (grad != nullptr) {
      for (auto& v : g) v.resize(n);
    }
    double nll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t = std::tanh(eta[2][i]);
      const evd::GevParams par{eta[0][i], std::exp(eta[1][i]), 0.5 * t};
      if (!std::isfinite(par.sigma) || par.sigma <= 0.0) return std::numeric_limits<double>::infinity();
      if (grad == nullptr) {
        const double lp = evd::gev_logpdf(y_[i], par);
        if (!std::isfinite(lp)) return std::numeric_limits<double>::infinity();
        nll -= lp;
        continue;
      }
      const evd::LogpdfGrad lg = evd::gev_logpdf_grad(y_[i], par);
      if (!lg.on_support || !std::isfinite(lg.value)) return std::numeric_limits<double>::infinity();
      nll -= lg.value;
      g[0][i] = -lg.d_mu;
      g[1][i] = -lg.d_sigma * par.sigma;
      g[2][i] = -lg.d_xi * 0.5 * (1.0 - t * t);
    }
    if (plain_nll != nullptr) *plain_nll = nll;
    const Eigen::VectorXd pt = penalty_ * theta;
    if (grad != nullptr) {
      grad->resize(theta.size());
      for (int p = 0; p < kParts; ++p) grad->segment(offset_[p], x_[p].cols()) = x_[p].transpose() * g[p];
      *grad += pt;
    }
    return nll + 0.5 * theta.dot(pt);
  }

 private:
  const std::vector<double>& y_;
  Eigen::MatrixXd x_[kParts];
  Eigen::Index offset_[kParts];
  Eigen::VectorXd scale_;
  Eigen::MatrixXd penalty_;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// Newton refinement with a numerically differentiated analytic gradient.
void newton_polish(const optim::Objective& fn, Eigen::VectorXd& x, double& f, Eigen::VectorXd& g) {
  for (int it = 0; it < 20; ++it) {
    if (inf_norm(g) < 1e-10 * (1.0 + std::abs(f))) return;
    const Eigen::MatrixXd h = optim::fd_hessian_from_gradient(fn, x, optim::relative_steps(x, 1e-6));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return;
    const Eigen::VectorXd step = ldlt.solve(-g);
    if (!step.allFinite()) return;
    double alpha = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      const Eigen::VectorXd xn = x + alpha * step;
      Eigen::VectorXd gn;
      const double fnv = fn(xn, &gn);
      if (std::isfinite(fnv) && (fnv < f || (fnv <= f && inf_norm(gn) < inf_norm(g)))) {
        x = xn;
        f = fnv;
        g = gn;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return;
  }
}

}  // namespace

double shape_from_eta(double eta) { return 0.5 * std::tanh(eta); }

double eta_from_shape(double xi) {
  if (!(xi > -0.5 && xi < 0.5)) throw DomainError("shape must lie in (-0.5, 0.5)");
  return std::atanh(2.0 * xi);
}

evd::GevParams moment_start(const std::vector<double>& data) {
  if (data.size() < 2) throw DataError("at least two maxima are needed to fit a GEV");
  double mean = 0.0;
  for (double v : data) mean += v;
  mean /= static_cast<double>(data.size());
  double var = 0.0;
  for (double v : data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(data.size() - 1);
  const double sigma = std::max(std::sqrt(6.0 * var) / std::numbers::pi, 1e-6 * (1.0 + std::abs(mean)));
  return {mean - std::numbers::egamma * sigma, sigma, 0.0};
}

MarginalFit fit_marginal(const ModelFormula& formula, const MaximaTable& table, const GamFitOptions& opts) {
  return fit_marginal(std::make_shared<const Design>(formula, table), table, opts);
}

MarginalFit fit_marginal(std::shared_ptr<const Design> design, const MaximaTable& table, const GamFitOptions& opts) {
  const Eigen::Index total = design->total_columns();
  if (table.size() < 10 * static_cast<std::size_t>(total)) {
    log::warn("marginal fit: ", table.size(), " rows for ", total, " coefficients (fewer than 10 per coefficient)");
  }
  std::vector<double> smoothing = opts.smoothing;
  if (smoothing.empty()) smoothing.assign(design->penalized_labels().size(), opts.default_smoothing);
  const Objective obj(*design, table, smoothing);

  // Moment start: intercepts only.
  const evd::GevParams start = moment_start(table.maximum);
  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(total);
  const double intercepts[kParts] = {start.mu, std::log(start.sigma), 0.0};
  for (int p = 0; p < kParts; ++p) {
    const auto& blocks = design->blocks(static_cast<Part>(p));
    if (!blocks.empty() && blocks.front().kind == BlockKind::intercept) {
      beta0[design->part_offset(static_cast<Part>(p))] = intercepts[p];
    }
  }
  const optim::Objective fn = [&obj](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return obj(x, g); };

  optim::Options qn;
  qn.max_iterations = opts.max_iterations;
  qn.grad_tol = opts.grad_tol;
  qn.max_step = 1.0;
  optim::Result res;
  bool failed = false;
  std::string failure;
  try {
    res = optim::minimize_bfgs(fn, obj.to_working(beta0), qn);
  } catch (const optim::NonConvergence& e) {
    res = e.best();
    failed = true;
    failure = e.what();
  }
  if (opts.polish) newton_polish(fn, res.x, res.f, res.grad);

  MarginalFit fit;
  fit.design = design;
  fit.smoothing = smoothing;
  fit.coef = obj.from_working(res.x);
  fit.penalized_nll = res.f;
  obj(res.x, nullptr, &fit.nll);
  fit.iterations = res.iterations;
  fit.gradient_norm = inf_norm(res.grad);
  fit.converged = fit.gradient_norm < opts.grad_tol * (1.0 + std::abs(res.f));
  fit.message = fit.converged ? "converged" : (failed ? failure : "gradient tolerance not reached");
  if (!fit.converged) {
    throw MarginalNonConvergence("marginal fit did not converge: " + fit.message, fit);
  }
  const Eigen::MatrixXd h = optim::fd_hessian_from_gradient(fn, res.x, optim::relative_steps(res.x, 1e-5));
  const Eigen::VectorXd inv = obj.scale();
  fit.information = inv.asDiagonal() * h * inv.asDiagonal();
  fit.information = (0.5 * (fit.information + fit.information.transpose())).eval();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(fit.information);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    fit.covariance = ldlt.solve(Eigen::MatrixXd::Identity(total, total));
  } else {
    log::warn("marginal fit: information matrix is not positive definite; using a pseudo-inverse");
    fit.covariance = fit.information.completeOrthogonalDecomposition().pseudoInverse();
  }
  fit.se = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return fit;
}

Eigen::VectorXd MarginalFit::coefficients(Part p) const {
  return coef.segment(design->part_offset(p), design->columns(p));
}

Eigen::VectorXd MarginalFit::linear_predictor(Part p, const MaximaTable& table) const {
  return design->matrix(p, table) * coefficients(p);
}

std::vector<evd::GevParams> MarginalFit::predict(const MaximaTable& table) const {
  if (design->outside_training_range(table)) log::warn("prediction covariates extend beyond the training range");
  const Eigen::VectorXd mu = linear_predictor(Part::location, table);
  const Eigen::VectorXd ls = linear_predictor(Part::log_scale, table);
  const Eigen::VectorXd sh = linear_predictor(Part::shape, table);
  std::vector<evd::GevParams> out(table.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[i] = {mu[k], std::exp(ls[k]), shape_from_eta(sh[k])};
  }
  return out;
}

Eigen::Index MarginalFit::coefficient_index(const std::string& name) const {
  const auto names = design->coefficient_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw ConfigError("no coefficient named '" + name + "'");
}

nlohmann::json MarginalFit::to_json() const {
  nlohmann::json j;
  j["design"] = design->to_json();
  const auto names = design->coefficient_names();
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    coefs.push_back({{"name", names[i]}, {"estimate", coef[k]}, {"se", se.size() ? se[k] : 0.0}});
  }
  j["coefficients"] = coefs;
  j["smoothing"] = smoothing;
  j["smoothing_labels"] = design->penalized_labels();
  j["penalized_nll"] = penalized_nll;
  j["nll"] = nll;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["gradient_norm"] = gradient_norm;
  return j;
}

MarginalFit MarginalFit::from_json(const nlohmann::json& j) {
  MarginalFit fit;
  fit.design = std::make_shared<const Design>(Design::from_json(j.at("design")));
  const auto& coefs = j.at("coefficients");
  if (static_cast<Eigen::Index>(coefs.size()) != fit.design->total_columns()) {
    throw ConfigError("stored coefficients do not match the stored design");
  }
  fit.coef.resize(fit.design->total_columns());
  fit.se.resize(fit.design->total_columns());
  for (std::size_t i = 0; i < coefs.size(); ++i) {
    fit.coef[static_cast<Eigen::Index>(i)] = coefs[i].at("estimate").get<double>();
    fit.se[static_cast<Eigen::Index>(i)] = coefs[i].value("se", 0.0);
  }
  fit.smoothing = j.value("smoothing", std::vector<double>{});
  fit.penalized_nll = j.value("penalized_nll", 0.0);
  fit.nll = j.value("nll", 0.0);
  fit.iterations = j.value("iterations", 0);
  fit.converged = j.value("converged", true);
  fit.gradient_norm = j.value("gradient_norm", 0.0);
  return fit;
}

}  // namespace spex::gam
