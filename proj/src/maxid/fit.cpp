#include "spex/maxid/fit.hpp"

#include <cmath>

#include "spex/common/error.hpp"
#include "spex/common/log.hpp"
#include "spex/optim/quasi_newton.hpp"

namespace spex::maxid {
namespace {

// nu = 2 / (1 + exp(-theta)) keeps nu in (0, 2).
double nu_from_working(double x) { return 2.0 / (1.0 + std::exp(-x)); }
double nu_to_working(double nu) { return std::log(nu / (2.0 - nu)); }

}  // namespace

std::vector<std::string> parameter_names(const DependenceOptions& opts) {
  std::vector<std::string> names;
  if (opts.seasonal) names = {"alpha0_beta", "alpha1_beta", "alpha0_lambda", "alpha1_lambda"};
  else names = {"alpha0_beta", "alpha0_lambda"};
  if (opts.estimate_nu) names.push_back("logit_nu_half");
  return names;
}

Eigen::VectorXd to_working(const MaxIdParams& p, const DependenceOptions& opts) {
  std::vector<double> v;
  if (opts.seasonal) v = {p.alpha0_beta, p.alpha1_beta, p.alpha0_lambda, p.alpha1_lambda};
  else v = {p.alpha0_beta, p.alpha0_lambda};
  if (opts.estimate_nu) {
    if (!(p.nu > 0.0 && p.nu < 2.0)) throw DomainError("estimated nu must start inside (0, 2)");
    v.push_back(nu_to_working(p.nu));
  }
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MaxIdParams from_working(const Eigen::VectorXd& theta, const DependenceOptions& opts) {
  MaxIdParams p;
  int i = 0;
  p.alpha0_beta = theta[i++];
  if (opts.seasonal) p.alpha1_beta = theta[i++];
  p.alpha0_lambda = theta[i++];
  if (opts.seasonal) p.alpha1_lambda = theta[i++];
  p.nu = opts.estimate_nu ? nu_from_working(theta[i]) : opts.nu;
  return p;
}

ClicParts clic(const PairwiseLikelihood& pll, const DependenceOptions& opts, const Eigen::VectorXd& theta,
               double pll_value) {
  const Eigen::Index n = theta.size();
  const Eigen::VectorXd step = Eigen::VectorXd::Constant(n, opts.hessian_step);
  ClicParts out;
  out.J = optim::fd_hessian([&](const Eigen::VectorXd& x) { return -pll(from_working(x, opts)); }, theta, step);

  // Per-replicate scores by central differences.
  const std::size_t n_times = pll.panel().times();
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(n_times), n);
  Eigen::VectorXd x = theta;
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = theta[i] + step[i];
    const auto plus = pll.per_time(from_working(x, opts));
    x[i] = theta[i] - step[i];
    const auto minus = pll.per_time(from_working(x, opts));
    x[i] = theta[i];
    for (std::size_t t = 0; t < n_times; ++t) scores(static_cast<Eigen::Index>(t), i) = (plus[t] - minus[t]) / (2.0 * step[i]);
  }
  out.K = scores.transpose() * scores;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(out.J);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
    throw NumericError("CLIC: Hessian of -PLL is singular or indefinite; consider a ridge of 1e-8");
  }
  out.trace = ldlt.solve(out.K).trace();
  out.clic = -2.0 * pll_value + 2.0 * out.trace;
  return out;
}

MaxIdFit fit_dependence(const PairwiseLikelihood& pll, const DependenceOptions& opts, std::optional<MaxIdParams> start) {
  MaxIdParams init;
  if (start) {
    init = *start;
  } else {
    init.alpha0_lambda = std::log(std::max(pll.pairs().median_distance(), 1e-6));
    init.nu = opts.nu;
  }
  if (!opts.seasonal) {
    init.alpha1_beta = 0.0;
    init.alpha1_lambda = 0.0;
  }
  const double scale = static_cast<double>(pll.observations());
  auto value = [&](const Eigen::VectorXd& x) {
    try {
      return -pll(from_working(x, opts)) / scale;
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const NumericError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const Eigen::VectorXd x0 = to_working(init, opts);
  optim::Options qn;
  qn.max_iterations = opts.max_iterations;
  qn.grad_tol = opts.grad_tol;
  qn.max_step = 2.0;
  qn.f_rel_tol = 1e-12;

  optim::Result res;
  MaxIdFit fit;
  try {
    res = optim::minimize_bfgs(optim::with_fd_gradient(value, Eigen::VectorXd::Constant(x0.size(), opts.fd_step)), x0, qn);
  } catch (const optim::NonConvergence& e) {
    std::string trace;
    for (double f : e.best().trace) trace += " " + std::to_string(f * scale);
    throw NumericError(std::string("dependence fit failed: ") + e.what() + "; -PLL trace:" + trace);
  }
  fit.names = parameter_names(opts);
  fit.theta = res.x;
  fit.params = from_working(res.x, opts);
  fit.pll = -res.f * scale;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  fit.message = res.message;
  for (double f : res.trace) fit.trace.push_back(f * scale);
  try {
    fit.information = clic(pll, opts, res.x, fit.pll);
  } catch (const NumericError& e) {
    throw NumericError(std::string(e.what()) + " at " + params_to_json(fit.params).dump());
  }
  const Eigen::MatrixXd cov = fit.information.J.inverse();
  fit.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  log::info("dependence fit: PLL=", fit.pll, " CLIC=", fit.information.clic, " iterations=", fit.iterations);
  return fit;
}

nlohmann::json params_to_json(const MaxIdParams& p) {
  return {{"alpha0_beta", p.alpha0_beta},     {"alpha1_beta", p.alpha1_beta}, {"alpha0_lambda", p.alpha0_lambda},
          {"alpha1_lambda", p.alpha1_lambda}, {"nu", p.nu}};
}

MaxIdParams params_from_json(const nlohmann::json& j) {
  MaxIdParams p;
  p.alpha0_beta = j.value("alpha0_beta", 0.0);
  p.alpha1_beta = j.value("alpha1_beta", 0.0);
  p.alpha0_lambda = j.value("alpha0_lambda", 0.0);
  p.alpha1_lambda = j.value("alpha1_lambda", 0.0);
  p.nu = j.value("nu", 1.0);
  p.validate();
  return p;
}

nlohmann::json MaxIdFit::to_json() const {
  nlohmann::json j;
  j["params"] = params_to_json(params);
  nlohmann::json est = nlohmann::json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    est.push_back({{"name", names[i]}, {"estimate", theta[static_cast<Eigen::Index>(i)]},
                   {"se", se[static_cast<Eigen::Index>(i)]}});
  }
  j["estimates"] = est;
  j["pll"] = pll;
  j["clic"] = information.clic;
  j["clic_penalty_trace"] = information.trace;
  j["iterations"] = iterations;
  j["converged"] = converged;
  j["message"] = message;
  return j;
}

}  // namespace spex::maxid
