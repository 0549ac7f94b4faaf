#pragma once

#include <array>
#include <span>

namespace spex::evd {

// Generalised extreme value parameters. sigma > 0; the support is
// {x : 1 + xi (x - mu) / sigma > 0}, or the whole real line when xi == 0.
struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
};

// Below this |xi| the Gumbel expressions are used.
inline constexpr double kGumbelThreshold = 1e-8;

void validate(const GevParams& p);  // throws DomainError

double gev_cdf(double x, const GevParams& p);
double gev_quantile(double u, const GevParams& p);
double gev_logpdf(double x, const GevParams& p);

// Log-density together with its partial derivatives in (mu, sigma, xi).
// Off the support the value is -inf and the derivatives are zero.
struct LogpdfGrad {
  double value = 0.0;
  double d_mu = 0.0;
  double d_sigma = 0.0;
  double d_xi = 0.0;
  bool on_support = true;
};
LogpdfGrad gev_logpdf_grad(double x, const GevParams& p);

struct NllGrad {
  double nll = 0.0;
  std::array<double, 3> grad{};  // d/dmu, d/dsigma, d/dxi
  bool valid = true;             // false when any datum lies off the support
};
NllGrad gev_nll_grad(const GevParams& p, std::span<const double> data);

// Probability integral transform (the fitted CDF evaluated at the datum).
inline double pit(double x, const GevParams& p) { return gev_cdf(x, p); }

struct ReturnSpec {
  int period_years = 100;
  int block_frequency = 12;  // blocks per year; each block is its own series
};

// (1 - 1/T) quantile of the per-block distribution.
double return_level(const ReturnSpec& spec, const GevParams& p);

// 100 * (target - base) / base.
double relative_change(double base, double target);

// Continuous ranked probability score, integral of (F(t) - 1{t >= y})^2.
// Closed form for xi < 1; adaptive quadrature otherwise.
double crps_gev(double y, const GevParams& p);
double crps_gev_numeric(double y, const GevParams& p);

}  // namespace spex::evd
