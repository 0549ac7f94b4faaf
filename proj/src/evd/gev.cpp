#include "spex/evd/gev.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "spex/common/error.hpp"

namespace spex::evd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool gumbel(const GevParams& p) { return std::abs(p.xi) < kGumbelThreshold; }

// (w/(1+w) - log1p(w)) / w^2 for small |w|, as a power series.
double small_w_series(double w) {
  double sum = 0.0;
  double wk = 1.0;
  for (int k = 2; k < 12; ++k) {
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;
    sum += sign * wk * (k - 1.0) / k;
    wk *= w;
  }
  return sum;
}

}  // namespace

void validate(const GevParams& p) {
  if (!std::isfinite(p.mu) || !std::isfinite(p.xi) || !std::isfinite(p.sigma) || !(p.sigma > 0.0)) {
    throw DomainError("invalid GEV parameters (mu=" + std::to_string(p.mu) + ", sigma=" +
                      std::to_string(p.sigma) + ", xi=" + std::to_string(p.xi) + ")");
  }
}

double gev_cdf(double x, const GevParams& p) {
  validate(p);
  if (!std::isfinite(x)) throw DomainError("gev_cdf: non-finite argument");
  const double z = (x - p.mu) / p.sigma;
  if (gumbel(p)) return std::exp(-std::exp(-z));
  const double t = 1.0 + p.xi * z;
  if (t <= 0.0) return p.xi > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::exp(-std::log1p(p.xi * z) / p.xi));
}

double gev_quantile(double u, const GevParams& p) {
  validate(p);
  if (!(u > 0.0 && u < 1.0)) throw DomainError("gev_quantile: probability must lie in (0, 1)");
  const double y = -std::log(-std::log(u));  // Gumbel-scale quantile
  if (gumbel(p)) return p.mu + p.sigma * y;
  return p.mu + p.sigma * std::expm1(p.xi * y) / p.xi;
}

double gev_logpdf(double x, const GevParams& p) {
  validate(p);
  const double z = (x - p.mu) / p.sigma;
  if (gumbel(p)) return -std::log(p.sigma) - z - std::exp(-z);
  const double w = p.xi * z;
  if (1.0 + w <= 0.0) return -kInf;
  const double a = std::log1p(w) / p.xi;
  return -std::log(p.sigma) - std::log1p(w) - a - std::exp(-a);
}

LogpdfGrad gev_logpdf_grad(double x, const GevParams& p) {
  LogpdfGrad out;
  const double s = p.sigma;
  const double z = (x - p.mu) / s;
  if (gumbel(p)) {
    const double e = std::exp(-z);
    out.value = -std::log(s) - z - e;
    out.d_mu = (1.0 - e) / s;
    out.d_sigma = (-1.0 + z * (1.0 - e)) / s;
    out.d_xi = -z + (1.0 - e) * z * z / 2.0;
    return out;
  }
  const double xi = p.xi;
  const double w = xi * z;
  if (1.0 + w <= 0.0) {
    out.value = -kInf;
    out.on_support = false;
    return out;
  }
  const double t = 1.0 + w;
  const double lt = std::log1p(w);
  const double a = lt / xi;        // ln t / xi
  const double e = std::exp(-a);   // t^(-1/xi)
  out.value = -std::log(s) - lt - a - e;
  const double common = ((1.0 + xi) - e) / (s * t);
  out.d_mu = common;
  out.d_sigma = -1.0 / s + common * z;
  // dA/dxi = z/(xi t) - ln t / xi^2 = z^2 * (w/(1+w) - log1p(w)) / w^2
  const double da = std::abs(w) < 1e-3 ? z * z * small_w_series(w) : (w / t - lt) / (xi * xi);
  out.d_xi = -z / t - (1.0 - e) * da;
  return out;
}

NllGrad gev_nll_grad(const GevParams& p, std::span<const double> data) {
  validate(p);
  NllGrad out;
  for (double x : data) {
    if (!std::isfinite(x)) throw DomainError("gev_nll_grad: non-finite datum");
    const LogpdfGrad g = gev_logpdf_grad(x, p);
    if (!g.on_support) {
      out.nll = kInf;
      out.valid = false;
      out.grad = {0.0, 0.0, 0.0};
      return out;
    }
    out.nll -= g.value;
    out.grad[0] -= g.d_mu;
    out.grad[1] -= g.d_sigma;
    out.grad[2] -= g.d_xi;
  }
  return out;
}

double return_level(const ReturnSpec& spec, const GevParams& p) {
  if (spec.period_years < 2) throw DomainError("return period must be at least 2 years");
  if (spec.block_frequency < 1) throw DomainError("block frequency must be positive");
  return gev_quantile(1.0 - 1.0 / spec.period_years, p);
}

double relative_change(double base, double target) {
  if (base == 0.0) throw DomainError("relative change from a zero base");
  return 100.0 * (target - base) / base;
}

}  // namespace spex::evd
