#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "spex/common/error.hpp"
#include "spex/common/log.hpp"
#include "spex/evd/gev.hpp"

namespace spex::evd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double integrate(auto&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

}  // namespace

double crps_gev_numeric(double y, const GevParams& p) {
  validate(p);
  if (!std::isfinite(y)) throw DomainError("crps_gev: non-finite observation");
  if (p.xi >= 2.0) return kInf;  // (1 - F)^2 is not integrable
  double lower = -kInf;
  double upper = kInf;
  if (!(std::abs(p.xi) < kGumbelThreshold)) {
    if (p.xi > 0.0) lower = p.mu - p.sigma / p.xi;
    else upper = p.mu + p.sigma / (-p.xi);
  }
  auto f_sq = [&](double t) {
    const double f = gev_cdf(t, p);
    return f * f;
  };
  auto s_sq = [&](double t) {
    const double s = 1.0 - gev_cdf(t, p);
    return s * s;
  };
  // Split at the observation and, for finite ones, at the location so the
  // adaptive rule sees the bulk of the mass.
  double total = 0.0;
  const double left_end = std::min(y, upper);
  if (left_end > lower) {
    if (std::isinf(lower)) {
      const double mid = std::min(left_end, p.mu);
      total += integrate(f_sq, -kInf, mid) + integrate(f_sq, mid, left_end);
    } else {
      total += integrate(f_sq, lower, left_end);
    }
  }
  if (y > upper) total += y - upper;
  const double right_start = std::max(y, lower);
  if (upper > right_start) {
    if (std::isinf(upper)) {
      const double mid = std::max(right_start, p.mu + p.sigma);
      total += integrate(s_sq, right_start, mid) + integrate(s_sq, mid, kInf);
    } else {
      total += integrate(s_sq, right_start, upper);
    }
  }
  if (y < lower) total += lower - y;
  return total;
}

double crps_gev(double y, const GevParams& p) {
  validate(p);
  if (!std::isfinite(y)) throw DomainError("crps_gev: non-finite observation");
  const double z = (y - p.mu) / p.sigma;
  if (std::abs(p.xi) < kGumbelThreshold) {
    const double euler = boost::math::constants::euler<double>();
    const double e = std::exp(-z);
    const double e1 = std::isinf(e) ? 0.0 : boost::math::expint(1, e);
    return p.sigma * (-z + 2.0 * e1 + euler - std::log(2.0));
  }
  if (p.xi >= 1.0) {
    log::warn("crps_gev: shape ", p.xi, " >= 1, using numerical integration");
    return crps_gev_numeric(y, p);
  }
  const double xi = p.xi;
  const double t = 1.0 + xi * z;
  double x;  // -log F(y)
  if (t <= 0.0) x = xi > 0.0 ? kInf : 0.0;
  else x = std::exp(-std::log1p(xi * z) / xi);
  const double f = std::exp(-x);
  const double pg = std::isinf(x) ? 1.0 : (x == 0.0 ? 0.0 : boost::math::gamma_p(1.0 - xi, x));
  const double out = (z + 1.0 / xi) * (2.0 * f - 1.0) +
                     boost::math::tgamma(1.0 - xi) / xi * (2.0 * pg - std::pow(2.0, xi));
  return p.sigma * out;
}

}  // namespace spex::evd
