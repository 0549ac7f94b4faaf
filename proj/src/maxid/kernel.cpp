#include "spex/maxid/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <list>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "spex/common/error.hpp"
#include "spex/common/quadrature.hpp"

namespace spex::maxid {
namespace {

constexpr double kPi = std::numbers::pi;

// ln h grid of the radial profile and ln z grid of the margin. The upper
// end is cut where ln Psi falls below kLogFloor.
constexpr double kLogLo = -12.0;
constexpr double kLogHi = 30.0;
constexpr int kTableNodes = 1025;
constexpr double kLogFloor = -760.0;

// Radial quadrature: 8-point Gauss-Legendre panels in u = ln R.
constexpr int kPanelOrder = 8;

const std::vector<double>& panel_nodes() {
  static const auto gl = gauss_legendre(kPanelOrder);
  return gl.first;
}
const std::vector<double>& panel_weights() {
  static const auto gl = gauss_legendre(kPanelOrder);
  return gl.second;
}

struct Hermite {
  double value, slope;
};

// Cubic Hermite interpolation on a uniform grid; linear extrapolation outside.
Hermite hermite(const std::vector<double>& y, const std::vector<double>& m, double lo, double step, double x) {
  const int n = static_cast<int>(y.size());
  const double hi = lo + step * (n - 1);
  if (std::isnan(x)) throw NumericError("kernel: table lookup at NaN");
  if (x <= lo) return {y.front() + m.front() * (x - lo), m.front()};
  if (x >= hi) return {y.back() + m.back() * (x - hi), m.back()};
  int i = static_cast<int>((x - lo) / step);
  i = std::min(i, n - 2);
  const double t = (x - lo) / step - i;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double value = h00 * y[i] + h10 * step * m[i] + h01 * y[i + 1] + h11 * step * m[i + 1];
  const double d00 = 6 * t2 - 6 * t, d10 = 3 * t2 - 4 * t + 1, d01 = -6 * t2 + 6 * t, d11 = 3 * t2 - 2 * t;
  const double slope = (d00 * y[i] + d01 * y[i + 1]) / step + d10 * m[i] + d11 * m[i + 1];
  return {value, slope};
}

}  // namespace

double log_kappa_bar(double r, double beta) {
  if (!(r > 0.0)) throw DomainError("kappa_bar: r must be positive");
  if (beta < 0.0) throw DomainError("kappa_bar: beta must be non-negative");
  const double lr = std::log(r);
  if (beta < kBetaZero) return -2.0 * lr;
  return -lr - std::expm1(beta * lr) / beta;
}

double kappa_bar(double r, double beta) {
  if (std::isinf(r)) return 0.0;
  return std::exp(log_kappa_bar(r, beta));
}

double kappa_bar_inverse(double mass, double beta) {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("kappa_bar_inverse: mass must be positive");
  const double target = std::log(mass);
  // F(t) = ln kbar(e^t) - ln mass is strictly decreasing and concave in t.
  auto f = [&](double t) {
    return (beta < kBetaZero ? -2.0 * t : -t - std::expm1(beta * t) / beta) - target;
  };
  auto df = [&](double t) { return beta < kBetaZero ? -2.0 : -1.0 - std::exp(beta * t); };
  double lo = -target / 2.0 - 1.0, hi = -target / 2.0 + 1.0;
  while (f(lo) < 0.0) lo -= 2.0 * (hi - lo);
  while (f(hi) > 0.0) hi += 2.0 * (hi - lo);
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double ft = f(t);
    if (ft > 0.0) lo = t;
    else hi = t;
    double next = t - ft / df(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) < 1e-14 * (1.0 + std::abs(t))) {
      t = next;
      break;
    }
    t = next;
  }
  return std::exp(t);
}

double rho(double d, double lambda, double nu) {
  if (!(lambda > 0.0)) throw DomainError("rho: lambda must be positive");
  if (!(d >= 0.0)) throw DomainError("rho: distance must be non-negative");
  if (!(nu > 0.0 && nu <= 2.0)) throw DomainError("rho: nu must lie in (0, 2]");
  return std::exp(-std::pow(d / lambda, nu));
}

Kernel::Kernel(double beta, int angular_nodes) : beta_(beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("kernel: beta must be finite and non-negative");
  if (angular_nodes < 4) throw ConfigError("kernel: at least 4 angular nodes are required");
  auto gl = gauss_legendre(angular_nodes);
  nodes_ = std::move(gl.first);
  weights_ = std::move(gl.second);
  build_profile_table();
  build_margin_table();
}

// Integrand in u = ln R: exp(f(u)), f(u) = ln kbar(h e^-u) + 2u - e^{2u}/2,
// f'(u) = 3 + x^beta - e^{2u} with x = h e^-u. f is strictly concave, so the
// integral is taken between the two points where f has dropped by kDrop
// below its peak, on panels graded towards the peak.
void Kernel::profile_direct(double log_h, double& log_psi, double& slope) const {
  constexpr double kDrop = 42.0;
  const double b = beta_;
  const bool zero = b < kBetaZero;
  auto power = [&](double u) { return zero ? 1.0 : std::exp(b * (log_h - u)); };  // x^beta
  // f'(u) = 0 solved as g(u) = ln(3 + x^beta) - 2u = 0, which is close to
  // linear in u and does not overflow.
  auto g = [&](double u, double& dg) {
    const double a = zero ? 0.0 : b * (log_h - u);
    const double l = a > 0.0 ? a + std::log1p(3.0 * std::exp(-a)) : std::log(3.0 + std::exp(a));
    const double w = zero ? 0.0 : 1.0 / (1.0 + 3.0 * std::exp(-a));  // x^beta / (3 + x^beta)
    dg = -b * w - 2.0;
    return l - 2.0 * u;
  };
  auto f = [&](double u) {
    const double lx = log_h - u;
    const double lk = zero ? -2.0 * lx : -lx - std::expm1(b * lx) / b;
    return lk + 2.0 * u - 0.5 * std::exp(2.0 * u);
  };
  // Peak: g is decreasing; bracket then safeguarded Newton.
  double dg = 0.0;
  double lo = -1.0, hi = 1.0;
  while (g(lo, dg) < 0.0) lo -= 2.0;
  while (g(hi, dg) > 0.0) hi += 1.0;
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gv = g(u, dg);
    if (gv > 0.0) lo = u;
    else hi = u;
    double next = u - gv / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) < 1e-13 * (1.0 + std::abs(u))) {
      u = next;
      break;
    }
    u = next;
  }
  const double peak = f(u);
  // Points where f = peak - kDrop, by bisection on each side.
  auto drop_point = [&](double dir) {
    double inner = u, step = 0.25;
    double outer = u + dir * step;
    while (peak - f(outer) < kDrop) {
      inner = outer;
      step *= 2.0;
      outer = u + dir * step;
    }
    for (int it = 0; it < 24; ++it) {
      const double mid = 0.5 * (inner + outer);
      if (peak - f(mid) < kDrop) inner = mid;
      else outer = mid;
    }
    return outer;
  };
  const double left = drop_point(-1.0), right = drop_point(1.0);
  // Panel edges as fractions of each side, denser near the peak.
  static constexpr double fractions[] = {0.0, 0.02, 0.05, 0.09, 0.14, 0.2, 0.28, 0.38, 0.5, 0.65, 0.82, 1.0};
  const auto& xs = panel_nodes();
  const auto& ws = panel_weights();
  double mass = 0.0, moment = 0.0;
  auto panel = [&](double a, double c) {
    const double half = 0.5 * (c - a), mid = 0.5 * (c + a);
    for (int k = 0; k < kPanelOrder; ++k) {
      const double uu = mid + half * xs[k];
      const double e = std::exp(f(uu) - peak) * ws[k] * half;
      if (e == 0.0) continue;  // x^beta may overflow where the integrand underflows
      mass += e;
      moment += e * power(uu);
    }
  };
  for (std::size_t p = 0; p + 1 < std::size(fractions); ++p) {
    panel(u + (left - u) * fractions[p + 1], u + (left - u) * fractions[p]);
    panel(u + (right - u) * fractions[p], u + (right - u) * fractions[p + 1]);
  }
  log_psi = peak + std::log(mass);
  slope = -(1.0 + moment / mass);
}

void Kernel::build_profile_table() {
  log_lo_ = kLogLo;
  double log_hi = kLogHi;
  if (beta_ >= kBetaZero) {
    // Shrink the range to where ln Psi stays above the floor.
    double ps = 0.0, sl = 0.0;
    profile_direct(log_hi, ps, sl);
    if (!(ps > kLogFloor)) {
      double inner = 0.0, outer = log_hi;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (inner + outer);
        profile_direct(mid, ps, sl);
        if (ps > kLogFloor) inner = mid;
        else outer = mid;
      }
      log_hi = outer;
    }
  }
  log_step_ = (log_hi - log_lo_) / (kTableNodes - 1);
  profile_log_.resize(kTableNodes);
  profile_slope_.resize(kTableNodes);
  for (int i = 0; i < kTableNodes; ++i) {
    const double lh = log_lo_ + log_step_ * i;
    if (beta_ < kBetaZero) {
      profile_log_[i] = std::log(2.0) - 2.0 * lh;
      profile_slope_[i] = -2.0;
    } else {
      profile_direct(lh, profile_log_[i], profile_slope_[i]);
    }
  }
}

double Kernel::log_psi(double log_h, double* slope) const {
  const Hermite h = hermite(profile_log_, profile_slope_, log_lo_, log_step_, log_h);
  if (slope != nullptr) *slope = h.slope;
  return h.value;
}

double Kernel::psi(double h) const {
  if (std::isinf(h)) return 0.0;
  return std::exp(log_psi(std::log(h), nullptr));
}

double Kernel::psi_derivative(double h) const {
  if (std::isinf(h)) return 0.0;
  double slope = 0.0;
  const double lp = log_psi(std::log(h), &slope);
  return std::exp(lp) * slope / h;
}

double Kernel::angular(double z, double tau, double* derivative) const {
  const double a = -kPi / 2.0;
  const double half = 0.5 * (tau - a), mid = 0.5 * (tau + a);
  const double lz = std::log(z);
  double sum = 0.0, dsum = 0.0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const double c = std::cos(mid + half * nodes_[k]);
    if (c <= 0.0) continue;
    double slope = 0.0;
    const double e = weights_[k] * std::exp(log_psi(lz - std::log(c), &slope));
    sum += e;
    // Psi'(h) / cos = Psi(h) * slope / z
    dsum += e * slope;
  }
  if (derivative != nullptr) *derivative = dsum * half / z;
  return sum * half;
}

void Kernel::single_site_both(double z, double& v, double& dv) const {
  // Symmetric in the angle: (1/2pi) * 2 * integral over (-pi/2, 0].
  v = angular(z, 0.0, &dv) / kPi;
  dv /= kPi;
}

double Kernel::single_site(double z) const {
  if (!(z > 0.0)) throw DomainError("single-site exponent needs z > 0");
  if (std::isinf(z)) return 0.0;
  return angular(z, 0.0, nullptr) / kPi;
}

double Kernel::single_site_derivative(double z) const {
  if (!(z > 0.0)) throw DomainError("single-site exponent needs z > 0");
  if (std::isinf(z)) return 0.0;
  double dv = 0.0;
  angular(z, 0.0, &dv);
  return dv / kPi;
}

void Kernel::build_margin_table() {
  margin_log_.clear();
  margin_slope_.clear();
  for (int i = 0; i < kTableNodes; ++i) {
    const double z = std::exp(log_lo_ + log_step_ * i);
    double v = 0.0, dv = 0.0;
    single_site_both(z, v, dv);
    if (!(v > 0.0) || !(std::log(v) > kLogFloor)) break;
    margin_log_.push_back(std::log(v));
    margin_slope_.push_back(z * dv / v);
  }
  if (margin_log_.size() < 2) throw NumericError("kernel: marginal table is degenerate");
}

double Kernel::cdf(double z) const {
  if (!(z > 0.0)) throw DomainError("marginal cdf needs z > 0");
  return std::exp(-single_site(z));
}

double Kernel::log_density(double z) const {
  if (!(z > 0.0)) throw DomainError("marginal density needs z > 0");
  double v = 0.0, dv = 0.0;
  single_site_both(z, v, dv);
  return -v + std::log(-dv);
}

double Kernel::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("marginal quantile: u must lie in (0, 1)");
  const double target = std::log(-std::log(u));  // ln V(z) at the answer
  const double step = log_step_;
  const double top = log_lo_ + step * (margin_log_.size() - 1);
  // margin_log_ is decreasing in ln z.
  double lz;
  if (target >= margin_log_.front()) {
    lz = log_lo_ + (target - margin_log_.front()) / margin_slope_.front();
  } else if (target <= margin_log_.back()) {
    lz = top + (target - margin_log_.back()) / margin_slope_.back();
  } else {
    const auto it = std::lower_bound(margin_log_.begin(), margin_log_.end(), target,
                                     [](double a, double b) { return a > b; });
    const int i = static_cast<int>(it - margin_log_.begin()) - 1;
    // Invert the Hermite segment by Newton iteration inside [i, i+1].
    double lo = log_lo_ + step * i, hi = lo + step;
    lz = lo + step * (target - margin_log_[i]) / (margin_log_[i + 1] - margin_log_[i]);
    for (int it2 = 0; it2 < 20; ++it2) {
      const Hermite h = hermite(margin_log_, margin_slope_, log_lo_, step, lz);
      double next = lz - (h.value - target) / h.slope;
      next = std::clamp(next, lo, hi);
      if (std::abs(next - lz) < 1e-14) {
        lz = next;
        break;
      }
      lz = next;
    }
  }
  // Polish against the angular quadrature itself so cdf(quantile(u)) == u.
  // ln V is decreasing in ln z: bracket the root, then Newton with bisection fallback.
  auto resid = [&](double x, double* slope) {
    const double z = std::exp(x);
    double v = 0.0, dv = 0.0;
    single_site_both(z, v, dv);
    if (slope != nullptr) *slope = z * dv / v;
    return std::log(v) - target;
  };
  double a = lz - 0.5, b = lz + 0.5;
  for (int it = 0; resid(a, nullptr) <= 0.0; ++it) {
    if (it == 60) throw NumericError("marginal quantile: no bracket below u=" + std::to_string(u));
    a -= 1.0 + (b - a);
  }
  for (int it = 0; resid(b, nullptr) >= 0.0; ++it) {
    if (it == 60) throw NumericError("marginal quantile: no bracket above u=" + std::to_string(u));
    b += 1.0 + (b - a);
  }
  lz = std::clamp(lz, a, b);
  for (int it = 0; it < 200; ++it) {
    double slope = 0.0;
    const double r = resid(lz, &slope);
    if (r == 0.0) break;
    if (r > 0.0) a = lz; else b = lz;
    double next = lz - r / slope;
    if (!std::isfinite(next) || next <= a || next >= b) next = 0.5 * (a + b);
    const double delta = std::abs(next - lz);
    lz = next;
    if (delta < 1e-13 || b - a < 1e-13) break;
  }
  if (!std::isfinite(lz)) throw NumericError("marginal quantile: inversion diverged");
  return std::exp(lz);
}

double Kernel::exponent(double z1, double z2, double r) const { return exponent_parts(z1, z2, r).v; }

ExponentParts Kernel::exponent_parts(double z1, double z2, double r) const {
  if (!(z1 > 0.0) || !(z2 > 0.0)) throw DomainError("exponent: z1 and z2 must be positive");
  if (!(r > -1.0 && r <= 1.0)) throw DomainError("exponent: correlation must lie in (-1, 1]");
  ExponentParts out;
  if (std::isinf(z1) || std::isinf(z2)) {
    const double z = std::min(z1, z2);
    if (std::isinf(z)) return out;
    double v = 0.0, dv = 0.0;
    single_site_both(z, v, dv);
    out.v = v;
    (std::isinf(z2) ? out.v1 : out.v2) = dv;
    return out;
  }
  if (r >= 1.0 - 1e-12) {
    // Comonotone profiles: V(z1, z2) = V(min(z1, z2)).
    const double z = std::min(z1, z2);
    double v = 0.0, dv = 0.0;
    single_site_both(z, v, dv);
    out.v = v;
    if (z1 < z2) out.v1 = dv;
    else if (z2 < z1) out.v2 = dv;
    else out.v1 = out.v2 = 0.5 * dv;
    return out;
  }
  const double s = std::sqrt((1.0 - r) * (1.0 + r));
  const double q1 = (z2 - r * z1) / (z1 * s);
  const double q2 = (z1 - r * z2) / (z2 * s);
  const double t1 = std::atan(q1), t2 = std::atan(q2);
  double d1 = 0.0, d2 = 0.0;
  out.v = (angular(z1, t1, &d1) + angular(z2, t2, &d2)) / (2.0 * kPi);
  out.v1 = d1 / (2.0 * kPi);
  out.v2 = d2 / (2.0 * kPi);
  const double radius = std::sqrt((z1 * z1 + z2 * z2 - 2.0 * r * z1 * z2) / (s * s));
  out.v12 = psi_derivative(radius) / (2.0 * kPi * s * radius);
  if (!std::isfinite(out.v) || !std::isfinite(out.v1) || !std::isfinite(out.v2) || !std::isfinite(out.v12)) {
    throw NumericError("exponent: non-finite quadrature at z1=" + std::to_string(z1) +
                       " z2=" + std::to_string(z2) + " rho=" + std::to_string(r) +
                       " beta=" + std::to_string(beta_));
  }
  return out;
}

std::shared_ptr<const Kernel> kernel_for(double beta, int angular_nodes) {
  using Key = std::pair<double, int>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const Kernel>> cache;
  static std::list<Key> order;
  constexpr std::size_t kCapacity = 256;
  const Key key{beta, angular_nodes};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto k = std::make_shared<const Kernel>(beta, angular_nodes);
  std::lock_guard lock(mutex);
  auto [it, inserted] = cache.emplace(key, k);
  if (inserted) {
    order.push_back(key);
    if (order.size() > kCapacity) {
      cache.erase(order.front());
      order.pop_front();
    }
  }
  return it->second;
}

}  // namespace spex::maxid
