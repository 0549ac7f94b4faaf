#pragma once

// Reference computations written independently of the library, used as
// test oracles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

// GEV log-density from the textbook formula.
inline double gev_logpdf(double x, double mu, double sigma, double xi) {
  const double z = (x - mu) / sigma;
  if (std::abs(xi) < 1e-12) return -std::log(sigma) - z - std::exp(-z);
  const double t = 1.0 + xi * z;
  if (t <= 0.0) return -std::numeric_limits<double>::infinity();
  return -std::log(sigma) - (1.0 / xi + 1.0) * std::log(t) - std::pow(t, -1.0 / xi);
}

inline double gev_cdf(double x, double mu, double sigma, double xi) {
  const double z = (x - mu) / sigma;
  if (std::abs(xi) < 1e-12) return std::exp(-std::exp(-z));
  const double t = 1.0 + xi * z;
  if (t <= 0.0) return xi > 0 ? 0.0 : 1.0;
  return std::exp(-std::pow(t, -1.0 / xi));
}

inline double gev_draw(std::mt19937_64& rng, double mu, double sigma, double xi) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  while (u <= 0.0) u = unif(rng);
  const double e = -std::log(u);
  if (std::abs(xi) < 1e-12) return mu - sigma * std::log(e);
  return mu + sigma * (std::pow(e, -xi) - 1.0) / xi;
}

inline double gev_nll(const std::vector<double>& x, double mu, double sigma, double xi) {
  if (!(sigma > 0.0)) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (double v : x) s -= gev_logpdf(v, mu, sigma, xi);
  return s;
}

// Nelder-Mead simplex minimiser.
inline Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x0,
                                   double scale, int iterations = 20000, double tol = 1e-14) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> pts{x0};
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd p = x0;
    p[i] += scale;
    pts.push_back(p);
  }
  std::vector<double> val;
  for (const auto& p : pts) val.push_back(f(p));
  for (int it = 0; it < iterations; ++it) {
    std::vector<std::size_t> idx(pts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return val[a] < val[b]; });
    std::vector<Eigen::VectorXd> p2;
    std::vector<double> v2;
    for (auto i : idx) {
      p2.push_back(pts[i]);
      v2.push_back(val[i]);
    }
    pts = p2;
    val = v2;
    if (std::abs(val.back() - val.front()) <= tol * (1.0 + std::abs(val.front()))) break;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) c += pts[static_cast<std::size_t>(i)];
    c /= static_cast<double>(n);
    const Eigen::VectorXd xr = c + (c - pts.back());
    const double fr = f(xr);
    if (fr < val.front()) {
      const Eigen::VectorXd xe = c + 2.0 * (c - pts.back());
      const double fe = f(xe);
      if (fe < fr) {
        pts.back() = xe;
        val.back() = fe;
      } else {
        pts.back() = xr;
        val.back() = fr;
      }
    } else if (fr < val[val.size() - 2]) {
      pts.back() = xr;
      val.back() = fr;
    } else {
      const Eigen::VectorXd xc = c + 0.5 * (pts.back() - c);
      const double fc = f(xc);
      if (fc < val.back()) {
        pts.back() = xc;
        val.back() = fc;
      } else {
        for (std::size_t i = 1; i < pts.size(); ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          val[i] = f(pts[i]);
        }
      }
    }
  }
  return pts[static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin())];
}

// Newton refinement with central-difference derivatives.
inline Eigen::VectorXd newton_polish(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                     double h = 1e-4, int steps = 8) {
  const Eigen::Index n = x.size();
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXd g(n);
    Eigen::MatrixXd H(n, n);
    const double f0 = f(x);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[i] = h;
      const double fp = f(x + e), fm = f(x - e);
      g[i] = (fp - fm) / (2 * h);
      H(i, i) = (fp - 2 * f0 + fm) / (h * h);
      for (Eigen::Index j = 0; j < i; ++j) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
        d[j] = h;
        H(i, j) = H(j, i) = (f(x + e + d) - f(x + e - d) - f(x - e + d) + f(x - e - d)) / (4 * h * h);
      }
    }
    const Eigen::VectorXd step = H.ldlt().solve(g);
    if (!step.allFinite()) break;
    double t = 1.0;
    while (t > 1e-6 && !(f(x - t * step) <= f0)) t *= 0.5;
    x -= t * step;
    if (step.norm() * t < 1e-12) break;
  }
  return x;
}

// Direct three-parameter GEV maximum likelihood (mu, sigma, xi).
inline Eigen::Vector3d gev_mle(const std::vector<double>& x) {
  double m = 0, v = 0;
  for (double d : x) m += d;
  m /= x.size();
  for (double d : x) v += (d - m) * (d - m);
  v /= (x.size() - 1);
  const double s0 = std::sqrt(6.0 * v) / M_PI;
  auto f = [&](const Eigen::VectorXd& p) { return gev_nll(x, p[0], std::exp(p[1]), p[2]); };
  Eigen::VectorXd p0(3);
  p0 << m - 0.5772 * s0, std::log(s0), 0.05;
  Eigen::VectorXd p = nelder_mead(f, p0, 0.1);
  p = newton_polish(f, p, 1e-4);
  return {p[0], std::exp(p[1]), p[2]};
}

// Integral over [a, b] by adaptive Gauss-Kronrod.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 25, tol);
}

// Integral over a possibly infinite interval by tanh-sinh.
inline double integrate_ts(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, tol);
}

}  // namespace oracle

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/owens_t.hpp>

namespace oracle {

// Mean measure of the radial point process and its density -d kbar / dr.
inline double kbar(double r, double beta) {
  if (beta < 1e-10) return 1.0 / (r * r);
  return std::exp((1.0 - std::pow(r, beta)) / beta) / r;
}
inline double kbar_density(double r, double beta) {
  if (beta < 1e-10) return 2.0 / (r * r * r);
  const double k = kbar(r, beta);
  if (k == 0.0) return 0.0;
  return k * (1.0 / r + std::pow(r, beta - 1.0));
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// Bivariate standard normal CDF for h, k > 0 via Owen's T.
inline double bvn_cdf(double h, double k, double rho) {
  if (rho >= 1.0) return norm_cdf(std::min(h, k));
  const double s = std::sqrt(1.0 - rho * rho);
  return 0.5 * norm_cdf(h) + 0.5 * norm_cdf(k) - boost::math::owens_t(h, (k - rho * h) / (h * s)) -
         boost::math::owens_t(k, (h - rho * k) / (k * s));
}

// V, V1 and V12 written as radial integrals over the point-process
// intensity: V = int kbar'(r) P(r W1 > z1 or r W2 > z2) dr, with r = e^s.
inline double radial(const std::function<double(double r)>& g) {
  return integrate([&](double s) { const double r = std::exp(s); return g(r) * r; }, -12.0, 12.0, 1e-12);
}

inline double exponent_v(double z1, double z2, double rho, double beta) {
  return radial([&](double r) { return kbar_density(r, beta) * (1.0 - bvn_cdf(z1 / r, z2 / r, rho)); });
}

inline double single_site_v(double z, double beta) {
  return radial([&](double r) { return kbar_density(r, beta) * norm_cdf(-z / r); });
}

inline double exponent_v1(double z1, double z2, double rho, double beta) {
  const double s = std::sqrt(1.0 - rho * rho);
  return -radial([&](double r) {
    const double h = z1 / r, k = z2 / r;
    return kbar_density(r, beta) * norm_pdf(h) / r * norm_cdf((k - rho * h) / s);
  });
}

inline double exponent_v12(double z1, double z2, double rho, double beta) {
  const double s2 = 1.0 - rho * rho;
  return -radial([&](double r) {
    const double h = z1 / r, k = z2 / r;
    const double phi2 = std::exp(-(h * h - 2 * rho * h * k + k * k) / (2 * s2)) / (2 * M_PI * std::sqrt(s2));
    return kbar_density(r, beta) * phi2 / (r * r);
  });
}

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

// Monte Carlo V = E[kbar(min(z1 / W1+, z2 / W2+))] with kbar(inf) = 0.
inline McEstimate exponent_v_mc(double z1, double z2, double rho, double beta, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const double s = std::sqrt(1.0 - rho * rho);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = nd(rng), b = nd(rng);
    const double w1 = a, w2 = rho * a + s * b;
    double r = std::numeric_limits<double>::infinity();
    if (w1 > 0) r = std::min(r, z1 / w1);
    if (w2 > 0) r = std::min(r, z2 / w2);
    const double v = std::isinf(r) ? 0.0 : kbar(r, beta);
    sum += v;
    sum2 += v * v;
  }
  const double m = sum / n;
  return {m, std::sqrt((sum2 / n - m * m) / (n - 1))};
}

}  // namespace oracle
