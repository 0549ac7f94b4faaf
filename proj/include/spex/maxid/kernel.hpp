#pragma once

#include <memory>
#include <vector>

namespace spex::maxid {

// Below this beta the mean measure is evaluated at its beta -> 0 limit.
inline constexpr double kBetaZero = 1e-10;

// Tail of the Poisson mean measure, kbar(r) = r^-1 exp{(1 - r^beta) / beta}.
// The beta -> 0 limit is r^-2.
double kappa_bar(double r, double beta);
double log_kappa_bar(double r, double beta);
// The r with kappa_bar(r, beta) == mass.
double kappa_bar_inverse(double mass, double beta);

// Correlation of the Gaussian profile, exp{-(d / lambda)^nu}.
double rho(double d, double lambda, double nu);

// Exponent function and its partial derivatives in (z1, z2).
struct ExponentParts {
  double v = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double v12 = 0.0;
};

// Pairwise exponent function of Z(s) = max_i R_i W_i(s), with W a standard
// Gaussian process and negative profile values contributing nothing:
//
//   V(z1, z2) = E[ kbar( min(z1 / W1+, z2 / W2+) ) ].
//
// Writing (W1, W2) in polar form reduces the expectation to
//   V = (1/2pi) * integral over angle of Psi(h(angle)),
//   Psi(h) = integral_0^inf kbar(h / R) R exp(-R^2 / 2) dR,
// where h is the smaller of z_i / c_i(angle) over the positive profile
// directions. Psi is tabulated once per beta; the angular integrals use
// Gauss-Legendre rules and the mixed partial has a closed form at the
// angle where the two branches of the minimum meet.
class Kernel {
 public:
  explicit Kernel(double beta, int angular_nodes = 60);

  double beta() const { return beta_; }
  int angular_nodes() const { return static_cast<int>(nodes_.size()); }

  // Radial profile and its derivative.
  double psi(double h) const;
  double psi_derivative(double h) const;

  double exponent(double z1, double z2, double rho) const;
  ExponentParts exponent_parts(double z1, double z2, double rho) const;

  // Single-site exponent V(z) = E[kbar(z / W+)] and its derivative.
  double single_site(double z) const;
  double single_site_derivative(double z) const;

  // Marginal distribution G(z) = exp(-V(z)), its log density and inverse.
  double cdf(double z) const;
  double log_density(double z) const;
  double quantile(double u) const;

 private:
  void build_profile_table();
  void build_margin_table();
  // ln Psi and d ln Psi / d ln h by quadrature (table construction).
  void profile_direct(double log_h, double& log_psi, double& slope) const;
  double log_psi(double log_h, double* slope) const;
  // Angular integrals over (-pi/2, tau].
  // Returns the integral of Psi(z / cos) and sets *derivative to its z-derivative.
  double angular(double z, double tau, double* derivative) const;
  void single_site_both(double z, double& v, double& dv) const;

  double beta_;
  std::vector<double> nodes_, weights_;  // Gauss-Legendre on [-1, 1]
  // Both tables share the ln h (ln z) grid log_lo_ + i * log_step_; the upper
  // end stops where Psi underflows.
  double log_lo_ = 0.0, log_step_ = 0.0;
  std::vector<double> profile_log_, profile_slope_;
  std::vector<double> margin_log_, margin_slope_;  // ln V(z), d ln V / d ln z
};

// Shared kernels keyed by (beta, nodes); safe for concurrent use.
std::shared_ptr<const Kernel> kernel_for(double beta, int angular_nodes = 60);

}  // namespace spex::maxid
