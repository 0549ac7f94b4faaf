#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "spex/common/error.hpp"
#include "spex/maxid/chi.hpp"
#include "spex/maxid/fit.hpp"
#include "spex/maxid/kernel.hpp"
#include "spex/maxid/pll.hpp"
#include "spex/sim/simulate.hpp"

using namespace spex;
using namespace spex::maxid;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

MaxIdParams stationary(double beta, double lambda, double nu = 1.0) {
  MaxIdParams p;
  p.alpha0_beta = std::log(beta);
  p.alpha0_lambda = std::log(lambda);
  p.nu = nu;
  return p;
}

}  // namespace

TEST_CASE("kappa_bar closed forms") {
  for (double b : {1e-6, 0.1, 0.5, 1.0, 3.0}) CHECK(kappa_bar(1.0, b) == 1.0);
  CHECK(std::abs(kappa_bar(2.0, 1.0) - 0.5 * std::exp(-1.0)) < 1e-12);
  for (double r : {0.3, 1.0, 2.5, 10.0}) {
    CHECK(std::abs(kappa_bar(r, 1e-8) - 1.0 / (r * r)) < 1e-6);
    CHECK(std::abs(kappa_bar(r, 0.0) - 1.0 / (r * r)) < 1e-14);
    CHECK(std::abs(log_kappa_bar(r, 0.7) - std::log(oracle::kbar(r, 0.7))) < 1e-12);
  }
  CHECK_THROWS_AS(kappa_bar(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(kappa_bar(-1.0, 1.0), DomainError);
}

TEST_CASE("kappa_bar inverse and monotonicity") {
  for (double b : {0.0, 0.2, 1.0, 2.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double r = 0.05; r < 20.0; r *= 1.3) {
      const double k = kappa_bar(r, b);
      CHECK(k < prev);
      prev = k;
      CHECK(rel(kappa_bar_inverse(k, b), r) < 1e-9);
    }
  }
}

TEST_CASE("rho correlation") {
  CHECK(rho(0.0, 30.0, 1.0) == 1.0);
  CHECK(std::abs(rho(30.0, 30.0, 1.0) - std::exp(-1.0)) < 1e-15);
  CHECK(std::abs(rho(60.0, 30.0, 2.0) - std::exp(-4.0)) < 1e-15);
  CHECK(rho(10.0, 30.0, 1.0) > rho(20.0, 30.0, 1.0));
}

TEST_CASE("exponent function symmetry and bounds") {
  const Kernel k(0.5);
  for (double r : {0.0, 0.3, 0.8, 0.99}) {
    for (auto [a, b] : {std::pair{0.5, 2.0}, {1.0, 1.0}, {3.0, 0.7}}) {
      CHECK(std::abs(k.exponent(a, b, r) - k.exponent(b, a, r)) < 1e-12 * k.exponent(a, b, r));
      const double v = k.exponent(a, b, r);
      const double va = k.single_site(a), vb = k.single_site(b);
      CHECK(v >= std::max(va, vb) * (1 - 1e-9));
      CHECK(v <= (va + vb) * (1 + 1e-9));
      CHECK(k.exponent(a * 1.1, b, r) < v);
    }
  }
  // Perfect correlation collapses to one site.
  for (double z : {0.3, 1.0, 4.0}) CHECK(rel(k.exponent(z, z, 1.0), k.single_site(z)) < 1e-8);
  // Larger correlation means stronger dependence, smaller V.
  CHECK(k.exponent(1.0, 1.0, 0.9) < k.exponent(1.0, 1.0, 0.3));
}

TEST_CASE("exponent function matches the radial Owen's T oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lz(std::log(0.2), std::log(5.0)), ur(0.0, 0.97), ub(0.1, 2.0);
  for (int i = 0; i < 20; ++i) {
    const double z1 = std::exp(lz(rng)), z2 = std::exp(lz(rng)), r = ur(rng), b = ub(rng);
    const Kernel& k = *kernel_for(b);
    const ExponentParts e = k.exponent_parts(z1, z2, r);
    INFO("z1=" << z1 << " z2=" << z2 << " rho=" << r << " beta=" << b);
    CHECK(rel(e.v, oracle::exponent_v(z1, z2, r, b)) < 1e-6);
    CHECK(rel(e.v1, oracle::exponent_v1(z1, z2, r, b)) < 1e-5);
    CHECK(rel(e.v2, oracle::exponent_v1(z2, z1, r, b)) < 1e-5);
    CHECK(rel(e.v12, oracle::exponent_v12(z1, z2, r, b)) < 1e-4);
    CHECK(rel(k.single_site(z1), oracle::single_site_v(z1, b)) < 1e-6);
  }
}

TEST_CASE("exponent function matches a Monte Carlo oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lz(std::log(0.3), std::log(3.0)), ur(0.0, 0.95), ub(0.2, 1.5);
  int inside = 0;
  for (int i = 0; i < 5; ++i) {
    const double z1 = std::exp(lz(rng)), z2 = std::exp(lz(rng)), r = ur(rng), b = ub(rng);
    const auto mc = oracle::exponent_v_mc(z1, z2, r, b, 200'000, 100 + i);
    if (std::abs(kernel_for(b)->exponent(z1, z2, r) - mc.mean) < 3.0 * mc.se) ++inside;
  }
  CHECK(inside >= 4);
}

TEST_CASE("single-site derivative and marginal distribution") {
  for (double b : {0.05, 0.5, 1.5}) {
    const Kernel& k = *kernel_for(b);
    for (double z : {0.2, 1.0, 5.0}) {
      const double h = 1e-5 * z;
      const double fd = (k.single_site(z + h) - k.single_site(z - h)) / (2 * h);
      CHECK(rel(k.single_site_derivative(z), fd) < 1e-5);
      const double dens = (k.cdf(z + h) - k.cdf(z - h)) / (2 * h);
      CHECK(rel(std::exp(k.log_density(z)), dens) < 1e-5);
    }
    double prev = 0.0;
    for (double u : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999, 1 - 1e-9}) {
      const double z = k.quantile(u);
      CHECK(z > prev);
      prev = z;
      CHECK(std::abs(k.cdf(z) - u) < 1e-9);
    }
  }
  CHECK_THROWS_AS(kernel_for(0.5)->quantile(0.0), DomainError);
  CHECK_THROWS_AS(kernel_for(0.5)->quantile(1.0), DomainError);
}

TEST_CASE("small beta approaches the r^-2 limit") {
  const Kernel a(1e-4), b(kBetaZero * 0.1);
  for (double z : {0.5, 2.0}) CHECK(rel(a.exponent(z, 1.3 * z, 0.5), b.exponent(z, 1.3 * z, 0.5)) < 1e-3);
}

TEST_CASE("copula margins and 2-increasing") {
  const MaxIdParams p = stationary(0.5, 30.0);
  for (double u : {0.01, 0.3, 0.7, 0.99}) {
    CHECK(std::abs(copula_cdf(u, 1.0, 20.0, 0.0, p) - u) < 1e-6);
    CHECK(std::abs(copula_cdf(1.0, u, 20.0, 0.0, p) - u) < 1e-6);
    // Approaching the boundary through the exponent function itself.
    CHECK(std::abs(copula_cdf(u, 1 - 1e-9, 20.0, 0.0, p) - u) < 1e-6);
  }
  const int n = 20;
  std::vector<double> g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = i == 0 ? 1e-9 : i == n ? 1.0 : static_cast<double>(i) / n;
  Eigen::MatrixXd c(n + 1, n + 1);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) c(i, j) = i == 0 || j == 0 ? 0.0 : copula_cdf(g[i], g[j], 20.0, 0.0, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(c(i + 1, j + 1) - c(i, j + 1) - c(i + 1, j) + c(i, j) >= -1e-12);
}

TEST_CASE("pair density matches the finite-difference copula oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uu(0.05, 0.95), ud(1.0, 80.0), ub(0.2, 1.5);
  for (int i = 0; i < 20; ++i) {
    const double u1 = uu(rng), u2 = uu(rng), d = ud(rng);
    const MaxIdParams p = stationary(ub(rng), 30.0);
    const double h = 1e-4;
    const auto C = [&](double a, double b) { return copula_cdf(a, b, d, 0.0, p); };
    const double fd = (C(u1 + h, u2 + h) - C(u1 + h, u2 - h) - C(u1 - h, u2 + h) + C(u1 - h, u2 - h)) / (4 * h * h);
    INFO("u1=" << u1 << " u2=" << u2 << " d=" << d);
    CHECK(rel(std::exp(pair_loglik(u1, u2, d, 0.0, p)), fd) < 1e-3);
    CHECK(std::abs(pair_loglik(u1, u2, d, 0.0, p) - pair_loglik(u2, u1, d, 0.0, p)) < 1e-10);
  }
  CHECK_THROWS_AS(pair_loglik(0.0, 0.5, 10.0, 0.0, stationary(0.5, 30.0)), DomainError);
}

TEST_CASE("far-apart sites keep residual dependence") {
  // rho -> 0 leaves the shared radial variable, so C(u, u) stays above u^2.
  const MaxIdParams p = stationary(0.5, 10.0);
  const double c = copula_cdf(0.5, 0.5, 1e4, 0.0, p);
  const Kernel& k = *kernel_for(0.5);
  const double z = k.quantile(0.5);
  CHECK(std::abs(c - std::exp(-k.exponent(z, z, 0.0))) < 1e-12);
  CHECK(c > 0.25 + 1e-3);
}

TEST_CASE("model chi") {
  const MaxIdParams p = stationary(0.5, 30.0);
  CHECK(std::abs(model_chi(0.0, 0.0, p, 0.98) - 1.0) < 1e-6);
  double prev = 2.0;
  for (double d : {1.0, 10.0, 30.0, 60.0, 120.0}) {
    const double c = model_chi(d, 0.0, p, 0.98);
    CHECK(c < prev);
    prev = c;
  }
  CHECK(model_chi(30.0, 0.0, stationary(1.5, 30.0), 0.98) < model_chi(30.0, 0.0, stationary(0.2, 30.0), 0.98));
  CHECK(model_chi(30.0, 0.0, stationary(0.5, 60.0), 0.98) > model_chi(30.0, 0.0, p, 0.98));
  // alpha1_beta < 0 and alpha1_lambda > 0: higher covariate gives smaller beta
  // and longer range, both of which raise chi.
  MaxIdParams s = p;
  s.alpha1_beta = -0.5;
  s.alpha1_lambda = 0.3;
  CHECK(model_chi(30.0, 1.0, s, 0.98) > model_chi(30.0, -1.0, s, 0.98));
}

namespace {

UniformPanel panel_from(const sim::SiteLayout& layout, const Eigen::MatrixXd& u) {
  UniformPanel panel;
  panel.site_ids = layout.ids;
  panel.u = u;
  for (Eigen::Index t = 0; t < u.rows(); ++t) {
    panel.months.push_back(static_cast<int>(t % 12) + 1);
    panel.years.push_back(2000 + static_cast<int>(t / 12));
  }
  panel.validate_and_nudge();
  return panel;
}

}  // namespace

TEST_CASE("pairwise likelihood basics") {
  const auto layout = sim::SiteLayout::plane({0.0, 15.0}, {0.0, 0.0});
  const MaxIdParams p = stationary(0.5, 30.0);
  const auto s = sim::sim_maxid(layout, p, {}, 6, 5);
  const UniformPanel panel = panel_from(layout, s.u);
  PairSet pairs = PairSet::all(layout.distances);
  const PairwiseLikelihood pll(panel, pairs, MonthlyCovariate{});
  double direct = 0.0;
  for (Eigen::Index t = 0; t < s.u.rows(); ++t) direct += pair_loglik(panel.u(t, 0), panel.u(t, 1), 15.0, 0.0, p);
  CHECK(std::abs(pll(p) - direct) < 1e-9 * std::abs(direct));

  PairSet doubled = pairs;
  doubled.pairs[0].weight = 2.0;
  CHECK(std::abs(PairwiseLikelihood(panel, doubled, MonthlyCovariate{})(p) - 2 * direct) < 1e-9 * std::abs(direct));

  const auto per = pll.per_time(p);
  CHECK(per.size() == 6);
  double sum = 0.0;
  for (double v : per) sum += v;
  CHECK(std::abs(sum - direct) < 1e-9 * std::abs(direct));

  CHECK_THROWS_AS(PairwiseLikelihood(panel, PairSet{}, MonthlyCovariate{}), DataError);
}

TEST_CASE("missing values are skipped") {
  const auto layout = sim::SiteLayout::plane({0.0, 15.0, 30.0}, {0.0, 0.0, 0.0});
  const MaxIdParams p = stationary(0.5, 30.0);
  auto s = sim::sim_maxid(layout, p, {}, 4, 9);
  s.u(1, 2) = std::numeric_limits<double>::quiet_NaN();
  const PairwiseLikelihood pll(panel_from(layout, s.u), PairSet::all(layout.distances), MonthlyCovariate{});
  CHECK(std::isfinite(pll(p)));
  CHECK(pll.observations() == 4 * 3 - 2);
}

TEST_CASE("truth outscores a perturbed parameter") {
  const MaxIdParams p = stationary(0.5, 30.0);
  MaxIdParams wrong = stationary(0.5, 60.0);
  int wins = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto layout = sim::SiteLayout::random_square(6, 100.0, 1000 + seed);
    const auto s = sim::sim_maxid(layout, p, {}, 60, seed);
    const PairwiseLikelihood pll(panel_from(layout, s.u), PairSet::all(layout.distances), MonthlyCovariate{});
    if (pll(p) > pll(wrong)) ++wins;
  }
  CHECK(wins >= 18);
}

TEST_CASE("working-scale round trip and CLIC") {
  DependenceOptions opts;
  opts.seasonal = true;
  MaxIdParams p = stationary(0.5, 30.0);
  p.alpha1_beta = -0.2;
  p.alpha1_lambda = 0.1;
  const MaxIdParams back = from_working(to_working(p, opts), opts);
  CHECK(std::abs(back.alpha1_beta - p.alpha1_beta) < 1e-15);
  CHECK(std::abs(back.alpha0_lambda - p.alpha0_lambda) < 1e-15);
  CHECK(parameter_names(opts).size() == 4);

  const auto layout = sim::SiteLayout::plane({0.0, 20.0}, {0.0, 0.0});
  const MaxIdParams truth = stationary(0.5, 30.0);
  const auto s = sim::sim_maxid(layout, truth, {}, 2000, 3);
  const PairwiseLikelihood pll(panel_from(layout, s.u), PairSet::all(layout.distances), MonthlyCovariate{});
  DependenceOptions st;
  const MaxIdFit fit = fit_dependence(pll, st);
  CHECK(fit.converged);
  // With a single pair the composite likelihood is a full likelihood, so the
  // information identity J = K holds up to sampling noise.
  CHECK(fit.information.trace > 0.7 * 2);
  CHECK(fit.information.trace < 1.3 * 2);
  CHECK(std::abs(fit.information.clic - (-2 * fit.pll + 2 * fit.information.trace)) < 1e-8);
  const MaxIdFit again = fit_dependence(pll, st);
  CHECK(again.theta == fit.theta);
  CHECK(again.pll == fit.pll);
}

TEST_CASE("large beta matches the oracle") {
  for (double b : {43.024781, 80.0, 141.72195275142133}) {
    const Kernel k(b);
    for (double h : {0.5, 1.0, 10.0, 40.0, 90.0}) CHECK(std::isfinite(k.psi(h)));
    const double z1 = 2.284778, z2 = 1.7038, r = 0.824447;
    const auto e = k.exponent_parts(z1, z2, r);
    CHECK(rel(e.v, oracle::exponent_v(z1, z2, r, b)) < 1e-6);
    CHECK(rel(e.v1, oracle::exponent_v1(z1, z2, r, b)) < 1e-5);
    CHECK(rel(e.v12, oracle::exponent_v12(z1, z2, r, b)) < 1e-4);
    for (double u : {1e-6, 0.01, 0.3, 0.7, 0.99, 1.0 - 1e-9}) {
      const double z = k.quantile(u);
      CHECK(std::abs(k.cdf(z) - u) < 1e-9);
    }
  }
}
