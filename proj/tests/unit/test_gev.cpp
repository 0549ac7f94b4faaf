#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "spex/common/error.hpp"
#include "spex/evd/gev.hpp"
#include "spex/gam/fit.hpp"

using namespace spex;
using evd::GevParams;

TEST_CASE("gev cdf closed forms") {
  CHECK(evd::gev_cdf(0.0, {0, 1, 0}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(evd::gev_cdf(2.0, {0, 1, -0.5}) == 1.0);
  CHECK(evd::gev_cdf(2.0, {0, 1, 0.5}) == doctest::Approx(std::exp(-0.25)).epsilon(1e-15));
  CHECK(evd::gev_cdf(-3.0, {0, 1, 0.5}) == 0.0);
}

TEST_CASE("gev cdf is continuous in xi at zero") {
  for (double x = -3.0; x <= 8.0; x += 0.25) {
    const double g = std::exp(-std::exp(-x));
    CHECK(std::abs(evd::gev_cdf(x, {0, 1, 1e-8}) - g) < 1e-6);
    CHECK(std::abs(evd::gev_cdf(x, {0, 1, -1e-8}) - g) < 1e-6);
  }
}

TEST_CASE("gev cdf matches the textbook formula and is monotone") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> xi(-0.45, 0.45), mu(-5, 5), ls(-1, 2), x(-10, 30);
  for (int i = 0; i < 200; ++i) {
    const GevParams p{mu(rng), std::exp(ls(rng)), xi(rng)};
    double prev = 0.0;
    for (double t = p.mu - 8 * p.sigma; t < p.mu + 30 * p.sigma; t += p.sigma / 4) {
      const double c = evd::gev_cdf(t, p);
      CHECK(c == doctest::Approx(oracle::gev_cdf(t, p.mu, p.sigma, p.xi)).epsilon(1e-12));
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("gev quantile") {
  CHECK(std::abs(evd::gev_quantile(std::exp(-1.0), {0, 1, 0})) < 1e-14);
  CHECK(evd::gev_quantile(0.99, {0, 1, 0}) == doctest::Approx(-std::log(-std::log(0.99))).epsilon(1e-14));
  CHECK_THROWS_AS(evd::gev_quantile(0.0, {0, 1, 0}), DomainError);
  CHECK_THROWS_AS(evd::gev_quantile(1.0, {0, 1, 0}), DomainError);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.001, 0.999), xi(-0.45, 0.45), mu(-5, 5), ls(-1, 2);
  for (int i = 0; i < 2000; ++i) {
    const GevParams p{mu(rng), std::exp(ls(rng)), xi(rng)};
    const double uu = u(rng);
    CHECK(std::abs(evd::gev_cdf(evd::gev_quantile(uu, p), p) - uu) <= 1e-10 * uu);
  }
  CHECK(evd::pit(evd::gev_quantile(0.5, {2, 3, 0.2}), {2, 3, 0.2}) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("gev logpdf") {
  CHECK(evd::gev_logpdf(0.0, {0, 1, 0}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::isinf(evd::gev_logpdf(-3.0, {0, 1, 0.5})));
  CHECK(evd::gev_logpdf(-3.0, {0, 1, 0.5}) < 0);
  for (double xi : {-0.4, -0.1, 0.0, 0.1, 0.4}) {
    const GevParams p{1.0, 2.0, xi};
    for (double x = -2.0; x < 12.0; x += 0.37) {
      const double ref = oracle::gev_logpdf(x, p.mu, p.sigma, p.xi);
      if (std::isfinite(ref)) CHECK(evd::gev_logpdf(x, p) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("gev density integrates to one") {
  for (double xi : {-0.4, -0.2, 0.0, 0.2, 0.4}) {
    const GevParams p{0.5, 1.5, xi};
    const double lo = xi > 0 ? p.mu - p.sigma / xi : -std::numeric_limits<double>::infinity();
    const double hi = xi < 0 ? p.mu - p.sigma / xi : std::numeric_limits<double>::infinity();
    const double mass = oracle::integrate_ts([&](double x) { return std::exp(evd::gev_logpdf(x, p)); }, lo, hi, 1e-13);
    CHECK(std::abs(mass - 1.0) < 1e-6);
  }
}

TEST_CASE("gev nll gradient matches finite differences") {
  std::mt19937_64 rng(5);
  for (double xi : {-0.3, 0.0, 0.25}) {
    std::vector<double> data;
    for (int i = 0; i < 100; ++i) data.push_back(oracle::gev_draw(rng, 0.0, 1.0, 0.0));
    const GevParams p{0.1, 1.1, xi};
    bool any_off = false;
    for (double x : data) any_off |= !std::isfinite(oracle::gev_logpdf(x, p.mu, p.sigma, p.xi));
    if (any_off) continue;
    const auto r = evd::gev_nll_grad(p, data);
    REQUIRE(r.valid);
    CHECK(r.nll == doctest::Approx(oracle::gev_nll(data, p.mu, p.sigma, p.xi)).epsilon(1e-12));
    const double h = 1e-6;
    const double g_mu = (oracle::gev_nll(data, p.mu + h, p.sigma, p.xi) - oracle::gev_nll(data, p.mu - h, p.sigma, p.xi)) / (2 * h);
    const double g_s = (oracle::gev_nll(data, p.mu, p.sigma + h, p.xi) - oracle::gev_nll(data, p.mu, p.sigma - h, p.xi)) / (2 * h);
    const double g_x = (oracle::gev_nll(data, p.mu, p.sigma, p.xi + h) - oracle::gev_nll(data, p.mu, p.sigma, p.xi - h)) / (2 * h);
    CHECK(r.grad[0] == doctest::Approx(g_mu).epsilon(1e-4));
    CHECK(r.grad[1] == doctest::Approx(g_s).epsilon(1e-4));
    CHECK(r.grad[2] == doctest::Approx(g_x).epsilon(1e-4));
  }
}

TEST_CASE("gev nll special values") {
  const std::vector<double> mode{0.0};
  CHECK(evd::gev_nll_grad({0, 1, 0}, mode).nll == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> below{-3.0, 1.0};
  const auto r = evd::gev_nll_grad({0, 1, 0.5}, below);
  CHECK_FALSE(r.valid);
  CHECK(std::isinf(r.nll));
  CHECK(r.nll > 0);
}

TEST_CASE("return levels") {
  CHECK(evd::return_level({100, 12}, {0, 1, 0}) == doctest::Approx(-std::log(-std::log(0.99))).epsilon(1e-14));
  CHECK(evd::return_level({2, 12}, {0, 1, 0.1}) < evd::return_level({100, 12}, {0, 1, 0.1}));
  CHECK(evd::relative_change(10.0, 12.0) == doctest::Approx(20.0));
}

TEST_CASE("intercept-only fit recovers GEV parameters within 3 standard errors") {
  // 200 seeds x 3 shapes of 5000 draws; the shape uses the delta method on the tanh link.
  int total = 0, covered_mu = 0, covered_sigma = 0, covered_xi = 0;
  for (double xi : {-0.2, 0.0, 0.2}) {
    for (int seed = 1; seed <= 200; ++seed) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(seed) * 7919 + static_cast<std::uint64_t>((xi + 1) * 100));
      gam::MaximaTable t;
      for (int i = 0; i < 5000; ++i) t.add_row("S", i % 12 + 1, 1000 + i / 12, oracle::gev_draw(rng, 10.0, 3.0, xi) + 20.0);
      const auto fit = gam::fit_marginal(gam::ModelFormula::intercept_only(), t);
      const double mu = fit.coef[0], lsig = fit.coef[1], eta = fit.coef[2];
      const double xi_hat = 0.5 * std::tanh(eta);
      const double xi_se = 0.5 * (1 - std::tanh(eta) * std::tanh(eta)) * fit.se[2];
      ++total;
      covered_mu += std::abs(mu - 30.0) <= 3 * fit.se[0];
      covered_sigma += std::abs(lsig - std::log(3.0)) <= 3 * fit.se[1];
      covered_xi += std::abs(xi_hat - xi) <= 3 * xi_se;
    }
  }
  CHECK(covered_mu >= 0.95 * total);
  CHECK(covered_sigma >= 0.95 * total);
  CHECK(covered_xi >= 0.95 * total);
}
