#include <doctest.h>

#include <cmath>

#include "spex/empirical/uniformity.hpp"
#include "spex/maxid/kernel.hpp"
#include "spex/sim/simulate.hpp"

using namespace spex;

namespace {

maxid::MaxIdParams params(double beta, double lambda) {
  maxid::MaxIdParams p;
  p.alpha0_beta = std::log(beta);
  p.alpha0_lambda = std::log(lambda);
  return p;
}

}  // namespace

TEST_CASE("layouts") {
  const auto sq = sim::SiteLayout::random_square(10, 50.0, 3);
  CHECK(sq.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(sq.x[i] >= 0.0);
    CHECK(sq.x[i] <= 50.0);
    CHECK(sq.distances(i, i) == 0.0);
  }
  const auto pl = sim::SiteLayout::plane({0.0, 3.0}, {0.0, 4.0});
  CHECK(pl.distances(0, 1) == doctest::Approx(5.0));
  CHECK(pl.distances(1, 0) == pl.distances(0, 1));
}

TEST_CASE("gaussian field correlation") {
  const auto layout = sim::SiteLayout::plane({0.0, 20.0}, {0.0, 0.0});
  const Eigen::MatrixXd g = sim::sim_gauss(layout, 20.0, 1.0, 20000, 1);
  const double m0 = g.col(0).mean(), m1 = g.col(1).mean();
  const double v0 = (g.col(0).array() - m0).square().mean(), v1 = (g.col(1).array() - m1).square().mean();
  const double c = ((g.col(0).array() - m0) * (g.col(1).array() - m1)).mean() / std::sqrt(v0 * v1);
  CHECK(std::abs(m0) < 0.03);
  CHECK(std::abs(v0 - 1.0) < 0.05);
  CHECK(std::abs(c - std::exp(-1.0)) < 0.03);
}

TEST_CASE("max-id margins are uniform and deterministic") {
  const auto layout = sim::SiteLayout::random_square(4, 60.0, 8);
  const auto p = params(0.5, 30.0);
  const auto a = sim::sim_maxid(layout, p, {}, 3000, 42);
  const auto b = sim::sim_maxid(layout, p, {}, 3000, 42);
  CHECK(a.z == b.z);
  CHECK(a.u == b.u);
  const auto c = sim::sim_maxid(layout, p, {}, 3000, 43);
  CHECK(a.u != c.u);
  for (Eigen::Index s = 0; s < a.u.cols(); ++s) {
    std::vector<double> u(a.u.col(s).data(), a.u.col(s).data() + a.u.rows());
    CHECK(empirical::ks_uniform(u).p_value > 0.001);
  }
  const auto& k = *maxid::kernel_for(0.5);
  for (Eigen::Index r = 0; r < 5; ++r) CHECK(a.u(r, 0) == doctest::Approx(k.cdf(a.z(r, 0))).epsilon(1e-12));
}

TEST_CASE("replicates do not depend on how many are drawn") {
  const auto layout = sim::SiteLayout::random_square(3, 60.0, 8);
  const auto p = params(0.8, 20.0);
  const auto small = sim::sim_maxid(layout, p, {}, 10, 5);
  const auto large = sim::sim_maxid(layout, p, {}, 40, 5);
  CHECK(small.u == large.u.topRows(10));
}

TEST_CASE("simulated joint exceedance matches the copula") {
  const auto layout = sim::SiteLayout::plane({0.0, 30.0}, {0.0, 0.0});
  const auto p = params(0.5, 30.0);
  const std::size_t n = 20000;
  const auto s = sim::sim_maxid(layout, p, {}, n, 11);
  const double u = 0.7;
  double both = 0.0;
  for (std::size_t r = 0; r < n; ++r) both += (s.u(r, 0) <= u && s.u(r, 1) <= u) ? 1.0 : 0.0;
  both /= n;
  const double c = maxid::copula_cdf(u, u, 30.0, 0.0, p);
  CHECK(std::abs(both - c) < 4.0 * std::sqrt(c * (1 - c) / n));
}
