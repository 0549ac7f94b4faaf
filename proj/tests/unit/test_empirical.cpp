#include <doctest.h>

#include <cmath>
#include <random>

#include "spex/common/error.hpp"
#include "spex/empirical/chi.hpp"
#include "spex/empirical/uniformity.hpp"

using namespace spex;
using namespace spex::empirical;

TEST_CASE("ecdf ranks with ties") {
  const auto u = ecdf({3.0, 1.0, 2.0, 2.0});
  CHECK(u[0] == doctest::Approx(4.0 / 5));
  CHECK(u[1] == doctest::Approx(1.0 / 5));
  CHECK(u[2] == doctest::Approx(2.5 / 5));
  CHECK(u[3] == doctest::Approx(2.5 / 5));
}

TEST_CASE("chi of identical and independent series") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<double> a(100'000), b(100'000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = nd(rng);
    b[i] = nd(rng);
  }
  CHECK(*chi_q(a, a, 0.98) == doctest::Approx(1.0));
  for (double q : {0.9, 0.98}) CHECK(std::abs(*chi_q(a, b, q) - (1 - q)) < 0.01);
}

TEST_CASE("chi drops missing pairs and needs 20 of them") {
  std::vector<double> a(30), b(30);
  for (int i = 0; i < 30; ++i) a[i] = b[i] = i;
  a[3] = std::nan("");
  CHECK(chi_q(a, b, 0.9).has_value());
  std::vector<double> s(a.begin(), a.begin() + 19), t(b.begin(), b.begin() + 19);
  CHECK_THROWS_AS(chi_q(s, t, 0.9), DataError);
}

TEST_CASE("binned chi uses equal-count bins") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  const int sites = 12, times = 200;
  Eigen::MatrixXd data(times, sites), dist(sites, sites);
  for (int t = 0; t < times; ++t) {
    const double common = nd(rng);
    for (int s = 0; s < sites; ++s) data(t, s) = common + nd(rng);
  }
  for (int i = 0; i < sites; ++i)
    for (int j = 0; j < sites; ++j) dist(i, j) = std::abs(i - j) * 5.0;
  const ChiCurve curve = binned_chi(data, dist, 0.9, 6);
  REQUIRE(curve.bins.size() == 6);
  std::size_t total = 0;
  for (const auto& b : curve.bins) {
    total += b.n_pairs;
    CHECK(b.n_pairs == 11);
    CHECK(b.lower <= b.mean);
    CHECK(b.mean <= b.upper);
    CHECK(b.d_min <= b.distance);
    CHECK(b.distance <= b.d_max);
  }
  CHECK(total == sites * (sites - 1) / 2);
  for (std::size_t i = 1; i < curve.bins.size(); ++i) CHECK(curve.bins[i].d_min >= curve.bins[i - 1].d_max);

  std::vector<int> months(times);
  for (int t = 0; t < times; ++t) months[t] = t % 12 + 1;
  const ChiCurve jja = binned_chi(data, dist, 0.9, 6, months, {6, 7, 8}, "JJA");
  CHECK(jja.season == "JJA");
}

TEST_CASE("sample quantile type 7") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(sample_quantile(v, 0.0) == 1.0);
  CHECK(sample_quantile(v, 1.0) == 5.0);
  CHECK(sample_quantile(v, 0.3) == doctest::Approx(2.2));
}

TEST_CASE("Kolmogorov-Smirnov against uniform") {
  CHECK(kolmogorov_q(0.0) == doctest::Approx(1.0));
  CHECK(kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  const KsResult exact = ks_uniform({0.5});
  CHECK(exact.statistic == doctest::Approx(0.5));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uu;
  std::vector<double> u(5000), skew(5000);
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = uu(rng);
    skew[i] = u[i] * u[i];
  }
  CHECK(ks_uniform(u).p_value > 0.01);
  CHECK(ks_uniform(skew).p_value < 1e-6);
}
