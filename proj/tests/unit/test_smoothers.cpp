#include <doctest.h>

#include <random>

#include "../oracles.hpp"
#include "spex/common/error.hpp"
#include "spex/smooth/loess.hpp"
#include "spex/smooth/spline.hpp"

using namespace spex;
using smooth::SplineBasis;

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

double value(const SplineBasis& b, const Eigen::VectorXd& c, double x) {
  const std::vector<double> xs{x};
  return (b.eval(xs) * c)(0);
}

int null_dimension(const Eigen::MatrixXd& P) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  const double top = es.eigenvalues().maxCoeff();
  int n = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) n += std::abs(es.eigenvalues()[i]) < 1e-9 * top;
  return n;
}

}  // namespace

TEST_CASE("cyclic month basis is periodic") {
  const auto b = SplineBasis::cyclic(linspace(1, 12, 12), 12.0);
  CHECK(b.size() == 12);
  for (double m = 1; m <= 12; m += 0.5) {
    const std::vector<double> a{m}, c{m + 12.0};
    const Eigen::MatrixXd ra = b.eval(a), rc = b.eval(c);
    CHECK((ra - rc).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK(null_dimension(b.penalty()) == 1);
}

TEST_CASE("cubic basis reproduces a straight line") {
  const auto knots = linspace(-2, 7, 10);
  const auto b = SplineBasis::cubic(knots);
  Eigen::VectorXd c(b.size());
  for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = 1.5 - 0.75 * knots[static_cast<std::size_t>(j)];
  for (double x = -4; x <= 9; x += 0.1) CHECK(std::abs(value(b, c, x) - (1.5 - 0.75 * x)) < 1e-10);
  // The penalty does not see a line.
  CHECK(std::abs(c.dot(b.penalty() * c)) < 1e-10);
  CHECK(null_dimension(b.penalty()) == 2);
}

TEST_CASE("second derivatives match finite differences and are continuous at knots") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  const auto knots = std::vector<double>{0.0, 0.7, 1.5, 2.0, 3.1, 4.4, 5.0};
  for (const auto& b : {SplineBasis::cubic(knots), SplineBasis::cyclic(knots, 6.0)}) {
    Eigen::VectorXd c(b.size());
    for (auto& v : c) v = nd(rng);
    for (double x : {0.33, 1.1, 2.6, 3.9, 4.7}) {
      const double h = 1e-4;
      const double fd = (value(b, c, x + h) - 2 * value(b, c, x) + value(b, c, x - h)) / (h * h);
      CHECK(b.second_derivative_row(x).dot(c) == doctest::Approx(fd).epsilon(1e-5));
    }
    for (std::size_t i = 1; i + 1 < knots.size(); ++i) {
      const double d = 1e-9;
      CHECK(std::abs(b.second_derivative_row(knots[i] - d).dot(c) - b.second_derivative_row(knots[i] + d).dot(c)) < 1e-6);
    }
  }
}

TEST_CASE("penalty equals the integrated squared second derivative") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  const auto knots = std::vector<double>{0.0, 0.5, 1.7, 2.2, 3.0, 4.6, 5.1, 6.0};
  for (const auto& b : {SplineBasis::cubic(knots), SplineBasis::cyclic(knots, 7.0)}) {
    const Eigen::MatrixXd P = b.penalty();
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXd c(b.size());
      for (auto& v : c) v = nd(rng);
      std::vector<double> cuts = knots;
      if (b.kind() == smooth::SplineKind::cyclic_cubic) cuts.push_back(knots.front() + 7.0);
      double integral = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        integral += oracle::integrate([&](double x) { const double s = b.second_derivative_row(x).dot(c); return s * s; },
                                      cuts[i], cuts[i + 1]);
      }
      CHECK(c.dot(P * c) == doctest::Approx(integral).epsilon(1e-8));
    }
  }
}

TEST_CASE("tensor basis is the row-wise Kronecker product") {
  const auto a = SplineBasis::cubic(linspace(0, 1, 5));
  const auto c = SplineBasis::cubic(linspace(10, 20, 4));
  const auto t = SplineBasis::tensor(a, c);
  CHECK(t.size() == 20);
  const std::vector<double> x1{0.13, 0.77}, x2{11.0, 19.5};
  const Eigen::MatrixXd rows = t.eval(x1, x2);
  const Eigen::MatrixXd ra = a.eval(x1), rc = c.eval(x2);
  for (int r = 0; r < 2; ++r) {
    for (Eigen::Index i = 0; i < ra.cols(); ++i) {
      for (Eigen::Index j = 0; j < rc.cols(); ++j) CHECK(rows(r, i * rc.cols() + j) == doctest::Approx(ra(r, i) * rc(r, j)));
    }
  }
  const Eigen::MatrixXd P = t.penalty();
  CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spline configuration errors") {
  CHECK_THROWS_AS(SplineBasis::cubic({}), ConfigError);
  CHECK_THROWS_AS(SplineBasis::cubic({0.0, 1.0, 1.0, 2.0}), ConfigError);
}

namespace {

// Direct weighted least squares at one target point.
double wls_oracle(const std::vector<double>& x, const std::vector<double>& y, double x0, double span, int degree) {
  const std::size_t n = x.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = std::abs(x[i] - x0);
  std::vector<double> sorted = d;
  std::sort(sorted.begin(), sorted.end());
  const auto q = static_cast<std::size_t>(std::floor(span * n));
  const double h = sorted[q - 1];
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), degree + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double u = d[i] / h;
    const double w = u < 1 ? std::pow(1 - u * u * u, 3) : 0.0;
    const double sw = std::sqrt(w);
    for (int k = 0; k <= degree; ++k) A(static_cast<Eigen::Index>(i), k) = sw * std::pow(x[i] - x0, k);
    b[static_cast<Eigen::Index>(i)] = sw * y[i];
  }
  return A.colPivHouseholderQr().solve(b)(0);
}

}  // namespace

TEST_CASE("loess reproduces quadratics and constants") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 10);
  std::vector<double> x, yq, yc;
  for (int i = 0; i < 80; ++i) {
    x.push_back(u(rng));
    yq.push_back(1.0 - 0.3 * x.back() + 0.07 * x.back() * x.back());
    yc.push_back(4.2);
  }
  const auto fq = smooth::loess(x, yq);
  const auto fc = smooth::loess(x, yc);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(fq[i] - yq[i]) < 1e-8);
    CHECK(std::abs(fc[i] - 4.2) < 1e-10);
  }
}

TEST_CASE("loess matches a direct weighted least squares fit") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 6.28);
  std::normal_distribution<double> e(0, 0.3);
  std::vector<double> x, y;
  for (int i = 0; i < 120; ++i) {
    x.push_back(u(rng));
    y.push_back(std::sin(x.back()) + e(rng));
  }
  const std::vector<double> targets{0.1, 1.3, 3.0, 4.4, 6.2};
  for (int degree : {1, 2}) {
    const auto f = smooth::loess(x, y, targets, {0.75, degree});
    for (std::size_t i = 0; i < targets.size(); ++i) CHECK(std::abs(f[i] - wls_oracle(x, y, targets[i], 0.75, degree)) < 1e-8);
  }
}

TEST_CASE("loess is linear in y") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> x, y1, y2, mix;
  for (int i = 0; i < 60; ++i) {
    x.push_back(u(rng));
    y1.push_back(u(rng));
    y2.push_back(u(rng));
    mix.push_back(2.0 * y1.back() - 3.0 * y2.back());
  }
  const auto f1 = smooth::loess(x, y1), f2 = smooth::loess(x, y2), fm = smooth::loess(x, mix);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(fm[i] - (2.0 * f1[i] - 3.0 * f2[i])) < 1e-10);
}

TEST_CASE("loess rejects degenerate input") {
  const std::vector<double> x(10, 1.0), y(10, 2.0);
  CHECK_THROWS_AS(smooth::loess(x, y), ConfigError);
}
