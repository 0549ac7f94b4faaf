#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "spex/common/parallel.hpp"
#include "spex/optim/quasi_newton.hpp"

using namespace spex;
using namespace spex::optim;

namespace {

double rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd* g) {
  const double a = 1 - x(0), b = x(1) - x(0) * x(0);
  if (g) {
    g->resize(2);
    (*g)(0) = -2 * a - 400 * x(0) * b;
    (*g)(1) = 200 * b;
  }
  return a * a + 100 * b * b;
}

}  // namespace

TEST_CASE("BFGS minimizes the Rosenbrock function") {
  Options o;
  o.grad_tol = 1e-10;
  o.max_iterations = 1000;
  const Result r = minimize_bfgs(rosenbrock, Eigen::Vector2d(-1.2, 1.0), o);
  CHECK(r.converged);
  CHECK(std::abs(r.x(0) - 1.0) < 1e-6);
  CHECK(std::abs(r.x(1) - 1.0) < 1e-6);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
}

TEST_CASE("iteration limit reports the best point") {
  Options o;
  o.max_iterations = 3;
  try {
    minimize_bfgs(rosenbrock, Eigen::Vector2d(-1.2, 1.0), o);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence& e) {
    CHECK(e.best().f < rosenbrock(Eigen::Vector2d(-1.2, 1.0), nullptr));
  }
}

TEST_CASE("finite-difference derivatives") {
  const ValueFn f = [](const Eigen::VectorXd& x) { return std::sin(x(0)) * std::exp(x(1)) + x(0) * x(0) * x(1); };
  const Eigen::Vector2d x(0.3, -0.4), h(1e-5, 1e-5);
  const Eigen::VectorXd g = fd_gradient(f, x, h);
  CHECK(g(0) == doctest::Approx(std::cos(0.3) * std::exp(-0.4) + 2 * 0.3 * -0.4).epsilon(1e-8));
  CHECK(g(1) == doctest::Approx(std::sin(0.3) * std::exp(-0.4) + 0.09).epsilon(1e-8));
  const Eigen::MatrixXd H = fd_hessian(f, x, Eigen::Vector2d(1e-3, 1e-3));
  CHECK(H(0, 1) == doctest::Approx(std::cos(0.3) * std::exp(-0.4) + 0.6).epsilon(1e-5));
  CHECK(H(0, 1) == H(1, 0));
  CHECK(H(1, 1) == doctest::Approx(std::sin(0.3) * std::exp(-0.4)).epsilon(1e-5));
}

TEST_CASE("parallel loops fill every slot and rethrow") {
  for (std::size_t workers : {1u, 2u, 7u}) {
    std::vector<double> v(100, 0.0);
    parallel_for(v.size(), [&](std::size_t i) { v[i] = i * 0.5; }, workers);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == i * 0.5);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }, workers),
                    std::runtime_error);
  }
}
