#include "spex/optim/quasi_newton.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace spex::optim {
namespace {

bool converged_grad(const Eigen::VectorXd& g, double f, double tol) {
  return g.lpNorm<Eigen::Infinity>() < tol * (1.0 + std::abs(f));
}

}  // namespace

Result minimize_bfgs(const Objective& fn, Eigen::VectorXd x0, const Options& opts) {
  const Eigen::Index n = x0.size();
  Result r;
  r.x = std::move(x0);
  r.grad.resize(n);
  r.f = fn(r.x, &r.grad);
  r.evaluations = 1;
  if (!std::isfinite(r.f) || !r.grad.allFinite()) {
    r.message = "objective not finite at the starting point";
    throw NonConvergence(r.message, r);
  }
  r.trace.push_back(r.f);

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  Eigen::VectorXd g_new(n);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (converged_grad(r.grad, r.f, opts.grad_tol)) {
      r.converged = true;
      r.message = "gradient tolerance reached";
      return r;
    }
    Eigen::VectorXd dir = -(h_inv * r.grad);
    double slope = r.grad.dot(dir);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      dir = -r.grad;
      slope = r.grad.dot(dir);
    }
    const double dir_norm = dir.lpNorm<Eigen::Infinity>();
    double alpha = dir_norm > opts.max_step ? opts.max_step / dir_norm : 1.0;

    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      x_new = r.x + alpha * dir;
      f_new = fn(x_new, nullptr);
      ++r.evaluations;
      if (std::isfinite(f_new) && f_new <= r.f + opts.armijo * alpha * slope) {
        f_new = fn(x_new, &g_new);
        ++r.evaluations;
        if (std::isfinite(f_new) && g_new.allFinite()) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // A steepest-descent restart gets one more chance before giving up.
      if (!h_inv.isIdentity()) {
        h_inv.setIdentity();
        scaled = false;
        continue;
      }
      r.converged = converged_grad(r.grad, r.f, opts.grad_tol * 10.0);
      r.message = "line search failed";
      if (r.converged) return r;
      throw NonConvergence("line search failed to decrease the objective", r);
    }

    const Eigen::VectorXd s = x_new - r.x;
    const Eigen::VectorXd y = g_new - r.grad;
    const double f_old = r.f;
    r.x = x_new;
    r.f = f_new;
    r.grad = g_new;
    r.iterations = iter + 1;
    r.trace.push_back(r.f);

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h_inv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h_inv * y;
      h_inv += ((sy + y.dot(hy)) * rho * rho) * (s * s.transpose()) -
               rho * (hy * s.transpose() + s * hy.transpose());
    }
    if (opts.f_rel_tol > 0.0 && std::abs(f_old - r.f) <= opts.f_rel_tol * (1.0 + std::abs(r.f))) {
      r.converged = true;
      r.message = "relative function tolerance reached";
      return r;
    }
  }
  if (converged_grad(r.grad, r.f, opts.grad_tol)) {
    r.converged = true;
    r.message = "gradient tolerance reached";
    return r;
  }
  r.message = "iteration limit reached";
  throw NonConvergence("quasi-Newton iteration limit reached", r);
}

Eigen::VectorXd relative_steps(const Eigen::VectorXd& x, double scale) {
  Eigen::VectorXd h(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) h[i] = scale * std::max(1.0, std::abs(x[i]));
  return h;
}

Eigen::VectorXd fd_gradient(const ValueFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step[i];
    const double fp = f(xp);
    xp[i] = x[i] - step[i];
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step[i]);
  }
  return g;
}

Eigen::MatrixXd fd_hessian(const ValueFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h(n, n);
  const double f0 = f(x);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp[i] = x[i] + step[i];
    const double fp = f(xp);
    xp[i] = x[i] - step[i];
    const double fm = f(xp);
    xp[i] = x[i];
    h(i, i) = (fp - 2.0 * f0 + fm) / (step[i] * step[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      auto eval = [&](double si, double sj) {
        xp[i] = x[i] + si * step[i];
        xp[j] = x[j] + sj * step[j];
        const double v = f(xp);
        xp[i] = x[i];
        xp[j] = x[j];
        return v;
      };
      const double v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * step[i] * step[j]);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

Eigen::MatrixXd fd_hessian_from_gradient(const Objective& fn, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd xp = x;
  Eigen::VectorXd gp(n), gm(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xp[i] = x[i] + step[i];
    fn(xp, &gp);
    xp[i] = x[i] - step[i];
    fn(xp, &gm);
    xp[i] = x[i];
    h.col(i) = (gp - gm) / (2.0 * step[i]);
  }
  return 0.5 * (h + h.transpose());
}

Objective with_fd_gradient(ValueFn f, Eigen::VectorXd step) {
  // The line search asks for the value at a point before its gradient; the
  // last value is remembered so it is not recomputed.
  struct Memo {
    Eigen::VectorXd x;
    double value = 0.0;
  };
  auto memo = std::make_shared<Memo>();
  return [f = std::move(f), step = std::move(step), memo](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    double v;
    if (memo->x.size() == x.size() && memo->x == x) {
      v = memo->value;
    } else {
      v = f(x);
      memo->x = x;
      memo->value = v;
    }
    if (grad != nullptr) {
      if (std::isfinite(v)) *grad = fd_gradient(f, x, step);
      else grad->setConstant(x.size(), std::numeric_limits<double>::quiet_NaN());
    }
    return v;
  };
}

}  // namespace spex::optim
