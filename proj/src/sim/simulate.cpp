#include "spex/sim/simulate.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "spex/common/error.hpp"
#include "spex/common/parallel.hpp"

namespace spex::sim {
namespace {

// Factor F with F F^T = corr. Pivoted LDL^T copes with exactly repeated
// sites (distance zero), where the correlation is only semi-definite.
Eigen::MatrixXd correlation_factor(const SiteLayout& layout, double lambda, double nu) {
  const Eigen::Index n = static_cast<Eigen::Index>(layout.size());
  Eigen::MatrixXd corr(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) corr(i, j) = maxid::rho(layout.distances(i, j), lambda, nu);
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(corr);
  if (ldlt.info() != Eigen::Success) throw NumericError("correlation factorization failed");
  Eigen::VectorXd d = ldlt.vectorD();
  if (d.minCoeff() < -1e-10) {
    corr.diagonal().array() += 1e-10;
    ldlt.compute(corr);
    d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || d.minCoeff() < -1e-10) {
      throw NumericError("correlation matrix is not positive definite after jitter");
    }
  }
  const Eigen::MatrixXd l = ldlt.matrixL();
  Eigen::MatrixXd f = l * d.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return ldlt.transpositionsP().transpose() * f;
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Eigen::MatrixXd sim_gauss(const SiteLayout& layout, double lambda, double nu, std::size_t n, std::uint64_t seed) {
  const Eigen::MatrixXd f = correlation_factor(layout, lambda, nu);
  const Eigen::Index p = f.rows();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), p);
  parallel_for(n, [&](std::size_t r) {
    auto rng = stream(seed, r);
    std::normal_distribution<double> normal;
    Eigen::VectorXd e(p);
    for (Eigen::Index i = 0; i < p; ++i) e[i] = normal(rng);
    out.row(static_cast<Eigen::Index>(r)) = (f * e).transpose();
  });
  return out;
}

MaxIdSample sim_maxid(const SiteLayout& layout, const maxid::MaxIdParams& params, const std::vector<double>& covariate,
                      std::size_t n, std::uint64_t seed, const MaxIdSimOptions& opts) {
  params.validate();
  if (!covariate.empty() && covariate.size() != n) throw DataError("sim_maxid: one covariate value per replicate is required");
  if (!(opts.eps > 0.0 && opts.eps < 1.0)) throw ConfigError("sim_maxid: eps must lie in (0, 1)");
  const Eigen::Index p = static_cast<Eigen::Index>(layout.size());
  if (p == 0) throw DataError("sim_maxid: empty layout");
  const double w_hi = boost::math::quantile(boost::math::complement(boost::math::normal(), opts.eps * 1e-3));

  // Factors and kernels per distinct covariate value.
  struct Setting {
    Eigen::MatrixXd factor;
    std::shared_ptr<const maxid::Kernel> kernel;
  };
  std::map<double, Setting> settings;
  for (std::size_t r = 0; r < n; ++r) {
    const double t = covariate.empty() ? 0.0 : covariate[r];
    if (settings.count(t)) continue;
    settings[t] = {correlation_factor(layout, params.lambda(t), params.nu),
                   maxid::kernel_for(params.beta(t), opts.angular_nodes)};
  }

  MaxIdSample out;
  out.z.resize(static_cast<Eigen::Index>(n), p);
  out.u.resize(static_cast<Eigen::Index>(n), p);
  parallel_for(n, [&](std::size_t r) {
    const double t = covariate.empty() ? 0.0 : covariate[r];
    const Setting& s = settings.at(t);
    const double beta = params.beta(t);
    auto rng = stream(seed, r);
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> expo(1.0);
    Eigen::VectorXd best = Eigen::VectorXd::Zero(p), e(p), w(p);
    double gamma = 0.0;
    std::size_t points = 0;
    for (;;) {
      gamma += expo(rng);
      const double radius = maxid::kappa_bar_inverse(gamma, beta);
      if (radius * w_hi < best.minCoeff()) break;
      if (++points > opts.max_points) throw NumericError("sim_maxid: point limit reached before the stopping rule held");
      for (Eigen::Index i = 0; i < p; ++i) e[i] = normal(rng);
      w.noalias() = s.factor * e;
      for (Eigen::Index i = 0; i < p; ++i) best[i] = std::max(best[i], radius * std::max(w[i], 0.0));
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      const double z = best[i];
      out.z(static_cast<Eigen::Index>(r), i) = z;
      out.u(static_cast<Eigen::Index>(r), i) = z > 0.0 ? s.kernel->cdf(z) : 0.0;
    }
  });
  return out;
}

}  // namespace spex::sim
