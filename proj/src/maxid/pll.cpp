#include "spex/maxid/pll.hpp"

#include <cmath>
#include <limits>

#include "spex/common/error.hpp"
#include "spex/common/log.hpp"
#include "spex/common/parallel.hpp"

namespace spex::maxid {
namespace {

constexpr double kDensityFloor = 1e-300;
constexpr double kNudge = 1e-12;
std::atomic<std::size_t> floor_hits{0};

double log_copula_density(const ExponentParts& e, double log_g1, double log_g2) {
  double inner = e.v1 * e.v2 - e.v12;
  if (!(inner > kDensityFloor)) {
    if (floor_hits.fetch_add(1) == 0) log::warn("pair density floored at 1e-300");
    inner = kDensityFloor;
  }
  return -e.v + std::log(inner) - log_g1 - log_g2;
}

}  // namespace

double MaxIdParams::beta(double t) const { return std::exp(alpha0_beta + alpha1_beta * t); }
double MaxIdParams::lambda(double t) const { return std::exp(alpha0_lambda + alpha1_lambda * t); }

void MaxIdParams::validate() const {
  for (double a : {alpha0_beta, alpha1_beta, alpha0_lambda, alpha1_lambda}) {
    if (!std::isfinite(a)) throw DomainError("max-id parameters must be finite");
  }
  if (!(nu > 0.0 && nu <= 2.0)) throw DomainError("nu must lie in (0, 2]");
}

void UniformPanel::validate_and_nudge() {
  if (months.size() != times() || years.size() != times()) throw DataError("panel month/year columns do not match rows");
  if (site_ids.size() != sites()) throw DataError("panel site ids do not match columns");
  for (int m : months) {
    if (m < 1 || m > 12) throw DataError("panel month outside 1..12");
  }
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      double& x = u(i, j);
      if (std::isnan(x)) continue;
      if (x < 0.0 || x > 1.0) throw DataError("uniform value outside [0, 1]");
      x = std::clamp(x, kNudge, 1.0 - kNudge);
    }
  }
}

std::size_t density_floor_count() { return floor_hits.load(); }

double pair_loglik(double u1, double u2, double distance, double t, const MaxIdParams& p, int angular_nodes) {
  if (!(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0)) throw DomainError("pair_loglik: u must lie in (0, 1)");
  p.validate();
  const auto kernel = kernel_for(p.beta(t), angular_nodes);
  const double r = rho(distance, p.lambda(t), p.nu);
  const double z1 = kernel->quantile(u1), z2 = kernel->quantile(u2);
  return log_copula_density(kernel->exponent_parts(z1, z2, r), kernel->log_density(z1), kernel->log_density(z2));
}

double copula_cdf(double u1, double u2, double distance, double t, const MaxIdParams& p, int angular_nodes) {
  if (!(u1 > 0.0 && u1 <= 1.0 && u2 > 0.0 && u2 <= 1.0)) throw DomainError("copula_cdf: u must lie in (0, 1]");
  p.validate();
  if (u1 == 1.0) return u2;
  if (u2 == 1.0) return u1;
  const auto kernel = kernel_for(p.beta(t), angular_nodes);
  const double r = rho(distance, p.lambda(t), p.nu);
  return std::exp(-kernel->exponent(kernel->quantile(u1), kernel->quantile(u2), r));
}

PairwiseLikelihood::PairwiseLikelihood(UniformPanel panel, PairSet pairs, MonthlyCovariate covariate,
                                       int angular_nodes)
    : panel_(std::move(panel)), pairs_(std::move(pairs)), nodes_(angular_nodes) {
  if (pairs_.empty()) throw DataError("pairwise likelihood needs at least one pair");
  panel_.validate_and_nudge();
  const int n_sites = static_cast<int>(panel_.sites());
  for (const auto& pr : pairs_.pairs) {
    if (pr.j < 0 || pr.k < 0 || pr.j >= n_sites || pr.k >= n_sites || pr.j == pr.k) {
      throw DataError("pair refers to an unknown site");
    }
  }
  t_.resize(panel_.times());
  for (std::size_t i = 0; i < panel_.times(); ++i) t_[i] = covariate[panel_.months[i] - 1];
  for (const auto& pr : pairs_.pairs) {
    if (pr.weight == 0.0) continue;
    for (std::size_t i = 0; i < panel_.times(); ++i) {
      if (!std::isnan(panel_.u(i, pr.j)) && !std::isnan(panel_.u(i, pr.k))) ++observations_;
    }
  }
  if (observations_ == 0) throw DataError("no pair has a complete replicate");
}

std::shared_ptr<const PairwiseLikelihood::Margins> PairwiseLikelihood::margins(
    double beta, const std::vector<std::size_t>& times) const {
  std::shared_ptr<const Margins> have;
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(beta); it != cache_.end()) have = it->second;
  }
  std::vector<std::size_t> todo;
  for (std::size_t t : times) {
    if (!have || !have->done[t]) todo.push_back(t);
  }
  if (todo.empty()) return have;
  auto next = std::make_shared<Margins>();
  if (have) {
    *next = *have;
  } else {
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    next->z = Eigen::MatrixXd::Constant(panel_.times(), panel_.sites(), nan);
    next->log_g = Eigen::MatrixXd::Constant(panel_.times(), panel_.sites(), nan);
    next->done.assign(panel_.times(), 0);
  }
  const auto kernel = kernel_for(beta, nodes_);
  const std::size_t n_sites = panel_.sites();
  parallel_for(todo.size() * n_sites, [&](std::size_t idx) {
    const std::size_t t = todo[idx / n_sites], s = idx % n_sites;
    const double u = panel_.u(t, s);
    if (std::isnan(u)) return;
    const double z = kernel->quantile(u);
    next->z(t, s) = z;
    next->log_g(t, s) = kernel->log_density(z);
  });
  for (std::size_t t : todo) next->done[t] = 1;
  std::lock_guard lock(cache_mutex_);
  if (cache_.size() > 64) cache_.clear();
  cache_[beta] = next;
  return next;
}

std::vector<double> PairwiseLikelihood::contributions(const MaxIdParams& p) const {
  p.validate();
  const std::size_t n_times = panel_.times();
  // Group times by beta so each kernel and margin transform is built once.
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < n_times; ++t) groups[p.beta(t_[t])].push_back(t);

  std::vector<double> per_time(n_times, 0.0);
  const std::size_t n_pairs = pairs_.size();
  for (const auto& [beta, times] : groups) {
    const auto kernel = kernel_for(beta, nodes_);
    const auto m = margins(beta, times);
    // Values by (pair, time-in-group); summed below in a fixed order.
    std::vector<double> values(n_pairs * times.size(), 0.0);
    parallel_for(n_pairs, [&](std::size_t q) {
      const SitePair& pr = pairs_.pairs[q];
      if (pr.weight == 0.0) return;
      for (std::size_t i = 0; i < times.size(); ++i) {
        const std::size_t t = times[i];
        const double z1 = m->z(t, pr.j), z2 = m->z(t, pr.k);
        if (std::isnan(z1) || std::isnan(z2)) continue;
        const double r = rho(pr.distance, p.lambda(t_[t]), p.nu);
        const ExponentParts e = kernel->exponent_parts(z1, z2, r);
        values[q * times.size() + i] = pr.weight * log_copula_density(e, m->log_g(t, pr.j), m->log_g(t, pr.k));
      }
    });
    std::vector<double> column(n_pairs);
    for (std::size_t i = 0; i < times.size(); ++i) {
      for (std::size_t q = 0; q < n_pairs; ++q) column[q] = values[q * times.size() + i];
      per_time[times[i]] = ordered_sum(column);
    }
  }
  return per_time;
}

double PairwiseLikelihood::operator()(const MaxIdParams& p) const { return ordered_sum(contributions(p)); }

std::vector<double> PairwiseLikelihood::per_time(const MaxIdParams& p) const { return contributions(p); }

}  // namespace spex::maxid
