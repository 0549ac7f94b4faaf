#pragma once

#include <Eigen/Dense>
#include <array>
#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "spex/maxid/kernel.hpp"
#include "spex/maxid/pairs.hpp"

namespace spex::maxid {

// beta(T) = exp(a0b + a1b T), lambda(T) = exp(a0l + a1l T).
struct MaxIdParams {
  double alpha0_beta = 0.0;
  double alpha1_beta = 0.0;
  double alpha0_lambda = 0.0;
  double alpha1_lambda = 0.0;
  double nu = 1.0;

  double beta(double t) const;
  double lambda(double t) const;
  void validate() const;  // throws DomainError
};

// Uniform-scale maxima laid out as time x site; NaN marks a missing value.
struct UniformPanel {
  std::vector<std::string> site_ids;
  std::vector<int> months;  // 1..12 per time
  std::vector<int> years;
  Eigen::MatrixXd u;

  std::size_t times() const { return static_cast<std::size_t>(u.rows()); }
  std::size_t sites() const { return static_cast<std::size_t>(u.cols()); }
  // Moves values into (0, 1) by 1e-12 and checks the layout.
  void validate_and_nudge();
};

// Seasonal covariate by calendar month (index 0 = January).
using MonthlyCovariate = std::array<double, 12>;

// Number of densities floored at 1e-300 since start-up.
std::size_t density_floor_count();

// log c(u1, u2) for one pair.
double pair_loglik(double u1, double u2, double distance, double t, const MaxIdParams& p,
                   int angular_nodes = 60);
// The bivariate copula C(u1, u2) = exp(-V(G^-1(u1), G^-1(u2))).
double copula_cdf(double u1, double u2, double distance, double t, const MaxIdParams& p,
                  int angular_nodes = 60);

// Pairwise composite log-likelihood over a panel.
class PairwiseLikelihood {
 public:
  PairwiseLikelihood(UniformPanel panel, PairSet pairs, MonthlyCovariate covariate, int angular_nodes = 60);

  // Sum over pairs and times; incomplete replicate-pairs are skipped.
  double operator()(const MaxIdParams& p) const;
  // Contribution of each time (replicate), summed over pairs.
  std::vector<double> per_time(const MaxIdParams& p) const;

  const UniformPanel& panel() const { return panel_; }
  const PairSet& pairs() const { return pairs_; }
  double covariate_at(std::size_t time) const { return t_[time]; }
  std::size_t observations() const { return observations_; }

 private:
  struct Margins {
    Eigen::MatrixXd z, log_g;  // time x site, NaN where missing
    std::vector<char> done;    // per time: already transformed
  };
  std::shared_ptr<const Margins> margins(double beta, const std::vector<std::size_t>& times) const;
  // Per (time) sums, filled in time order.
  std::vector<double> contributions(const MaxIdParams& p) const;

  UniformPanel panel_;
  PairSet pairs_;
  std::vector<double> t_;
  int nodes_;
  std::size_t observations_ = 0;
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const Margins>> cache_;
};

}  // namespace spex::maxid
