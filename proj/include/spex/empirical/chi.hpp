#pragma once

#include <Eigen/Dense>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace spex::empirical {

// Empirical CDF values rank / (n + 1) with ties given their average rank.
std::vector<double> ecdf(const std::vector<double>& x);

// chi_q from paired series; entries where either value is NaN are dropped.
// Needs at least 20 complete pairs (DataError otherwise). Returns nullopt
// when no value of x2 exceeds q.
std::optional<double> chi_q(const std::vector<double>& x1, const std::vector<double>& x2, double q);

struct ChiBin {
  double distance = 0.0;  // mean pair distance in the bin (km)
  double d_min = 0.0, d_max = 0.0;
  double mean = 0.0;
  double lower = 0.0;  // 2.5% quantile of in-bin estimates
  double upper = 0.0;  // 97.5%
  std::size_t n_pairs = 0;
};

struct ChiCurve {
  double q = 0.0;
  std::string season;
  std::vector<ChiBin> bins;
};

// Per-pair chi_q from a time x site panel (NaN = missing), grouped into
// equal-count distance bins. When `months` is non-empty only times whose
// month (from time_months) is in the set are used.
ChiCurve binned_chi(const Eigen::MatrixXd& data, const Eigen::MatrixXd& distances, double q, int n_bins = 35,
                    const std::vector<int>& time_months = {}, const std::set<int>& months = {},
                    std::string season = "all");

// Type-7 sample quantile of sorted values.
double sample_quantile(const std::vector<double>& sorted, double p);

}  // namespace spex::empirical
