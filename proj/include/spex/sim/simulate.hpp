#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spex/maxid/pll.hpp"
#include "spex/sim/layout.hpp"

namespace spex::sim {

// n replicates (rows) of a standard Gaussian field with correlation
// exp{-(d / lambda)^nu}.
Eigen::MatrixXd sim_gauss(const SiteLayout& layout, double lambda, double nu, std::size_t n, std::uint64_t seed);

struct MaxIdSimOptions {
  double eps = 1e-6;  // stopping tolerance; the W bound is the 1 - eps * 1e-3 normal quantile
  std::size_t max_points = 1'000'000;
  int angular_nodes = 60;
};

struct MaxIdSample {
  Eigen::MatrixXd z;  // replicate x site, max-id scale
  Eigen::MatrixXd u;  // replicate x site, uniform scale
};

// Replicates of Z(s) = max_i R_i W_i(s)+ with R_i = kbar^-1(Gamma_i).
// covariate[r] is the seasonal covariate of replicate r (empty: all zero).
// Replicate r draws from a stream seeded by (seed, r).
MaxIdSample sim_maxid(const SiteLayout& layout, const maxid::MaxIdParams& params,
                      const std::vector<double>& covariate, std::size_t n, std::uint64_t seed,
                      const MaxIdSimOptions& opts = {});

}  // namespace spex::sim
