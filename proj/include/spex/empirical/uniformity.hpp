#pragma once

#include <cstddef>
#include <vector>

namespace spex::empirical {

struct KsResult {
  std::size_t n = 0;
  double statistic = 0.0;  // sup |F_n(u) - u|
  double p_value = 1.0;    // asymptotic, with the Stephens small-sample correction
};

// One-sample Kolmogorov-Smirnov test against Uniform(0, 1).
KsResult ks_uniform(std::vector<double> u);

// Kolmogorov survival function Q(x) = 2 sum_k (-1)^(k-1) exp(-2 k^2 x^2).
double kolmogorov_q(double x);

}  // namespace spex::empirical
