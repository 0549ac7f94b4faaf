#pragma once

#include "spex/maxid/pll.hpp"

namespace spex::maxid {

// Model chi_q at distance d and covariate t:
// (1 - 2q + C(q, q)) / (1 - q), C(q, q) = exp(-V(G^-1(q), G^-1(q))).
double model_chi(double distance, double t, const MaxIdParams& p, double q, int angular_nodes = 60);

// q used for the limiting curve.
inline constexpr double kLimitingQ = 0.997;

}  // namespace spex::maxid
