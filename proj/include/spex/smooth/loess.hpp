#pragma once

#include <span>
#include <vector>

namespace spex::smooth {

struct LoessOptions {
  double span = 0.75;
  int degree = 2;
};

// Local polynomial regression with tricube weights over the
// floor(span * n) nearest neighbours of each target point. No robustness
// iterations. Returns fitted values at `targets`.
std::vector<double> loess(std::span<const double> x, std::span<const double> y,
                          std::span<const double> targets, const LoessOptions& opts = {});

// Fitted values at the design points themselves.
inline std::vector<double> loess(std::span<const double> x, std::span<const double> y,
                                 const LoessOptions& opts = {}) {
  return loess(x, y, x, opts);
}

}  // namespace spex::smooth
