#include "spex/smooth/loess.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "spex/common/error.hpp"

namespace spex::smooth {

std::vector<double> loess(std::span<const double> x, std::span<const double> y,
                          std::span<const double> targets, const LoessOptions& opts) {
  const std::size_t n = x.size();
  if (y.size() != n) throw ConfigError("loess: x and y differ in length");
  if (opts.degree < 0 || opts.degree > 2) throw ConfigError("loess: degree must be 0, 1 or 2");
  if (n < static_cast<std::size_t>(opts.degree) + 2) throw ConfigError("loess: too few points");
  const auto q = static_cast<std::size_t>(std::floor(opts.span * static_cast<double>(n)));
  if (q < static_cast<std::size_t>(opts.degree) + 1) throw ConfigError("loess: span too small for degree");
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  if (*mn == *mx) throw ConfigError("loess: all x values are equal");

  const int p = opts.degree + 1;
  std::vector<double> out(targets.size());
  std::vector<double> dist(n);
  std::vector<std::size_t> order(n);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double x0 = targets[t];
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::abs(x[i] - x0);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t take = std::min(q, n);
    std::nth_element(order.begin(), order.begin() + (take - 1), order.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    double bandwidth = dist[order[take - 1]];
    // Spans above one widen the neighbourhood proportionally.
    if (opts.span > 1.0) bandwidth *= opts.span;
    if (!(bandwidth > 0.0)) throw ConfigError("loess: zero bandwidth (repeated x values)");

    Eigen::MatrixXd a(n, p);
    Eigen::VectorXd b(n);
    Eigen::Index used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = dist[i] / bandwidth;
      if (r >= 1.0) continue;
      const double w = std::pow(1.0 - r * r * r, 3);
      const double sw = std::sqrt(w);
      const double dx = x[i] - x0;
      double pw = 1.0;
      for (int c = 0; c < p; ++c) {
        a(used, c) = sw * pw;
        pw *= dx;
      }
      b(used) = sw * y[i];
      ++used;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a.topRows(used));
    const Eigen::VectorXd coef = qr.solve(b.head(used));
    out[t] = coef(0);
  }
  return out;
}

}  // namespace spex::smooth
