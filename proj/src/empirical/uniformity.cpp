#include "spex/empirical/uniformity.hpp"

#include <algorithm>
#include <cmath>

#include "spex/common/error.hpp"

namespace spex::empirical {

double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // the series needs many terms and the value is 1 to double precision
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_uniform(std::vector<double> u) {
  if (u.empty()) throw DataError("KS test needs at least one value");
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] >= 0.0 && u[i] <= 1.0)) throw DomainError("KS test value outside [0, 1]");
    d = std::max({d, (i + 1.0) / n - u[i], u[i] - i / n});
  }
  KsResult r;
  r.n = u.size();
  r.statistic = d;
  const double rn = std::sqrt(n);
  r.p_value = kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
  return r;
}

}  // namespace spex::empirical
