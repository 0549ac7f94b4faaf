#include "spex/maxid/pairs.hpp"

#include <algorithm>
#include <cmath>

#include "spex/common/error.hpp"

namespace spex::maxid {

double PairSet::median_distance() const {
  if (pairs.empty()) throw DataError("pair set is empty");
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& p : pairs) d.push_back(p.distance);
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  return n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

PairSet PairSet::all(const Eigen::MatrixXd& distances, double cutoff_km) {
  if (distances.rows() != distances.cols()) throw DataError("distance matrix must be square");
  PairSet out;
  const int n = static_cast<int>(distances.rows());
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const double d = distances(j, k);
      if (!(d >= 0.0) || !std::isfinite(d)) throw DataError("distance matrix has a negative or non-finite entry");
      if (std::abs(d - distances(k, j)) > 1e-9 * (1.0 + d)) throw DataError("distance matrix is not symmetric");
      out.pairs.push_back({j, k, d, d <= cutoff_km ? 1.0 : 0.0});
    }
  }
  return out;
}

}  // namespace spex::maxid
