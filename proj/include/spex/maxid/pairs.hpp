#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace spex::maxid {

struct SitePair {
  int j = 0;
  int k = 0;
  double distance = 0.0;  // km
  double weight = 1.0;
};

// Unordered site pairs used by the composite likelihood.
struct PairSet {
  std::vector<SitePair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  double median_distance() const;

  // Every pair j < k of a symmetric distance matrix. Pairs farther apart than
  // cutoff_km get weight zero (they are kept so indices stay stable).
  static PairSet all(const Eigen::MatrixXd& distances,
                     double cutoff_km = std::numeric_limits<double>::infinity());
};

}  // namespace spex::maxid
