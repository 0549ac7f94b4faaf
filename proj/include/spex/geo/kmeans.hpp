#pragma once

#include <cstdint>
#include <vector>

#include "spex/geo/distance.hpp"

namespace spex::geo {

struct KMeansResult {
  std::vector<int> labels;  // 0-based, numbered by first appearance
  std::vector<PlaneXY> centers;
  double inertia = 0.0;
};

// Lloyd's algorithm from k-means++ seeds; the restart with the lowest
// inertia is kept.
KMeansResult kmeans(const std::vector<PlaneXY>& points, int k, std::uint64_t seed, int restarts = 50,
                    int max_iterations = 300);

// Seeds of the individual restarts used by kmeans().
std::vector<std::uint64_t> restart_seeds(std::uint64_t seed, int restarts);

// One Lloyd run from k-means++ seeds drawn with the given seed.
KMeansResult kmeans_single(const std::vector<PlaneXY>& points, int k, std::uint64_t seed, int max_iterations = 300);

}  // namespace spex::geo
