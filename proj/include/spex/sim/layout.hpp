#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spex/geo/distance.hpp"

namespace spex::sim {

// Site coordinates and their distance matrix (km).
struct SiteLayout {
  std::vector<std::string> ids;
  std::vector<double> x, y;  // km on a plane, or lon/lat degrees when lonlat is set
  bool lonlat = false;
  Eigen::MatrixXd distances;

  std::size_t size() const { return ids.size(); }

  static SiteLayout plane(std::vector<double> x_km, std::vector<double> y_km);
  static SiteLayout geographic(const std::vector<geo::LonLat>& points);
  // Uniform random sites in a side_km square.
  static SiteLayout random_square(std::size_t n, double side_km, std::uint64_t seed);
  // Uses a given distance matrix (e.g. topographic); coordinates are kept as given.
  SiteLayout with_distances(Eigen::MatrixXd d) const;
};

}  // namespace spex::sim
