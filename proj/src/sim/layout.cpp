#include "spex/sim/layout.hpp"

#include <cmath>
#include <random>

#include "spex/common/error.hpp"

namespace spex::sim {
namespace {

std::vector<std::string> default_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("S" + std::to_string(i + 1));
  return ids;
}

}  // namespace

SiteLayout SiteLayout::plane(std::vector<double> x_km, std::vector<double> y_km) {
  if (x_km.size() != y_km.size()) throw DataError("layout: x and y lengths differ");
  SiteLayout s;
  const std::size_t n = x_km.size();
  s.ids = default_ids(n);
  s.x = std::move(x_km);
  s.y = std::move(y_km);
  s.distances.resize(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) s.distances(i, j) = std::hypot(s.x[i] - s.x[j], s.y[i] - s.y[j]);
  }
  return s;
}

SiteLayout SiteLayout::geographic(const std::vector<geo::LonLat>& points) {
  SiteLayout s;
  const std::size_t n = points.size();
  s.ids = default_ids(n);
  s.lonlat = true;
  s.distances.resize(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    s.x.push_back(points[i].lon);
    s.y.push_back(points[i].lat);
    for (std::size_t j = 0; j < n; ++j) s.distances(i, j) = geo::haversine(points[i], points[j]);
  }
  return s;
}

SiteLayout SiteLayout::random_square(std::size_t n, double side_km, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, side_km);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = u(rng);
    y[i] = u(rng);
  }
  return plane(std::move(x), std::move(y));
}

SiteLayout SiteLayout::with_distances(Eigen::MatrixXd d) const {
  if (d.rows() != static_cast<Eigen::Index>(size()) || d.cols() != d.rows()) {
    throw DataError("layout: distance matrix size does not match the sites");
  }
  SiteLayout s = *this;
  s.distances = std::move(d);
  return s;
}

}  // namespace spex::sim
