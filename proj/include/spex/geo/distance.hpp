#pragma once

#include <vector>

namespace spex::geo {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct LonLat {
  double lon = 0.0;  // degrees
  double lat = 0.0;
};

// Great-circle distance in km.
double haversine(const LonLat& a, const LonLat& b);

// Point at fraction f along the great circle from a to b.
LonLat interpolate_great_circle(const LonLat& a, const LonLat& b, double f);

// Equirectangular projection to km about a reference latitude.
struct PlaneXY {
  double x = 0.0;
  double y = 0.0;
};
std::vector<PlaneXY> project_km(const std::vector<LonLat>& points);

// Shortest distance from p to a polyline (great-circle approximation on the
// local plane, exact at the vertices).
double distance_to_polyline(const LonLat& p, const std::vector<LonLat>& line);

}  // namespace spex::geo
