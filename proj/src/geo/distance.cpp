#include "spex/geo/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spex/common/error.hpp"

namespace spex::geo {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void check(const LonLat& p) {
  if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || p.lat < -90.0 || p.lat > 90.0) {
    throw DomainError("invalid longitude/latitude");
  }
}

}  // namespace

double haversine(const LonLat& a, const LonLat& b) {
  check(a);
  check(b);
  const double dlat = (b.lat - a.lat) * kDeg, dlon = (b.lon - a.lon) * kDeg;
  const double s = std::sin(dlat / 2.0), t = std::sin(dlon / 2.0);
  const double h = s * s + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

LonLat interpolate_great_circle(const LonLat& a, const LonLat& b, double f) {
  const double la1 = a.lat * kDeg, lo1 = a.lon * kDeg, la2 = b.lat * kDeg, lo2 = b.lon * kDeg;
  const double delta = haversine(a, b) / kEarthRadiusKm;
  if (delta < 1e-15) return a;
  const double wa = std::sin((1.0 - f) * delta) / std::sin(delta), wb = std::sin(f * delta) / std::sin(delta);
  const double x = wa * std::cos(la1) * std::cos(lo1) + wb * std::cos(la2) * std::cos(lo2);
  const double y = wa * std::cos(la1) * std::sin(lo1) + wb * std::cos(la2) * std::sin(lo2);
  const double z = wa * std::sin(la1) + wb * std::sin(la2);
  return {std::atan2(y, x) / kDeg, std::atan2(z, std::hypot(x, y)) / kDeg};
}

std::vector<PlaneXY> project_km(const std::vector<LonLat>& points) {
  if (points.empty()) return {};
  double lat0 = 0.0;
  for (const auto& p : points) {
    check(p);
    lat0 += p.lat;
  }
  lat0 /= static_cast<double>(points.size());
  const double kx = kEarthRadiusKm * kDeg * std::cos(lat0 * kDeg), ky = kEarthRadiusKm * kDeg;
  std::vector<PlaneXY> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({p.lon * kx, p.lat * ky});
  return out;
}

double distance_to_polyline(const LonLat& p, const std::vector<LonLat>& line) {
  if (line.empty()) throw DataError("coastline polyline is empty");
  check(p);
  double best = std::numeric_limits<double>::infinity();
  const double kx = kEarthRadiusKm * kDeg * std::cos(p.lat * kDeg), ky = kEarthRadiusKm * kDeg;
  for (std::size_t i = 0; i < line.size(); ++i) {
    best = std::min(best, haversine(p, line[i]));
    if (i + 1 == line.size()) break;
    // Foot of the perpendicular on the local plane centred at p.
    const double ax = (line[i].lon - p.lon) * kx, ay = (line[i].lat - p.lat) * ky;
    const double bx = (line[i + 1].lon - p.lon) * kx, by = (line[i + 1].lat - p.lat) * ky;
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    if (len2 <= 0.0) continue;
    const double f = -(ax * dx + ay * dy) / len2;
    if (f <= 0.0 || f >= 1.0) continue;
    best = std::min(best, haversine(p, interpolate_great_circle(line[i], line[i + 1], f)));
  }
  return best;
}

}  // namespace spex::geo
