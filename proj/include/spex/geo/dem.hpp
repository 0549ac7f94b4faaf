#pragma once

#include <string>
#include <vector>

#include "spex/geo/distance.hpp"

namespace spex::geo {

// Regular lon/lat elevation grid; row 0 is the southern edge.
class Dem {
 public:
  Dem(double lon0, double lat0, double cell, int ncols, int nrows, std::vector<double> elevation);

  static Dem read_esri_ascii(const std::string& path);
  // CSV with columns lon,lat,elev on a complete regular grid.
  static Dem read_csv(const std::string& path);

  bool contains(const LonLat& p) const;
  // Bilinear elevation (m); throws DataError outside the grid.
  double elevation(const LonLat& p) const;

  double lon0() const { return lon0_; }
  double lat0() const { return lat0_; }
  double cell() const { return cell_; }
  int cols() const { return ncols_; }
  int rows() const { return nrows_; }

 private:
  double lon0_, lat0_, cell_;
  int ncols_, nrows_;
  std::vector<double> z_;  // row-major from the south
};

// Length of the surface profile along the great circle, sampled every step_km.
double topo_distance(const LonLat& a, const LonLat& b, const Dem& dem, double step_km = 0.1);

}  // namespace spex::geo
