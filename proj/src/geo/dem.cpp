#include "spex/geo/dem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "spex/common/csv.hpp"
#include "spex/common/error.hpp"

namespace spex::geo {

Dem::Dem(double lon0, double lat0, double cell, int ncols, int nrows, std::vector<double> elevation)
    : lon0_(lon0), lat0_(lat0), cell_(cell), ncols_(ncols), nrows_(nrows), z_(std::move(elevation)) {
  if (ncols < 2 || nrows < 2 || !(cell > 0.0)) throw DataError("DEM needs at least 2x2 cells and a positive cell size");
  if (z_.size() != static_cast<std::size_t>(ncols) * nrows) throw DataError("DEM elevation count does not match grid");
  for (double v : z_) {
    if (!std::isfinite(v)) throw DataError("DEM elevations must be finite");
  }
}

// Cell-centred ESRI grid: xllcorner/yllcorner are treated as the centre of
// the south-west cell when given as xllcenter/yllcenter, else shifted by half a cell.
Dem Dem::read_esri_ascii(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open DEM " + path);
  std::map<std::string, double> head;
  bool center = false;
  std::string line;
  std::streampos data_start = in.tellg();
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || !std::isalpha(static_cast<unsigned char>(key[0]))) break;
    std::transform(key.begin(), key.end(), key.begin(), ::tolower);
    double v;
    if (!(ls >> v)) throw DataError("malformed ESRI header in " + path);
    if (key == "xllcenter" || key == "yllcenter") center = true;
    head[key] = v;
    data_start = in.tellg();
  }
  in.clear();
  in.seekg(data_start);
  for (const char* k : {"ncols", "nrows", "cellsize"}) {
    if (!head.count(k)) throw DataError(std::string("ESRI header in ") + path + " lacks " + k);
  }
  const int ncols = static_cast<int>(head.at("ncols")), nrows = static_cast<int>(head.at("nrows"));
  const double cell = head.at("cellsize");
  const double nodata = head.count("nodata_value") ? head["nodata_value"] : -9999.0;
  double x0 = center ? head["xllcenter"] : head["xllcorner"] + 0.5 * cell;
  double y0 = center ? head["yllcenter"] : head["yllcorner"] + 0.5 * cell;
  std::vector<double> z(static_cast<std::size_t>(ncols) * nrows);
  // File rows run north to south.
  for (int r = nrows - 1; r >= 0; --r) {
    for (int c = 0; c < ncols; ++c) {
      double v;
      if (!(in >> v)) throw DataError("ESRI grid " + path + " has too few values");
      if (v == nodata) throw DataError("ESRI grid " + path + " contains NODATA cells");
      z[static_cast<std::size_t>(r) * ncols + c] = v;
    }
  }
  return Dem(x0, y0, cell, ncols, nrows, std::move(z));
}

Dem Dem::read_csv(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const std::size_t ilon = t.column("lon"), ilat = t.column("lat"), iz = t.column("elev");
  std::vector<double> lons, lats;
  std::map<std::pair<double, double>, double> cells;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto lon = csv::parse_double(t.rows[r][ilon]), lat = csv::parse_double(t.rows[r][ilat]),
               z = csv::parse_double(t.rows[r][iz]);
    if (!lon || !lat || !z) throw DataError("DEM CSV line " + std::to_string(t.line_numbers[r]) + " is not numeric");
    lons.push_back(*lon);
    lats.push_back(*lat);
    cells[{*lon, *lat}] = *z;
  }
  auto unique_sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto ux = unique_sorted(lons), uy = unique_sorted(lats);
  if (ux.size() < 2 || uy.size() < 2) throw DataError("DEM CSV needs at least a 2x2 grid");
  const double cell = ux[1] - ux[0];
  auto regular = [&](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (std::abs(v[i] - v[i - 1] - cell) > 1e-6 * cell) return false;
    }
    return true;
  };
  if (!regular(ux) || !regular(uy)) throw DataError("DEM CSV is not a regular square grid");
  std::vector<double> z(ux.size() * uy.size());
  for (std::size_t r = 0; r < uy.size(); ++r) {
    for (std::size_t c = 0; c < ux.size(); ++c) {
      auto it = cells.find({ux[c], uy[r]});
      if (it == cells.end()) throw DataError("DEM CSV grid is incomplete");
      z[r * ux.size() + c] = it->second;
    }
  }
  return Dem(ux.front(), uy.front(), cell, static_cast<int>(ux.size()), static_cast<int>(uy.size()), std::move(z));
}

bool Dem::contains(const LonLat& p) const {
  const double fx = (p.lon - lon0_) / cell_, fy = (p.lat - lat0_) / cell_;
  const double tol = 1e-9;
  return fx >= -tol && fy >= -tol && fx <= ncols_ - 1 + tol && fy <= nrows_ - 1 + tol;
}

double Dem::elevation(const LonLat& p) const {
  if (!contains(p)) throw DataError("point outside DEM bounds");
  const double fx = std::clamp((p.lon - lon0_) / cell_, 0.0, ncols_ - 1.0);
  const double fy = std::clamp((p.lat - lat0_) / cell_, 0.0, nrows_ - 1.0);
  const int c = std::min(static_cast<int>(fx), ncols_ - 2), r = std::min(static_cast<int>(fy), nrows_ - 2);
  const double tx = fx - c, ty = fy - r;
  auto at = [&](int rr, int cc) { return z_[static_cast<std::size_t>(rr) * ncols_ + cc]; };
  return (1 - tx) * (1 - ty) * at(r, c) + tx * (1 - ty) * at(r, c + 1) + (1 - tx) * ty * at(r + 1, c) +
         tx * ty * at(r + 1, c + 1);
}

double topo_distance(const LonLat& a, const LonLat& b, const Dem& dem, double step_km) {
  if (!(step_km > 0.0)) throw DomainError("topo_distance: step must be positive");
  if (!dem.contains(a) || !dem.contains(b)) throw DataError("topo_distance: point outside DEM bounds");
  const double flat = haversine(a, b);
  if (flat == 0.0) return 0.0;
  const int segments = std::max(1, static_cast<int>(std::ceil(flat / step_km)));
  const double h = flat / segments;
  double total = 0.0;
  double z_prev = dem.elevation(a);
  for (int i = 1; i <= segments; ++i) {
    const LonLat p = i == segments ? b : interpolate_great_circle(a, b, static_cast<double>(i) / segments);
    const double z = dem.elevation(p);
    const double dz = (z - z_prev) / 1000.0;  // m -> km
    total += std::sqrt(h * h + dz * dz);
    z_prev = z;
  }
  return total;
}

}  // namespace spex::geo
