#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spex/gam/table.hpp"
#include "spex/geo/distance.hpp"
#include "spex/ingest/screen.hpp"
#include "spex/smooth/loess.hpp"

namespace spex::ingest {

struct AnomalyRow {
  int year = 0;
  int month = 0;
  double anomaly = 0.0;  // deg C
};
std::vector<AnomalyRow> read_anomalies(const std::string& path);  // year,month,anomaly_C

// A(y): LOESS of the monthly anomalies against fractional time
// year + (month - 0.5) / 12, evaluated at mid-year for every year present.
std::map<int, double> anomaly_covariate(const std::vector<AnomalyRow>& rows, const smooth::LoessOptions& opts = {});

struct ClimateRow {
  double lon = 0.0, lat = 0.0;
  int month = 0, year = 0;
  double maximum = 0.0;
};
std::vector<ClimateRow> read_climate_grid(const std::string& path);  // lon,lat,month,year,maximum

struct ClimateCell {
  geo::LonLat where;
  std::array<double, 12> c_mu{};  // centred mean monthly maximum
  double ln_c_sigma2 = 0.0;       // log variance of monthly maxima
};

// Per-cell covariates over the window [first_year, last_year]; every cell
// must have every month of the window.
std::vector<ClimateCell> climate_covariates(const std::vector<ClimateRow>& rows, int first_year = 1981,
                                            int last_year = 2005);
std::size_t nearest_cell(const std::vector<ClimateCell>& cells, const geo::LonLat& p);

// How site values of gridded covariates are taken from the cells.
enum class CellLookup {
  nearest,           // the nearest cell
  inverse_distance,  // the four nearest cells weighted by 1 / d^2
};
CellLookup cell_lookup_from_string(const std::string& name);  // "nearest" or "idw"

// (cell index, weight) pairs with weights summing to 1.
std::vector<std::pair<std::size_t, double>> cell_weights(const std::vector<ClimateCell>& cells, const geo::LonLat& p,
                                                         CellLookup lookup);

struct TemperatureRow {
  std::string site_id;
  int year = 0, month = 0, day = 0;
  double tmax = 0.0;
};
std::vector<TemperatureRow> read_temperature(const std::string& path);  // site_id,date,tmax_C

// T(m): mean max-daily temperature per calendar month over all stations,
// standardized to mean 0 and sample sd 1 across the 12 months.
std::array<double, 12> temperature_covariate(const std::vector<TemperatureRow>& rows);

std::vector<geo::LonLat> read_coastline(const std::string& path);  // lon,lat

struct CovariateBundle {
  std::map<int, double> anomaly;  // A by year
  std::vector<ClimateCell> cells;
  std::optional<std::array<double, 12>> temperature;
  std::vector<geo::LonLat> coastline;
  CellLookup lookup = CellLookup::nearest;
};

// Adds lon, lat and Alt columns to a maxima table, plus D, A, c_mu,
// ln_c_sigma2 and T for the parts of the bundle that are present. Throws DataError naming any site or year the inputs do not cover.
void attach_covariates(gam::MaximaTable& table, const CovariateBundle& bundle, const std::vector<StationMeta>& stations);

}  // namespace spex::ingest
