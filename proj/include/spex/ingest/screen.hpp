#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "spex/geo/distance.hpp"
#include "spex/ingest/hourly.hpp"

namespace spex::ingest {

struct StationMeta {
  std::string site_id;
  double lon = 0.0;
  double lat = 0.0;
  double alt_m = 0.0;
};

// Reads site_id,lon,lat,alt_m.
std::vector<StationMeta> read_stations(const std::string& path);

struct StationSummary {
  StationMeta meta;
  double record_years = 0.0;      // first to last observed hour
  double missing_fraction = 1.0;  // over the hours of that span
};

// Record span and missingness per station in `stations`; stations without
// records get missing_fraction 1.
std::vector<StationSummary> summarize_stations(const std::vector<StationMeta>& stations,
                                               const std::vector<HourlyRecord>& records);

struct ScreenOptions {
  double missing_threshold = 0.2;
  double min_sep_km = 5.0;
};

struct ScreenResult {
  std::vector<std::string> modelled;
  std::vector<std::string> test;      // close to a longer-record station
  std::vector<std::string> excluded;  // too much missing data
};

using DistanceFn = std::function<double(const StationMeta&, const StationMeta&)>;

// Drops stations above the missing threshold, then visits the rest by
// decreasing record length (ties by id) and sends any station within
// min_sep_km of an already kept one to the test set. Distance defaults to
// haversine.
ScreenResult screen_stations(const std::vector<StationSummary>& stations, const ScreenOptions& opts = {},
                             const DistanceFn& distance = {});

}  // namespace spex::ingest
