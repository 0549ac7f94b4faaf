#pragma once

#include <string>
#include <vector>

#include "spex/ingest/hourly.hpp"

namespace spex::ingest {

struct BlockMaxOptions {
  int day_start_hour = 9;     // a day runs from this hour to the same hour next day
  double day_coverage = 0.8;  // minimum fraction of observed days per month
};

struct MonthlyMaximum {
  std::string site_id;
  int year = 0;
  int month = 0;
  double maximum = 0.0;  // mm/h; NaN when no hour was observed
  int observed_days = 0;
  int days_in_month = 0;
  double coverage() const { return static_cast<double>(observed_days) / days_in_month; }
};

struct BlockMaxResult {
  std::vector<MonthlyMaximum> retained;  // sorted by site, year, month
  std::vector<MonthlyMaximum> omitted;   // months failing the coverage rule
  std::vector<RowError> duplicates;      // repeated (site, hour) rows
};

// Day d is [d + start_hour, d + 1 + start_hour); an hour belongs to the
// month of its day. A day is observed with at least one non-missing hour.
BlockMaxResult block_maxima(std::vector<HourlyRecord> records, const BlockMaxOptions& opts = {});

}  // namespace spex::ingest
