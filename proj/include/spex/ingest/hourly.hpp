#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace spex::ingest {

// Local civil time as minutes since 1970-01-01 00:00 (no time zone).
using Minutes = std::int64_t;

struct HourlyRecord {
  std::string site_id;
  Minutes time = 0;
  std::optional<double> precip;  // mm/h; nullopt when missing
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct HourlyData {
  std::vector<HourlyRecord> records;
  std::vector<RowError> errors;
};

// "YYYY-MM-DD HH:MM[:SS]" or with a 'T' separator. nullopt when malformed.
std::optional<Minutes> parse_timestamp(const std::string& text);
std::string format_timestamp(Minutes t);

// Calendar helpers on whole days since 1970-01-01.
struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;
};
CivilDate civil_from_days(std::int64_t days);
std::int64_t days_from_civil(const CivilDate& d);
int days_in_month(int year, int month);

// Reads site_id,timestamp,precip_mm. Values listed in `sentinels` (after
// trimming) mark a missing hour. Malformed rows are reported, not fatal.
HourlyData read_hourly(const std::string& path, const std::set<std::string>& sentinels = {"", "-999"});

}  // namespace spex::ingest
