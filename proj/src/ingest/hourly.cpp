#include "spex/ingest/hourly.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <regex>

#include "spex/common/csv.hpp"
#include "spex/common/error.hpp"

namespace spex::ingest {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::int64_t days_from_civil(const CivilDate& d) {
  using namespace std::chrono;
  const year_month_day ymd{year{d.year}, month{static_cast<unsigned>(d.month)}, day{static_cast<unsigned>(d.day)}};
  return sys_days{ymd}.time_since_epoch().count();
}

CivilDate civil_from_days(std::int64_t days) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
          static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

int days_in_month(int y, int m) {
  using namespace std::chrono;
  const year_month_day_last last{year{y} / month{static_cast<unsigned>(m)} / std::chrono::last};
  return static_cast<int>(static_cast<unsigned>(last.day()));
}

std::optional<Minutes> parse_timestamp(const std::string& text) {
  static const std::regex pattern(R"(^\s*(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2})(?::(\d{2}))?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, pattern)) return std::nullopt;
  const int y = std::stoi(m[1]), mo = std::stoi(m[2]), d = std::stoi(m[3]);
  const int h = std::stoi(m[4]), mi = std::stoi(m[5]), s = m[6].matched ? std::stoi(m[6]) : 0;
  if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || h > 23 || mi > 59 || s > 59) return std::nullopt;
  return days_from_civil({y, mo, d}) * 1440 + h * 60 + mi;
}

std::string format_timestamp(Minutes t) {
  const std::int64_t day = t >= 0 ? t / 1440 : -((-t + 1439) / 1440);
  const int rem = static_cast<int>(t - day * 1440);
  const CivilDate c = civil_from_days(day);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d", c.year, c.month, c.day, rem / 60, rem % 60);
  return buf;
}

HourlyData read_hourly(const std::string& path, const std::set<std::string>& sentinels) {
  const csv::Table t = csv::read_file(path);
  const std::size_t is = t.column("site_id"), it = t.column("timestamp"), ip = t.column("precip_mm");
  std::vector<double> numeric_sentinels;
  for (const auto& s : sentinels) {
    if (auto x = csv::parse_double(s)) numeric_sentinels.push_back(*x);
  }
  HourlyData out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t line = t.line_numbers[r];
    if (row.size() != t.header.size()) {
      out.errors.push_back({line, "wrong number of fields"});
      continue;
    }
    const auto time = parse_timestamp(row[it]);
    if (!time) {
      out.errors.push_back({line, "malformed timestamp '" + row[it] + "'"});
      continue;
    }
    HourlyRecord rec{trim(row[is]), *time, std::nullopt};
    if (rec.site_id.empty()) {
      out.errors.push_back({line, "empty site_id"});
      continue;
    }
    const std::string v = trim(row[ip]);
    if (!sentinels.count(v)) {
      const auto x = csv::parse_double(v);
      if (!x) {
        out.errors.push_back({line, "precipitation '" + v + "' is not numeric"});
        continue;
      }
      if (std::find(numeric_sentinels.begin(), numeric_sentinels.end(), *x) != numeric_sentinels.end()) {
        out.records.push_back(std::move(rec));
        continue;
      }
      if (*x < 0.0) {
        out.errors.push_back({line, "negative precipitation"});
        continue;
      }
      rec.precip = *x;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace spex::ingest
