#include "spex/ingest/blockmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "spex/common/error.hpp"

namespace spex::ingest {

BlockMaxResult block_maxima(std::vector<HourlyRecord> records, const BlockMaxOptions& opts) {
  if (opts.day_start_hour < 0 || opts.day_start_hour > 23) throw ConfigError("day_start_hour must lie in 0..23");
  if (!(opts.day_coverage >= 0.0 && opts.day_coverage <= 1.0)) throw ConfigError("day_coverage must lie in [0, 1]");
  // Sorting makes the result independent of input order; among repeated
  // hours the largest observed value wins.
  std::sort(records.begin(), records.end(), [](const HourlyRecord& a, const HourlyRecord& b) {
    if (a.site_id != b.site_id) return a.site_id < b.site_id;
    if (a.time != b.time) return a.time < b.time;
    const double va = a.precip.value_or(-1.0), vb = b.precip.value_or(-1.0);
    return va > vb;
  });
  BlockMaxResult out;
  struct Month {
    double maximum = -std::numeric_limits<double>::infinity();
    std::set<std::int64_t> days;
  };
  std::map<std::tuple<std::string, int, int>, Month> months;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const HourlyRecord& r = records[i];
    if (i > 0 && records[i - 1].site_id == r.site_id && records[i - 1].time == r.time) {
      out.duplicates.push_back({0, "repeated hour " + format_timestamp(r.time) + " at site " + r.site_id});
      continue;
    }
    const Minutes shifted = r.time - static_cast<Minutes>(opts.day_start_hour) * 60;
    const std::int64_t day = shifted >= 0 ? shifted / 1440 : -((-shifted + 1439) / 1440);
    const CivilDate c = civil_from_days(day);
    auto& m = months[{r.site_id, c.year, c.month}];
    if (!r.precip) continue;
    m.days.insert(day);
    m.maximum = std::max(m.maximum, *r.precip);
  }
  for (const auto& [key, m] : months) {
    const auto& [site, y, mo] = key;
    MonthlyMaximum mm;
    mm.site_id = site;
    mm.year = y;
    mm.month = mo;
    mm.observed_days = static_cast<int>(m.days.size());
    mm.days_in_month = days_in_month(y, mo);
    mm.maximum = m.days.empty() ? std::numeric_limits<double>::quiet_NaN() : m.maximum;
    // Compare counts exactly rather than the rounded fraction.
    const bool keep = !m.days.empty() && mm.observed_days >= opts.day_coverage * mm.days_in_month - 1e-9;
    (keep ? out.retained : out.omitted).push_back(mm);
  }
  return out;
}

}  // namespace spex::ingest
