#include "spex/ingest/screen.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "spex/common/csv.hpp"
#include "spex/common/error.hpp"

namespace spex::ingest {

std::vector<StationMeta> read_stations(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const std::size_t is = t.column("site_id"), ilon = t.column("lon"), ilat = t.column("lat"), ialt = t.column("alt_m");
  std::vector<StationMeta> out;
  std::set<std::string> ids;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path + " line " + std::to_string(t.line_numbers[r]);
    const auto lon = csv::parse_double(row.at(ilon)), lat = csv::parse_double(row.at(ilat)),
               alt = csv::parse_double(row.at(ialt));
    if (!lon || !lat || !alt) throw DataError(where + ": lon, lat and alt_m must be numeric");
    if (!ids.insert(row[is]).second) throw DataError(where + ": duplicate site_id " + row[is]);
    out.push_back({row[is], *lon, *lat, *alt});
  }
  return out;
}

std::vector<StationSummary> summarize_stations(const std::vector<StationMeta>& stations,
                                               const std::vector<HourlyRecord>& records) {
  struct Acc {
    Minutes first = 0, last = 0;
    std::vector<Minutes> hours;
  };
  std::map<std::string, Acc> acc;
  for (const auto& r : records) {
    if (!r.precip) continue;
    auto [it, fresh] = acc.try_emplace(r.site_id);
    Acc& a = it->second;
    if (fresh || r.time < a.first) a.first = r.time;
    if (fresh || r.time > a.last) a.last = r.time;
    a.hours.push_back(r.time);
  }
  for (auto& [id, a] : acc) {
    std::sort(a.hours.begin(), a.hours.end());
    a.hours.erase(std::unique(a.hours.begin(), a.hours.end()), a.hours.end());
  }
  std::vector<StationSummary> out;
  for (const auto& s : stations) {
    StationSummary sum{s, 0.0, 1.0};
    if (auto it = acc.find(s.site_id); it != acc.end()) {
      const double span_hours = static_cast<double>(it->second.last - it->second.first) / 60.0 + 1.0;
      sum.record_years = span_hours / (24.0 * 365.25);
      sum.missing_fraction = 1.0 - static_cast<double>(it->second.hours.size()) / span_hours;
    }
    out.push_back(sum);
  }
  return out;
}

ScreenResult screen_stations(const std::vector<StationSummary>& stations, const ScreenOptions& opts,
                             const DistanceFn& distance) {
  const DistanceFn dist = distance ? distance : [](const StationMeta& a, const StationMeta& b) {
    return geo::haversine({a.lon, a.lat}, {b.lon, b.lat});
  };
  ScreenResult out;
  std::vector<const StationSummary*> candidates;
  for (const auto& s : stations) {
    if (s.missing_fraction > opts.missing_threshold) out.excluded.push_back(s.meta.site_id);
    else candidates.push_back(&s);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const StationSummary* a, const StationSummary* b) {
    if (a->record_years != b->record_years) return a->record_years > b->record_years;
    return a->meta.site_id < b->meta.site_id;
  });
  std::vector<const StationSummary*> kept;
  for (const auto* c : candidates) {
    bool close = false;
    for (const auto* k : kept) close |= dist(c->meta, k->meta) < opts.min_sep_km;
    if (close) out.test.push_back(c->meta.site_id);
    else kept.push_back(c);
  }
  for (const auto* k : kept) out.modelled.push_back(k->meta.site_id);
  std::sort(out.modelled.begin(), out.modelled.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.excluded.begin(), out.excluded.end());
  return out;
}

}  // namespace spex::ingest
