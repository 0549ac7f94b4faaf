#include "spex/ingest/covariates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "spex/common/csv.hpp"
#include "spex/common/error.hpp"

namespace spex::ingest {
namespace {

double number(const csv::Table& t, std::size_t r, std::size_t c, const std::string& path) {
  const auto v = csv::parse_double(t.rows[r].at(c));
  if (!v) throw DataError(path + " line " + std::to_string(t.line_numbers[r]) + ": '" + t.header[c] + "' is not numeric");
  return *v;
}

int integer(const csv::Table& t, std::size_t r, std::size_t c, const std::string& path) {
  const auto v = csv::parse_long(t.rows[r].at(c));
  if (!v) throw DataError(path + " line " + std::to_string(t.line_numbers[r]) + ": '" + t.header[c] + "' is not an integer");
  return static_cast<int>(*v);
}

}  // namespace

std::vector<AnomalyRow> read_anomalies(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const std::size_t iy = t.column("year"), im = t.column("month"), ia = t.column("anomaly_C");
  std::vector<AnomalyRow> out;
  for (std::size_t r = 0; r < t.size(); ++r) out.push_back({integer(t, r, iy, path), integer(t, r, im, path), number(t, r, ia, path)});
  return out;
}

std::map<int, double> anomaly_covariate(const std::vector<AnomalyRow>& rows, const smooth::LoessOptions& opts) {
  std::vector<double> x, y;
  std::set<int> years;
  for (const auto& r : rows) {
    if (r.month < 1 || r.month > 12) throw DataError("anomaly month outside 1..12");
    x.push_back(r.year + (r.month - 0.5) / 12.0);
    y.push_back(r.anomaly);
    years.insert(r.year);
  }
  std::vector<double> targets;
  for (int yr : years) targets.push_back(yr + 0.5);
  const auto fitted = smooth::loess(x, y, targets, opts);
  std::map<int, double> out;
  std::size_t i = 0;
  for (int yr : years) out[yr] = fitted[i++];
  return out;
}

std::vector<ClimateRow> read_climate_grid(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const std::size_t ilon = t.column("lon"), ilat = t.column("lat"), im = t.column("month"), iy = t.column("year"),
                    ix = t.column("maximum");
  std::vector<ClimateRow> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    out.push_back({number(t, r, ilon, path), number(t, r, ilat, path), integer(t, r, im, path), integer(t, r, iy, path),
                   number(t, r, ix, path)});
  }
  return out;
}

std::vector<ClimateCell> climate_covariates(const std::vector<ClimateRow>& rows, int first_year, int last_year) {
  if (last_year < first_year) throw ConfigError("climate window is empty");
  const int n_years = last_year - first_year + 1;
  // (lon, lat) -> values by (year, month)
  std::map<std::pair<double, double>, std::vector<double>> grid;
  for (const auto& r : rows) {
    if (r.year < first_year || r.year > last_year) continue;
    if (r.month < 1 || r.month > 12) throw DataError("climate grid month outside 1..12");
    auto& v = grid[{r.lon, r.lat}];
    if (v.empty()) v.assign(static_cast<std::size_t>(n_years) * 12, std::numeric_limits<double>::quiet_NaN());
    v[static_cast<std::size_t>(r.year - first_year) * 12 + (r.month - 1)] = r.maximum;
  }
  if (grid.empty()) {
    throw DataError("climate grid has no data in " + std::to_string(first_year) + "-" + std::to_string(last_year));
  }
  std::vector<ClimateCell> cells;
  for (const auto& [where, v] : grid) {
    ClimateCell c;
    c.where = {where.first, where.second};
    double mean_all = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (std::isnan(v[k])) {
        throw DataError("climate cell (" + std::to_string(where.first) + ", " + std::to_string(where.second) +
                        ") lacks month " + std::to_string(k % 12 + 1) + " of " + std::to_string(first_year + static_cast<int>(k / 12)));
      }
      c.c_mu[k % 12] += v[k] / n_years;
      mean_all += v[k];
    }
    mean_all /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean_all) * (x - mean_all);
    const double var = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
    if (!(var > 0.0)) throw DataError("climate cell has zero variance; ln c_sigma^2 undefined");
    c.ln_c_sigma2 = std::log(var);
    cells.push_back(c);
  }
  // Centre c_mu over the grid, month by month.
  for (int m = 0; m < 12; ++m) {
    double mean = 0.0;
    for (const auto& c : cells) mean += c.c_mu[m];
    mean /= static_cast<double>(cells.size());
    for (auto& c : cells) c.c_mu[m] -= mean;
  }
  return cells;
}

std::size_t nearest_cell(const std::vector<ClimateCell>& cells, const geo::LonLat& p) {
  if (cells.empty()) throw DataError("no climate cells");
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double d = geo::haversine(p, cells[i].where);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

std::vector<TemperatureRow> read_temperature(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const std::size_t is = t.column("site_id"), id = t.column("date"), it = t.column("tmax_C");
  std::vector<TemperatureRow> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const std::string& d = t.rows[r].at(id);
    int y = 0, m = 0, dd = 0;
    if (std::sscanf(d.c_str(), "%d-%d-%d", &y, &m, &dd) != 3 || m < 1 || m > 12 || dd < 1 || dd > 31) {
      throw DataError(path + " line " + std::to_string(t.line_numbers[r]) + ": malformed date '" + d + "'");
    }
    out.push_back({t.rows[r].at(is), y, m, dd, number(t, r, it, path)});
  }
  return out;
}

std::array<double, 12> temperature_covariate(const std::vector<TemperatureRow>& rows) {
  std::array<double, 12> sum{}, count{};
  for (const auto& r : rows) {
    sum[r.month - 1] += r.tmax;
    count[r.month - 1] += 1.0;
  }
  std::array<double, 12> t{};
  double mean = 0.0;
  for (int m = 0; m < 12; ++m) {
    if (count[m] == 0.0) throw DataError("temperature series has no data for month " + std::to_string(m + 1));
    t[m] = sum[m] / count[m];
    mean += t[m] / 12.0;
  }
  double ss = 0.0;
  for (double v : t) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 11.0);
  if (!(sd > 0.0)) throw DataError("monthly temperatures are constant; T cannot be standardized");
  for (double& v : t) v = (v - mean) / sd;
  return t;
}

std::vector<geo::LonLat> read_coastline(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const std::size_t ilon = t.column("lon"), ilat = t.column("lat");
  std::vector<geo::LonLat> out;
  for (std::size_t r = 0; r < t.size(); ++r) out.push_back({number(t, r, ilon, path), number(t, r, ilat, path)});
  return out;
}

CellLookup cell_lookup_from_string(const std::string& name) {
  if (name == "nearest") return CellLookup::nearest;
  if (name == "idw") return CellLookup::inverse_distance;
  throw ConfigError("unknown climate lookup '" + name + "' (expected nearest or idw)");
}

std::vector<std::pair<std::size_t, double>> cell_weights(const std::vector<ClimateCell>& cells, const geo::LonLat& p,
                                                         CellLookup lookup) {
  if (lookup == CellLookup::nearest) return {{nearest_cell(cells, p), 1.0}};
  std::vector<std::pair<double, std::size_t>> by_distance;
  for (std::size_t i = 0; i < cells.size(); ++i) by_distance.push_back({geo::haversine(p, cells[i].where), i});
  const std::size_t k = std::min<std::size_t>(4, by_distance.size());
  std::partial_sort(by_distance.begin(), by_distance.begin() + k, by_distance.end());
  if (k == 0) throw DataError("no climate cells");
  if (by_distance[0].first < 1e-9) return {{by_distance[0].second, 1.0}};
  std::vector<std::pair<std::size_t, double>> out;
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double w = 1.0 / (by_distance[j].first * by_distance[j].first);
    out.push_back({by_distance[j].second, w});
    total += w;
  }
  for (auto& [i, w] : out) w /= total;
  return out;
}

void attach_covariates(gam::MaximaTable& table, const CovariateBundle& bundle, const std::vector<StationMeta>& stations) {
  std::map<std::string, const StationMeta*> meta;
  for (const auto& s : stations) meta[s.site_id] = &s;
  struct SiteCov {
    double lon, lat, alt, coast;
    std::vector<std::pair<std::size_t, double>> cells;
  };
  std::map<std::string, SiteCov> site_cov;
  for (const auto& id : table.sites()) {
    auto it = meta.find(id);
    if (it == meta.end()) throw DataError("station metadata lacks site " + id);
    const StationMeta& s = *it->second;
    const geo::LonLat p{s.lon, s.lat};
    site_cov[id] = {s.lon, s.lat, s.alt_m,
                    bundle.coastline.empty() ? std::numeric_limits<double>::quiet_NaN() : geo::distance_to_polyline(p, bundle.coastline),
                    bundle.cells.empty() ? std::vector<std::pair<std::size_t, double>>{}
                                         : cell_weights(bundle.cells, p, bundle.lookup)};
  }
  const std::size_t n = table.size();
  std::vector<double> lon(n), lat(n), alt(n), d(n), a(n), cmu(n), lcs(n), temp(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < n; ++i) {
    const SiteCov& s = site_cov.at(table.site_id[i]);
    lon[i] = s.lon;
    lat[i] = s.lat;
    alt[i] = s.alt;
    d[i] = s.coast;
    if (!bundle.anomaly.empty()) {
      auto it = bundle.anomaly.find(table.year[i]);
      if (it == bundle.anomaly.end()) throw DataError("anomaly series does not cover year " + std::to_string(table.year[i]));
      a[i] = it->second;
    } else {
      a[i] = nan;
    }
    if (!bundle.cells.empty()) {
      cmu[i] = lcs[i] = 0.0;
      for (const auto& [c, w] : s.cells) {
        cmu[i] += w * bundle.cells[c].c_mu[table.month[i] - 1];
        lcs[i] += w * bundle.cells[c].ln_c_sigma2;
      }
    } else {
      cmu[i] = lcs[i] = nan;
    }
    temp[i] = bundle.temperature ? (*bundle.temperature)[table.month[i] - 1] : nan;
  }
  table.set_column("lon", std::move(lon));
  table.set_column("lat", std::move(lat));
  table.set_column("Alt", std::move(alt));
  if (!bundle.coastline.empty()) table.set_column("D", std::move(d));
  if (!bundle.anomaly.empty()) table.set_column("A", std::move(a));
  if (!bundle.cells.empty()) {
    table.set_column("c_mu", std::move(cmu));
    table.set_column("ln_c_sigma2", std::move(lcs));
  }
  if (bundle.temperature) table.set_column("T", std::move(temp));
}

}  // namespace spex::ingest
