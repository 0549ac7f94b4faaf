#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "spex/common/csv.hpp"
#include "spex/common/error.hpp"
#include "spex/common/log.hpp"
#include "spex/empirical/chi.hpp"
#include "spex/empirical/uniformity.hpp"
#include "spex/evd/gev.hpp"
#include "spex/gam/cv.hpp"
#include "spex/gam/fit.hpp"
#include "spex/geo/dem.hpp"
#include "spex/ingest/blockmax.hpp"
#include "spex/ingest/covariates.hpp"
#include "spex/ingest/hourly.hpp"
#include "spex/ingest/screen.hpp"
#include "spex/maxid/chi.hpp"
#include "spex/maxid/fit.hpp"
#include "spex/sim/simulate.hpp"

namespace spex::cli {
namespace {

using nlohmann::json;
using K = Key::Kind;

bool has(const json& cfg, const std::string& key) { return cfg.contains(key) && !cfg.at(key).is_null(); }
std::string str(const json& cfg, const std::string& key) { return cfg.at(key).get<std::string>(); }
double num(const json& cfg, const std::string& key) { return cfg.at(key).get<double>(); }
int integer(const json& cfg, const std::string& key) { return cfg.at(key).get<int>(); }
bool flag(const json& cfg, const std::string& key) { return cfg.at(key).get<bool>(); }

std::set<std::string> sentinel_set(const json& cfg) {
  std::set<std::string> s;
  for (const auto& v : cfg.at("sentinels")) s.insert(v.get<std::string>());
  return s;
}

void write_table(const Output& out, const std::string& name, const gam::MaximaTable& table) {
  auto f = out.open(name);
  table.write_csv(f, out.header_lines());
  if (!f) throw DataError("write failed for " + out.path(name));
}

// ---------------------------------------------------------------- sites

struct Sites {
  std::vector<std::string> ids;
  std::vector<geo::LonLat> where;
  std::vector<double> alt;
};

Sites read_sites(const std::string& path) {
  Sites s;
  for (const auto& m : ingest::read_stations(path)) {
    s.ids.push_back(m.site_id);
    s.where.push_back({m.lon, m.lat});
    s.alt.push_back(m.alt_m);
  }
  return s;
}

Eigen::MatrixXd site_distances(const std::vector<geo::LonLat>& where, const json& cfg) {
  const Eigen::Index n = static_cast<Eigen::Index>(where.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  std::optional<geo::Dem> dem;
  if (has(cfg, "dem")) {
    const std::string path = str(cfg, "dem");
    const bool ascii = path.size() > 4 && (path.ends_with(".asc") || path.ends_with(".ASC"));
    dem = ascii ? geo::Dem::read_esri_ascii(path) : geo::Dem::read_csv(path);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double v = dem ? geo::topo_distance(where[j], where[k], *dem, num(cfg, "dem_step_km"))
                           : geo::haversine(where[j], where[k]);
      d(j, k) = d(k, j) = v;
    }
  }
  return d;
}

maxid::MonthlyCovariate read_monthly_covariate(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const std::size_t im = t.column("month"), iv = t.column("T");
  maxid::MonthlyCovariate c{};
  std::array<bool, 12> seen{};
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto m = csv::parse_long(t.rows[r][im]);
    const auto v = csv::parse_double(t.rows[r][iv]);
    if (!m || *m < 1 || *m > 12 || !v) throw DataError(path + ": malformed row at line " + std::to_string(t.line_numbers[r]));
    c[*m - 1] = *v;
    seen[*m - 1] = true;
  }
  for (int m = 0; m < 12; ++m) {
    if (!seen[m]) throw DataError(path + ": no value for month " + std::to_string(m + 1));
  }
  return c;
}

std::vector<std::vector<std::string>> covariate_rows(const maxid::MonthlyCovariate& c) {
  std::vector<std::vector<std::string>> rows;
  for (int m = 0; m < 12; ++m) rows.push_back({fmt(m + 1), fmt(c[m])});
  return rows;
}

// ---------------------------------------------------------------- uniform panel

struct PanelData {
  maxid::UniformPanel panel;
  Eigen::MatrixXd distances;
  std::vector<geo::LonLat> where;
};

PanelData load_panel(const json& cfg) {
  const Sites sites = read_sites(str(cfg, "sites"));
  const csv::Table t = csv::read_file(str(cfg, "uniform"));
  const std::size_t is = t.column("site_id"), im = t.column("month"), iy = t.column("year"), iu = t.column("u");
  std::map<std::string, std::size_t> site_index;
  for (std::size_t i = 0; i < sites.ids.size(); ++i) site_index[sites.ids[i]] = i;
  std::set<std::pair<int, int>> times;
  std::set<std::string> present;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto y = csv::parse_long(t.rows[r][iy]);
    const auto m = csv::parse_long(t.rows[r][im]);
    if (!y || !m || *m < 1 || *m > 12) throw DataError("uniform table: bad month/year at line " + std::to_string(t.line_numbers[r]));
    times.insert({static_cast<int>(*y), static_cast<int>(*m)});
    if (!site_index.count(t.rows[r][is])) throw DataError("uniform table: site " + t.rows[r][is] + " is not in the sites file");
    present.insert(t.rows[r][is]);
  }
  PanelData pd;
  std::map<std::string, Eigen::Index> col;
  for (std::size_t i = 0; i < sites.ids.size(); ++i) {
    if (!present.count(sites.ids[i])) continue;
    col[sites.ids[i]] = static_cast<Eigen::Index>(pd.panel.site_ids.size());
    pd.panel.site_ids.push_back(sites.ids[i]);
    pd.where.push_back(sites.where[i]);
  }
  std::map<std::pair<int, int>, Eigen::Index> row;
  for (const auto& ym : times) {
    row[ym] = static_cast<Eigen::Index>(pd.panel.years.size());
    pd.panel.years.push_back(ym.first);
    pd.panel.months.push_back(ym.second);
  }
  pd.panel.u = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(times.size()),
                                         static_cast<Eigen::Index>(pd.panel.site_ids.size()),
                                         std::numeric_limits<double>::quiet_NaN());
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto u = csv::parse_double(t.rows[r][iu]);
    if (!u) continue;
    const std::pair<int, int> ym{static_cast<int>(*csv::parse_long(t.rows[r][iy])),
                                 static_cast<int>(*csv::parse_long(t.rows[r][im]))};
    double& cell = pd.panel.u(row.at(ym), col.at(t.rows[r][is]));
    if (!std::isnan(cell)) throw DataError("uniform table: duplicate row for " + t.rows[r][is]);
    cell = *u;
  }
  pd.panel.validate_and_nudge();
  pd.distances = site_distances(pd.where, cfg);
  return pd;
}

std::vector<std::vector<std::string>> distance_rows(const PanelData& pd) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < pd.panel.sites(); ++j) {
    for (std::size_t k = j + 1; k < pd.panel.sites(); ++k) {
      rows.push_back({pd.panel.site_ids[j], pd.panel.site_ids[k],
                      fmt(pd.distances(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)))});
    }
  }
  return rows;
}

struct Season {
  std::string name;
  std::set<int> months;
};

const std::vector<Season>& seasons() {
  static const std::vector<Season> s{{"DJF", {12, 1, 2}}, {"MAM", {3, 4, 5}}, {"JJA", {6, 7, 8}}, {"SON", {9, 10, 11}}};
  return s;
}

struct DependenceModel {
  maxid::MaxIdParams params;
  int nodes = 60;
  bool seasonal = false;
};

DependenceModel read_dependence(const std::string& path) {
  const json j = read_json(path, "fit");
  DependenceModel d;
  d.params = maxid::params_from_json(j.at("params"));
  if (j.contains("settings")) {
    d.nodes = j.at("settings").value("angular_nodes", 60);
    d.seasonal = j.at("settings").value("seasonal", false);
  }
  return d;
}

maxid::MonthlyCovariate model_covariate(const json& cfg, const DependenceModel& dep) {
  if (has(cfg, "covariate")) return read_monthly_covariate(str(cfg, "covariate"));
  if (dep.seasonal) throw ConfigError("a seasonal dependence model needs the monthly covariate file");
  return {};
}

// ---------------------------------------------------------------- marginal

std::vector<gam::ModelFormula> read_formulas(const std::string& path) {
  return gam::formulas_from_json(read_json(path));
}

gam::GamFitOptions gam_options(const json& cfg) {
  gam::GamFitOptions o;
  o.default_smoothing = num(cfg, "default_smoothing");
  if (has(cfg, "smoothing")) o.smoothing = cfg.at("smoothing").get<std::vector<double>>();
  if (cfg.contains("max_iterations")) o.max_iterations = integer(cfg, "max_iterations");
  return o;
}

gam::MaximaTable read_maxima(const json& cfg) {
  gam::MaximaTable t = gam::MaximaTable::read_csv(str(cfg, "maxima"));
  t.validate();
  return t;
}

gam::MarginalFit read_marginal(const json& cfg) { return gam::MarginalFit::from_json(read_json(str(cfg, "fit"), "fit")); }

// ---------------------------------------------------------------- commands

void run_ingest(const json& cfg, Output& out) {
  const auto stations = ingest::read_stations(str(cfg, "stations"));
  const auto data = ingest::read_hourly(str(cfg, "hourly"), sentinel_set(cfg));
  for (const auto& e : data.errors) log::warn("hourly line ", e.line, ": ", e.message);
  const auto summaries = ingest::summarize_stations(stations, data.records);
  ingest::ScreenOptions so;
  so.missing_threshold = num(cfg, "missing_threshold");
  so.min_sep_km = num(cfg, "min_sep_km");
  const auto screen = ingest::screen_stations(summaries, so);

  std::map<std::string, std::string> status;
  for (const auto& id : screen.modelled) status[id] = "modelled";
  for (const auto& id : screen.test) status[id] = "test";
  for (const auto& id : screen.excluded) status[id] = "excluded";
  std::vector<std::vector<std::string>> rows, kept;
  for (const auto& s : summaries) {
    const std::string& st = status.at(s.meta.site_id);
    rows.push_back({s.meta.site_id, fmt(s.meta.lon), fmt(s.meta.lat), fmt(s.meta.alt_m), fmt(s.record_years),
                    fmt(s.missing_fraction), st});
    if (st == "modelled") kept.push_back({s.meta.site_id, fmt(s.meta.lon), fmt(s.meta.lat), fmt(s.meta.alt_m)});
  }
  out.csv("stations_screened.csv", {"site_id", "lon", "lat", "alt_m", "record_years", "missing_fraction", "status"}, rows);
  out.csv("stations_modelled.csv", {"site_id", "lon", "lat", "alt_m"}, kept);

  std::vector<const ingest::HourlyRecord*> recs;
  for (const auto& r : data.records) {
    auto it = status.find(r.site_id);
    if (it != status.end() && it->second == "modelled") recs.push_back(&r);
  }
  std::stable_sort(recs.begin(), recs.end(), [](const auto* a, const auto* b) {
    return a->site_id != b->site_id ? a->site_id < b->site_id : a->time < b->time;
  });
  std::vector<std::vector<std::string>> hourly;
  for (const auto* r : recs) {
    hourly.push_back({r->site_id, ingest::format_timestamp(r->time), r->precip ? fmt(*r->precip) : std::string{}});
  }
  out.csv("hourly_clean.csv", {"site_id", "timestamp", "precip_mm"}, hourly);
  std::vector<std::vector<std::string>> errors;
  for (const auto& e : data.errors) errors.push_back({fmt(e.line), e.message});
  out.csv("ingest_errors.csv", {"line", "message"}, errors);
}

void run_blockmax(const json& cfg, Output& out) {
  auto data = ingest::read_hourly(str(cfg, "hourly"), sentinel_set(cfg));
  for (const auto& e : data.errors) log::warn("hourly line ", e.line, ": ", e.message);
  ingest::BlockMaxOptions o;
  o.day_start_hour = integer(cfg, "day_start_hour");
  o.day_coverage = num(cfg, "day_coverage");
  const auto res = ingest::block_maxima(std::move(data.records), o);
  gam::MaximaTable table;
  for (const auto& m : res.retained) table.add_row(m.site_id, m.month, m.year, m.maximum);
  write_table(out, "maxima.csv", table);
  std::vector<std::vector<std::string>> omitted;
  for (const auto& m : res.omitted) {
    omitted.push_back({m.site_id, fmt(m.year), fmt(m.month), fmt(m.observed_days), fmt(m.days_in_month)});
  }
  out.csv("blockmax_omitted.csv", {"site_id", "year", "month", "observed_days", "days_in_month"}, omitted);
  std::vector<std::vector<std::string>> dups;
  for (const auto& d : res.duplicates) dups.push_back({fmt(d.line), d.message});
  out.csv("blockmax_duplicates.csv", {"line", "message"}, dups);
}

void run_covariates(const json& cfg, Output& out) {
  gam::MaximaTable table = read_maxima(cfg);
  const auto stations = ingest::read_stations(str(cfg, "stations"));
  ingest::CovariateBundle bundle;
  if (has(cfg, "anomaly")) {
    smooth::LoessOptions lo;
    lo.span = num(cfg, "loess_span");
    lo.degree = integer(cfg, "loess_degree");
    bundle.anomaly = ingest::anomaly_covariate(ingest::read_anomalies(str(cfg, "anomaly")), lo);
  }
  if (has(cfg, "climate")) {
    bundle.cells = ingest::climate_covariates(ingest::read_climate_grid(str(cfg, "climate")),
                                              integer(cfg, "climate_first_year"), integer(cfg, "climate_last_year"));
    bundle.lookup = ingest::cell_lookup_from_string(str(cfg, "climate_lookup"));
  }
  if (has(cfg, "temperature")) bundle.temperature = ingest::temperature_covariate(ingest::read_temperature(str(cfg, "temperature")));
  if (has(cfg, "coastline")) bundle.coastline = ingest::read_coastline(str(cfg, "coastline"));
  ingest::attach_covariates(table, bundle, stations);
  write_table(out, "maxima_covariates.csv", table);
  if (bundle.temperature) out.csv("covariate.csv", {"month", "T"}, covariate_rows(*bundle.temperature));
  if (!bundle.anomaly.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [y, a] : bundle.anomaly) rows.push_back({fmt(y), fmt(a)});
    out.csv("anomaly_smoothed.csv", {"year", "A"}, rows);
  }
}

void run_fit_marginal(const json& cfg, Output& out) {
  const gam::MaximaTable table = read_maxima(cfg);
  const auto formulas = read_formulas(str(cfg, "formula"));
  const gam::ModelFormula* chosen = nullptr;
  if (has(cfg, "model")) {
    for (const auto& f : formulas) {
      if (f.name == str(cfg, "model")) chosen = &f;
    }
    if (!chosen) throw ConfigError("model '" + str(cfg, "model") + "' is not in the formula file");
  } else {
    if (formulas.size() != 1) throw ConfigError("the formula file holds several models; choose one with --model");
    chosen = &formulas.front();
  }
  try {
    const auto fit = gam::fit_marginal(*chosen, table, gam_options(cfg));
    out.json("marginal_fit.json", "fit", fit.to_json());
  } catch (const gam::MarginalNonConvergence& e) {
    out.json("marginal_fit.json", "fit", e.best().to_json());
    throw;
  }
}

gam::FoldAssignment folds_for(const json& cfg, const gam::MaximaTable& table) {
  return gam::make_folds(table, integer(cfg, "n_spatial"), integer(cfg, "n_temporal"),
                         static_cast<std::uint64_t>(cfg.at("seed").get<std::int64_t>()));
}

void write_folds(Output& out, const gam::MaximaTable& table, const gam::FoldAssignment& folds) {
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    rows.push_back({table.site_id[i], fmt(table.month[i]), fmt(table.year[i]), fmt(folds.spatial[i]),
                    fmt(folds.temporal[i]), fmt(folds.fold[i])});
  }
  out.csv("cv_folds.csv", {"site_id", "month", "year", "spatial", "temporal", "fold"}, rows);
}

void run_cv(const json& cfg, Output& out) {
  const gam::MaximaTable table = read_maxima(cfg);
  const auto formulas = read_formulas(str(cfg, "formulas"));
  const auto folds = folds_for(cfg, table);
  const auto opts = gam_options(cfg);
  std::vector<std::vector<std::string>> rows;
  for (const auto& f : formulas) {
    const auto s = gam::cv_score(f, table, folds, opts);
    rows.push_back({f.name, fmt(s.nll), fmt(s.crps), fmt(s.valid_folds), fmt(s.skipped_folds)});
  }
  out.csv("cv.csv", {"model", "nLL", "CRPS", "valid_folds", "skipped_folds"}, rows);
  write_folds(out, table, folds);
}

void run_select(const json& cfg, Output& out) {
  const gam::MaximaTable table = read_maxima(cfg);
  const auto formulas = read_formulas(str(cfg, "formulas"));
  const auto folds = folds_for(cfg, table);
  const auto ranked = gam::forward_select(formulas, table, folds, gam_options(cfg), flag(cfg, "tune_smoothing"));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    rows.push_back({fmt(i + 1), r.model, fmt(r.nll), fmt(r.crps), fmt(static_cast<long long>(r.columns)),
                    fmt(r.valid_folds), fmt(r.smoothing)});
  }
  out.csv("selection.csv", {"rank", "model", "nLL", "CRPS", "columns", "valid_folds", "smoothing"}, rows);
  write_folds(out, table, folds);
}

void run_transform_uniform(const json& cfg, Output& out) {
  const gam::MaximaTable table = read_maxima(cfg);
  const auto fit = read_marginal(cfg);
  const auto params = fit.predict(table);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    rows.push_back({table.site_id[i], fmt(table.month[i]), fmt(table.year[i]), fmt(evd::pit(table.maximum[i], params[i]))});
  }
  out.csv("uniform.csv", {"site_id", "month", "year", "u"}, rows);
}

void run_fit_dependence(const json& cfg, Output& out) {
  const PanelData pd = load_panel(cfg);
  maxid::DependenceOptions o;
  o.seasonal = flag(cfg, "seasonal");
  o.estimate_nu = flag(cfg, "estimate_nu");
  o.nu = num(cfg, "nu");
  o.angular_nodes = integer(cfg, "angular_nodes");
  o.max_iterations = integer(cfg, "max_iterations");
  maxid::MonthlyCovariate cov{};
  if (has(cfg, "covariate")) cov = read_monthly_covariate(str(cfg, "covariate"));
  else if (o.seasonal) throw ConfigError("a seasonal fit needs the monthly covariate file (--covariate)");
  const double cutoff = has(cfg, "pair_cutoff_km") ? num(cfg, "pair_cutoff_km") : std::numeric_limits<double>::infinity();
  out.csv("distances.csv", {"site_j", "site_k", "distance_km"}, distance_rows(pd));
  const maxid::PairwiseLikelihood pll(pd.panel, maxid::PairSet::all(pd.distances, cutoff), cov, o.angular_nodes);
  const auto fit = maxid::fit_dependence(pll, o);
  json j = fit.to_json();
  j["settings"] = {{"seasonal", o.seasonal},
                   {"estimate_nu", o.estimate_nu},
                   {"angular_nodes", o.angular_nodes},
                   {"sites", pd.panel.sites()},
                   {"times", pd.panel.times()},
                   {"pairs", pll.pairs().size()},
                   {"observations", pll.observations()}};
  out.json("dependence_fit.json", "fit", j);
}

std::vector<std::vector<std::string>> model_chi_rows(const DependenceModel& dep, const maxid::MonthlyCovariate& cov,
                                                     double q, double d_max, int points) {
  std::vector<std::vector<std::string>> rows;
  for (int m = 1; m <= 12; ++m) {
    for (double qq : {q, maxid::kLimitingQ}) {
      for (int i = 0; i < points; ++i) {
        const double d = d_max * i / (points - 1);
        rows.push_back({fmt(m), fmt(qq), fmt(d), fmt(maxid::model_chi(d, cov[m - 1], dep.params, qq, dep.nodes))});
      }
    }
  }
  return rows;
}

std::vector<empirical::ChiCurve> empirical_curves(const PanelData& pd, double q, int bins, bool by_season) {
  std::vector<empirical::ChiCurve> curves{empirical::binned_chi(pd.panel.u, pd.distances, q, bins)};
  if (by_season) {
    // A season too short for chi is skipped; the all-season curve is not.
    for (const auto& s : seasons()) {
      try {
        curves.push_back(empirical::binned_chi(pd.panel.u, pd.distances, q, bins, pd.panel.months, s.months, s.name));
      } catch (const DataError& e) {
        log::warn("season ", s.name, " skipped: ", e.what());
      }
    }
  }
  return curves;
}

void run_chi(const json& cfg, Output& out) {
  const PanelData pd = load_panel(cfg);
  const double q = num(cfg, "q");
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : empirical_curves(pd, q, integer(cfg, "n_bins"), flag(cfg, "by_season"))) {
    for (const auto& b : c.bins) {
      rows.push_back({c.season, fmt(c.q), fmt(b.distance), fmt(b.d_min), fmt(b.d_max), fmt(b.mean), fmt(b.lower),
                      fmt(b.upper), fmt(b.n_pairs)});
    }
  }
  out.csv("chi_empirical.csv", {"season", "q", "distance_km", "d_min_km", "d_max_km", "chi", "lower", "upper", "n_pairs"}, rows);
  if (has(cfg, "dependence")) {
    const DependenceModel dep = read_dependence(str(cfg, "dependence"));
    const auto cov = model_covariate(cfg, dep);
    out.csv("chi_model.csv", {"month", "q", "distance_km", "chi"},
            model_chi_rows(dep, cov, q, pd.distances.maxCoeff(), integer(cfg, "grid_points")));
  }
}

// Rows of `table` for each (site, month) with covariates frozen at `year`.
gam::MaximaTable frozen_year(const gam::MaximaTable& table, int year, const std::map<int, double>& anomaly) {
  std::map<std::pair<std::string, int>, std::size_t> exact, any;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::pair<std::string, int> key{table.site_id[i], table.month[i]};
    any.emplace(key, i);
    if (table.year[i] == year) exact.emplace(key, i);
  }
  gam::MaximaTable out;
  for (const auto& [key, first] : any) {
    std::size_t i = first;
    bool borrowed = false;
    if (auto it = exact.find(key); it != exact.end()) {
      i = it->second;
    } else if (!anomaly.empty()) {
      borrowed = true;
    } else {
      throw DataError("no row for site " + key.first + ", month " + std::to_string(key.second) + " in year " +
                      std::to_string(year) + "; pass the anomaly series to freeze covariates at that year");
    }
    std::map<std::string, double> extra;
    for (const auto& [name, col] : table.columns) {
      if (name != "month" && name != "year") extra[name] = col[i];
    }
    if (borrowed) {
      auto a = anomaly.find(year);
      if (a == anomaly.end()) throw DataError("anomaly series does not cover year " + std::to_string(year));
      extra["A"] = a->second;
    }
    out.add_row(key.first, key.second, year, table.maximum[i], extra);
  }
  return out;
}

void run_return_levels(const json& cfg, Output& out) {
  const gam::MaximaTable table = read_maxima(cfg);
  const auto fit = read_marginal(cfg);
  std::map<int, double> anomaly;
  if (has(cfg, "anomaly")) anomaly = ingest::anomaly_covariate(ingest::read_anomalies(str(cfg, "anomaly")));
  const int y0 = integer(cfg, "base_year"), y1 = integer(cfg, "target_year");
  const auto base = frozen_year(table, y0, anomaly);
  const auto target = frozen_year(table, y1, anomaly);
  const auto p0 = fit.predict(base);
  const auto p1 = fit.predict(target);
  evd::ReturnSpec spec;
  spec.period_years = integer(cfg, "period_years");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double r0 = evd::return_level(spec, p0[i]);
    const double r1 = evd::return_level(spec, p1[i]);
    rows.push_back({base.site_id[i], fmt(base.month[i]), fmt(y0), fmt(y1), fmt(r0), fmt(r1), fmt(evd::relative_change(r0, r1))});
  }
  out.csv("return_levels.csv",
          {"site_id", "month", "base_year", "target_year", "return_level_base", "return_level_target", "relative_change_pct"},
          rows);
}

void run_simulate(const json& cfg, Output& out) {
  const auto seed = static_cast<std::uint64_t>(cfg.at("seed").get<std::int64_t>());
  const int n_sites = integer(cfg, "n_sites");
  const int years = integer(cfg, "years");
  if (n_sites < 2 || years < 1) throw ConfigError("simulate needs at least 2 sites and 1 year");
  const double side = num(cfg, "side_km");
  const auto plane = sim::SiteLayout::random_square(static_cast<std::size_t>(n_sites), side, seed);
  const double lon0 = num(cfg, "center_lon"), lat0 = num(cfg, "center_lat");
  const double km_per_deg = geo::kEarthRadiusKm * std::numbers::pi / 180.0;
  std::vector<geo::LonLat> where;
  for (std::size_t i = 0; i < plane.size(); ++i) {
    const double lat = lat0 + (plane.y[i] - side / 2) / km_per_deg;
    const double lon = lon0 + (plane.x[i] - side / 2) / (km_per_deg * std::cos(lat0 * std::numbers::pi / 180.0));
    where.push_back({lon, lat});
  }
  sim::SiteLayout layout = sim::SiteLayout::geographic(where);
  layout.ids = plane.ids;

  maxid::MonthlyCovariate cov{};
  if (has(cfg, "covariate")) {
    cov = read_monthly_covariate(str(cfg, "covariate"));
  } else {
    // Warm-season peak in July, standardized over the 12 months.
    double mean = 0.0, ss = 0.0;
    for (int m = 0; m < 12; ++m) {
      cov[m] = -std::cos(2.0 * std::numbers::pi * m / 12.0);
      mean += cov[m] / 12.0;
    }
    for (double v : cov) ss += (v - mean) * (v - mean);
    for (double& v : cov) v = (v - mean) / std::sqrt(ss / 11.0);
  }
  const std::size_t n = static_cast<std::size_t>(years) * 12;
  std::vector<double> t(n);
  for (std::size_t r = 0; r < n; ++r) t[r] = cov[r % 12];

  maxid::MaxIdParams p;
  p.alpha0_beta = std::log(num(cfg, "beta"));
  p.alpha1_beta = num(cfg, "alpha1_beta");
  p.alpha0_lambda = std::log(num(cfg, "lambda_km"));
  p.alpha1_lambda = num(cfg, "alpha1_lambda");
  p.nu = num(cfg, "nu");
  p.validate();
  const std::uint64_t field_seed = seed ^ 0x9e3779b97f4a7c15ULL;
  Eigen::MatrixXd u;
  const std::string field = str(cfg, "field");
  if (field == "maxid") {
    sim::MaxIdSimOptions so;
    so.eps = num(cfg, "eps");
    so.angular_nodes = integer(cfg, "angular_nodes");
    u = sim::sim_maxid(layout, p, t, n, field_seed, so).u;
  } else if (field == "gauss") {
    const Eigen::MatrixXd g = sim::sim_gauss(layout, num(cfg, "lambda_km"), p.nu, n, field_seed);
    u = g.unaryExpr([](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); });
  } else {
    throw ConfigError("field must be 'maxid' or 'gauss'");
  }

  const double mu = num(cfg, "mu"), sigma = num(cfg, "sigma"), xi = num(cfg, "xi"), amp = num(cfg, "mu_seasonal");
  const int y0 = integer(cfg, "start_year");
  gam::MaximaTable table;
  std::vector<std::vector<std::string>> urows;
  for (std::size_t r = 0; r < n; ++r) {
    const int month = static_cast<int>(r % 12) + 1;
    const int year = y0 + static_cast<int>(r / 12);
    const evd::GevParams gp{mu + amp * cov[month - 1], sigma, xi};
    for (std::size_t s = 0; s < layout.size(); ++s) {
      const double uu = std::clamp(u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)), 1e-15, 1.0 - 1e-15);
      table.add_row(layout.ids[s], month, year, std::max(0.0, evd::gev_quantile(uu, gp)),
                    {{"lon", where[s].lon}, {"lat", where[s].lat}, {"T", cov[month - 1]}});
      urows.push_back({layout.ids[s], fmt(month), fmt(year), fmt(uu)});
    }
  }
  write_table(out, "maxima.csv", table);
  out.csv("uniform_truth.csv", {"site_id", "month", "year", "u"}, urows);
  std::vector<std::vector<std::string>> srows;
  for (std::size_t s = 0; s < layout.size(); ++s) srows.push_back({layout.ids[s], fmt(where[s].lon), fmt(where[s].lat), "0"});
  out.csv("sites.csv", {"site_id", "lon", "lat", "alt_m"}, srows);
  out.csv("covariate.csv", {"month", "T"}, covariate_rows(cov));
  out.json("truth.json", "truth",
           {{"field", field}, {"params", maxid::params_to_json(p)}, {"margin", {{"mu", mu}, {"sigma", sigma}, {"xi", xi}, {"mu_seasonal", amp}}}});
}

void run_diagnose(const json& cfg, Output& out) {
  const gam::MaximaTable table = read_maxima(cfg);
  const auto fit = read_marginal(cfg);
  const auto params = fit.predict(table);
  std::vector<double> all;
  std::map<std::string, std::vector<double>> by_site;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double u = evd::pit(table.maximum[i], params[i]);
    all.push_back(u);
    by_site[table.site_id[i]].push_back(u);
  }
  std::vector<std::vector<std::string>> rows;
  auto add = [&](const std::string& scope, const std::vector<double>& u) {
    const auto ks = empirical::ks_uniform(u);
    rows.push_back({scope, fmt(ks.n), fmt(ks.statistic), fmt(ks.p_value)});
  };
  add("all", all);
  for (const auto& [site, u] : by_site) add(site, u);
  out.csv("pit_uniformity.csv", {"scope", "n", "ks_statistic", "p_value"}, rows);

  const int bins = integer(cfg, "pit_bins");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double u : all) counts[std::min<std::size_t>(static_cast<std::size_t>(u * bins), static_cast<std::size_t>(bins - 1))]++;
  std::vector<std::vector<std::string>> hist;
  for (int b = 0; b < bins; ++b) {
    hist.push_back({fmt(b + 1), fmt(static_cast<double>(b) / bins), fmt(static_cast<double>(b + 1) / bins),
                    fmt(counts[static_cast<std::size_t>(b)]), fmt(static_cast<double>(all.size()) / bins)});
  }
  out.csv("pit_histogram.csv", {"bin", "lower", "upper", "count", "expected"}, hist);

  const bool overlay = has(cfg, "uniform") && has(cfg, "sites") && has(cfg, "dependence");
  if (!overlay) {
    if (has(cfg, "uniform") || has(cfg, "dependence")) log::warn("chi overlay needs uniform, sites and dependence; skipped");
    return;
  }
  const PanelData pd = load_panel(cfg);
  const DependenceModel dep = read_dependence(str(cfg, "dependence"));
  const auto cov = model_covariate(cfg, dep);
  const double q = num(cfg, "q");
  std::vector<std::vector<std::string>> chi_rows;
  for (const auto& c : empirical_curves(pd, q, integer(cfg, "n_bins"), true)) {
    std::vector<int> months;
    if (c.season == "all") {
      for (int m = 1; m <= 12; ++m) months.push_back(m);
    } else {
      for (const auto& s : seasons()) {
        if (s.name == c.season) months.assign(s.months.begin(), s.months.end());
      }
    }
    for (const auto& b : c.bins) {
      double model = 0.0;
      for (int m : months) model += maxid::model_chi(b.distance, cov[m - 1], dep.params, q, dep.nodes);
      model /= static_cast<double>(months.size());
      chi_rows.push_back({c.season, fmt(b.distance), fmt(b.mean), fmt(b.lower), fmt(b.upper), fmt(model), fmt(b.n_pairs)});
    }
  }
  out.csv("chi_overlay.csv", {"season", "distance_km", "chi_empirical", "lower", "upper", "chi_model", "n_pairs"}, chi_rows);
}

Key req(std::string name, K kind, std::string help) { return {std::move(name), kind, std::move(help), nullptr, true}; }
Key opt(std::string name, K kind, std::string help, json fallback = nullptr) {
  return {std::move(name), kind, std::move(help), std::move(fallback), false};
}

const json kSentinels = json::array({"", "-999"});

std::vector<Key> dependence_inputs() {
  return {req("uniform", K::string, "uniform-scale table (site_id,month,year,u)"),
          req("sites", K::string, "site coordinates (site_id,lon,lat,alt_m)"),
          opt("dem", K::string, "DEM (.asc ESRI grid or lon,lat,elev CSV) for topographic distance"),
          opt("dem_step_km", K::number, "profile sampling step (km)", 0.1)};
}

std::vector<Key> concat(std::vector<Key> a, const std::vector<Key>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

std::vector<Command> commands() {
  std::vector<Command> c;
  c.push_back({"ingest", "screen stations and keep the hourly records of modelled stations",
               {req("hourly", K::string, "hourly CSV (site_id,timestamp,precip_mm)"),
                req("stations", K::string, "station metadata CSV (site_id,lon,lat,alt_m)"),
                opt("missing_threshold", K::number, "exclude stations with a larger missing fraction", 0.2),
                opt("min_sep_km", K::number, "stations closer than this to a longer record go to the test set", 5.0),
                opt("sentinels", K::list, "precipitation values meaning missing", kSentinels)},
               run_ingest});
  c.push_back({"blockmax", "monthly maxima with the day-coverage rule",
               {req("hourly", K::string, "hourly CSV (site_id,timestamp,precip_mm)"),
                opt("day_start_hour", K::integer, "hour at which a day starts", 9),
                opt("day_coverage", K::number, "minimum fraction of observed days in a month", 0.8),
                opt("sentinels", K::list, "precipitation values meaning missing", kSentinels)},
               run_blockmax});
  c.push_back({"covariates", "attach covariate columns to a maxima table",
               {req("maxima", K::string, "maxima CSV"), req("stations", K::string, "station metadata CSV"),
                opt("anomaly", K::string, "temperature anomaly CSV (year,month,anomaly_C)"),
                opt("climate", K::string, "climate-model grid CSV (lon,lat,month,year,maximum)"),
                opt("temperature", K::string, "station temperature CSV (site_id,date,tmax_C)"),
                opt("coastline", K::string, "coastline polyline CSV (lon,lat)"),
                opt("climate_first_year", K::integer, "first year of the climate window", 1981),
                opt("climate_last_year", K::integer, "last year of the climate window", 2005),
                opt("climate_lookup", K::string, "nearest or idw (four nearest cells, 1/d^2 weights)", "nearest"),
                opt("loess_span", K::number, "LOESS span for the anomaly", 0.75),
                opt("loess_degree", K::integer, "LOESS degree for the anomaly", 2)},
               run_covariates});
  const std::vector<Key> gam_keys{opt("default_smoothing", K::number, "smoothing parameter for every penalized block", 1.0),
                                  opt("smoothing", K::list, "per-block smoothing parameters"),
                                  opt("max_iterations", K::integer, "optimizer iteration limit", 500)};
  c.push_back({"fit-marginal", "fit one GEV additive model",
               concat({req("maxima", K::string, "maxima CSV with covariates"),
                       req("formula", K::string, "formula JSON (one model or a list)"),
                       opt("model", K::string, "model name when the file holds several")},
                      gam_keys),
               run_fit_marginal});
  const std::vector<Key> cv_keys{req("maxima", K::string, "maxima CSV with covariates (needs lon, lat)"),
                                 req("formulas", K::string, "candidate formulas JSON"),
                                 opt("n_spatial", K::integer, "spatial clusters", 4),
                                 opt("n_temporal", K::integer, "temporal clusters", 3),
                                 opt("seed", K::integer, "k-means seed", 1)};
  c.push_back({"cv", "cross-validated nLL and CRPS per candidate model", concat(cv_keys, gam_keys), run_cv});
  c.push_back({"select", "rank candidate models by CV",
               concat(concat(cv_keys, gam_keys), {opt("tune_smoothing", K::boolean, "choose a shared smoothing per model", false)}),
               run_select});
  c.push_back({"transform-uniform", "probability integral transform through a marginal fit",
               {req("maxima", K::string, "maxima CSV with covariates"), req("fit", K::string, "marginal fit JSON")},
               run_transform_uniform});
  c.push_back({"fit-dependence", "fit the max-id dependence model by pairwise likelihood",
               concat(dependence_inputs(),
                      {opt("covariate", K::string, "monthly covariate CSV (month,T)"),
                       opt("seasonal", K::boolean, "let beta and lambda depend on the covariate", false),
                       opt("estimate_nu", K::boolean, "estimate the smoothness nu", false),
                       opt("nu", K::number, "fixed smoothness", 1.0),
                       opt("angular_nodes", K::integer, "Gauss-Legendre nodes for the exponent function", 60),
                       opt("pair_cutoff_km", K::number, "zero weight for pairs farther apart"),
                       opt("max_iterations", K::integer, "optimizer iteration limit", 200)}),
               run_fit_dependence});
  c.push_back({"chi", "empirical and model chi curves",
               concat(dependence_inputs(),
                      {opt("dependence", K::string, "dependence fit JSON for the model curves"),
                       opt("covariate", K::string, "monthly covariate CSV (month,T)"),
                       opt("q", K::number, "quantile level", 0.98), opt("n_bins", K::integer, "distance bins", 35),
                       opt("by_season", K::boolean, "also compute DJF/MAM/JJA/SON curves", true),
                       opt("grid_points", K::integer, "distances per model curve", 50)}),
               run_chi});
  c.push_back({"return-levels", "effective return levels and their relative change",
               {req("maxima", K::string, "maxima CSV with covariates"), req("fit", K::string, "marginal fit JSON"),
                req("base_year", K::integer, "reference year"), req("target_year", K::integer, "comparison year"),
                opt("period_years", K::integer, "return period", 100),
                opt("anomaly", K::string, "anomaly CSV used when a year has no rows")},
               run_return_levels});
  c.push_back({"simulate", "synthetic maxima with max-id or Gaussian dependence",
               {opt("seed", K::integer, "random seed", 1), opt("n_sites", K::integer, "number of sites", 25),
                opt("side_km", K::number, "side of the square domain", 100.0),
                opt("center_lon", K::number, "domain centre longitude", 12.0),
                opt("center_lat", K::number, "domain centre latitude", 46.0),
                opt("years", K::integer, "years of monthly maxima", 10),
                opt("start_year", K::integer, "first year", 2000),
                opt("field", K::string, "maxid or gauss", "maxid"), opt("beta", K::number, "beta at T = 0", 0.5),
                opt("alpha1_beta", K::number, "slope of ln beta in T", 0.0),
                opt("lambda_km", K::number, "lambda at T = 0", 30.0),
                opt("alpha1_lambda", K::number, "slope of ln lambda in T", 0.0), opt("nu", K::number, "smoothness", 1.0),
                opt("covariate", K::string, "monthly covariate CSV (month,T); default is a standardized cosine"),
                opt("mu", K::number, "GEV location", 20.0), opt("sigma", K::number, "GEV scale", 5.0),
                opt("xi", K::number, "GEV shape", 0.1), opt("mu_seasonal", K::number, "location change per unit T", 0.0),
                opt("eps", K::number, "point-process stopping tolerance", 1e-6),
                opt("angular_nodes", K::integer, "quadrature nodes for the margin", 60)},
               run_simulate});
  c.push_back({"diagnose", "PIT uniformity and model-vs-empirical chi",
               {req("maxima", K::string, "maxima CSV with covariates"), req("fit", K::string, "marginal fit JSON"),
                opt("pit_bins", K::integer, "histogram bins", 10), opt("uniform", K::string, "uniform-scale table"),
                opt("sites", K::string, "site coordinates"), opt("dependence", K::string, "dependence fit JSON"),
                opt("covariate", K::string, "monthly covariate CSV"), opt("dem", K::string, "DEM for topographic distance"),
                opt("dem_step_km", K::number, "profile sampling step (km)", 0.1), opt("q", K::number, "quantile level", 0.98),
                opt("n_bins", K::integer, "distance bins", 35)},
               run_diagnose});
  return c;
}

}  // namespace spex::cli
