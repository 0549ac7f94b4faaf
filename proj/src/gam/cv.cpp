#include "spex/gam/cv.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spex/common/log.hpp"
#include "spex/common/parallel.hpp"
#include "spex/geo/kmeans.hpp"

namespace spex::gam {

std::vector<std::size_t> FoldAssignment::rows_in(int fold_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == fold_id) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::rows_not_in(int fold_id) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != fold_id) out.push_back(i);
  }
  return out;
}

FoldAssignment make_folds(const MaximaTable& table, int n_spatial, int n_temporal, std::uint64_t seed) {
  if (n_spatial < 1 || n_temporal < 1) throw ConfigError("fold counts must be positive");
  const auto sites = table.sites();
  if (static_cast<int>(sites.size()) < n_spatial) throw DataError("fewer sites than spatial clusters");
  const auto& lon = table.column("lon");
  const auto& lat = table.column("lat");
  std::map<std::string, geo::LonLat> where;
  for (std::size_t i = 0; i < table.size(); ++i) where.emplace(table.site_id[i], geo::LonLat{lon[i], lat[i]});
  std::vector<geo::LonLat> pts;
  for (const auto& s : sites) pts.push_back(where.at(s));
  const auto clusters = geo::kmeans(geo::project_km(pts), n_spatial, seed);
  std::map<std::string, int> label;
  for (std::size_t i = 0; i < sites.size(); ++i) label[sites[i]] = clusters.labels[i] + 1;

  FoldAssignment f;
  f.n_spatial = n_spatial;
  f.n_temporal = n_temporal;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const int s = label.at(table.site_id[i]);
    const int t = (table.month[i] - 1) % n_temporal + 1;
    f.spatial.push_back(s);
    f.temporal.push_back(t);
    f.fold.push_back((s - 1) * n_temporal + t);
  }
  return f;
}

CvScore cv_score(const ModelFormula& formula, const MaximaTable& table, const FoldAssignment& folds,
                 const GamFitOptions& opts) {
  if (folds.fold.size() != table.size()) throw DataError("fold assignment does not match the table");
  CvScore out;
  out.folds.resize(folds.n_folds());
  parallel_for(out.folds.size(), [&](std::size_t k) {
    FoldScore& fs = out.folds[k];
    fs.fold = static_cast<int>(k) + 1;
    const auto test_rows = folds.rows_in(fs.fold);
    fs.held_out = test_rows.size();
    if (test_rows.empty()) {
      fs.error = "empty fold";
      return;
    }
    try {
      const MaximaTable train = table.subset(folds.rows_not_in(fs.fold));
      const MaximaTable test = table.subset(test_rows);
      const MarginalFit fit = fit_marginal(formula, train, opts);
      const auto params = fit.predict(test);
      double ll = 0.0, crps = 0.0;
      for (std::size_t i = 0; i < test.size(); ++i) {
        ll += std::max(evd::gev_logpdf(test.maximum[i], params[i]), kLogDensityFloor);
        crps += evd::crps_gev(test.maximum[i], params[i]);
      }
      fs.nll = ll / static_cast<double>(test.size());
      fs.crps = crps / static_cast<double>(test.size());
      fs.ok = std::isfinite(fs.nll) && std::isfinite(fs.crps);
      if (!fs.ok) fs.error = "non-finite score";
    } catch (const std::exception& e) {
      fs.error = e.what();
    }
  });
  double nll = 0.0, crps = 0.0;
  for (const auto& fs : out.folds) {
    if (!fs.ok) {
      ++out.skipped_folds;
      log::warn("cv: model ", formula.name, " fold ", fs.fold, " skipped: ", fs.error);
      continue;
    }
    ++out.valid_folds;
    nll += fs.nll;
    crps += fs.crps;
  }
  if (out.valid_folds == 0) throw NumericError("cv: every fold failed for model " + formula.name);
  out.nll = nll / out.valid_folds;
  out.crps = crps / out.valid_folds;
  return out;
}

bool ranks_above(const SelectionRow& a, const SelectionRow& b) {
  if (a.crps != b.crps) return a.crps < b.crps;
  if (a.nll != b.nll) return a.nll > b.nll;
  return a.columns < b.columns;
}

SmoothingChoice select_smoothing(const ModelFormula& formula, const MaximaTable& table, const FoldAssignment& folds,
                                 const std::vector<double>& grid, const GamFitOptions& opts) {
  if (grid.empty()) throw ConfigError("smoothing grid is empty");
  SmoothingChoice best;
  bool have = false;
  for (double lambda : grid) {
    GamFitOptions o = opts;
    o.smoothing.clear();
    o.default_smoothing = lambda;
    CvScore s;
    try {
      s = cv_score(formula, table, folds, o);
    } catch (const NumericError& e) {
      log::warn("smoothing ", lambda, " failed: ", e.what());
      continue;
    }
    if (!have || s.crps < best.score.crps || (s.crps == best.score.crps && s.nll > best.score.nll)) {
      best = {lambda, s};
      have = true;
    }
  }
  if (!have) throw NumericError("no smoothing value on the grid produced a valid CV score");
  return best;
}

std::vector<SelectionRow> forward_select(const std::vector<ModelFormula>& candidates, const MaximaTable& table,
                                         const FoldAssignment& folds, const GamFitOptions& opts, bool tune_smoothing) {
  std::vector<SelectionRow> rows;
  for (const auto& f : candidates) {
    SelectionRow row;
    row.model = f.name;
    try {
      const Design design(f, table);
      row.columns = design.total_columns();
      const bool penalized = !design.penalized_labels().empty();
      if (tune_smoothing && penalized) {
        const auto choice = select_smoothing(f, table, folds, {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3}, opts);
        row.smoothing = choice.smoothing;
        row.nll = choice.score.nll;
        row.crps = choice.score.crps;
        row.valid_folds = choice.score.valid_folds;
      } else {
        const CvScore s = cv_score(f, table, folds, opts);
        row.smoothing = opts.default_smoothing;
        row.nll = s.nll;
        row.crps = s.crps;
        row.valid_folds = s.valid_folds;
      }
    } catch (const NumericError& e) {
      log::warn("candidate ", f.name, " dropped: ", e.what());
      row.nll = -std::numeric_limits<double>::infinity();
      row.crps = std::numeric_limits<double>::infinity();
    }
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), ranks_above);
  return rows;
}

}  // namespace spex::gam
