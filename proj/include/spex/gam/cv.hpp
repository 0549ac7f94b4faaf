#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spex/gam/fit.hpp"

namespace spex::gam {

// Per-row fold labels (all 1-based). fold = (spatial - 1) * n_temporal + temporal.
struct FoldAssignment {
  std::vector<int> spatial;
  std::vector<int> temporal;
  std::vector<int> fold;
  int n_spatial = 4;
  int n_temporal = 3;

  int n_folds() const { return n_spatial * n_temporal; }
  std::vector<std::size_t> rows_in(int fold_id) const;
  std::vector<std::size_t> rows_not_in(int fold_id) const;
};

// Spatial clusters by k-means on site coordinates (columns lon, lat,
// projected to km); temporal cluster k holds months {k, k+3, k+6, k+9}.
FoldAssignment make_folds(const MaximaTable& table, int n_spatial = 4, int n_temporal = 3, std::uint64_t seed = 1);

struct FoldScore {
  int fold = 0;
  bool ok = false;
  std::size_t held_out = 0;
  double nll = 0.0;   // mean held-out log-likelihood
  double crps = 0.0;  // mean held-out CRPS
  std::string error;
};

struct CvScore {
  // nLL is the mean held-out log-likelihood per observation averaged over
  // folds (higher is better); CRPS likewise (lower is better).
  double nll = 0.0;
  double crps = 0.0;
  int valid_folds = 0;
  int skipped_folds = 0;
  std::vector<FoldScore> folds;
};

// Log density floor used when a held-out value falls outside the fitted support.
inline constexpr double kLogDensityFloor = -690.7755278982137;  // ln 1e-300

CvScore cv_score(const ModelFormula& formula, const MaximaTable& table, const FoldAssignment& folds,
                 const GamFitOptions& opts = {});

struct SelectionRow {
  std::string model;
  double nll = 0.0;
  double crps = 0.0;
  Eigen::Index columns = 0;
  int valid_folds = 0;
  double smoothing = 1.0;
};

// Scores every candidate and orders them by CRPS, then higher nLL, then
// fewer columns.
std::vector<SelectionRow> forward_select(const std::vector<ModelFormula>& candidates, const MaximaTable& table,
                                         const FoldAssignment& folds, const GamFitOptions& opts = {},
                                         bool tune_smoothing = false);

// Shared smoothing multiplier from the grid scored by CV CRPS (nLL breaks ties).
struct SmoothingChoice {
  double smoothing = 1.0;
  CvScore score;
};
SmoothingChoice select_smoothing(const ModelFormula& formula, const MaximaTable& table, const FoldAssignment& folds,
                                 const std::vector<double>& grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3},
                                 const GamFitOptions& opts = {});

// Strict ordering used by forward_select: true when a ranks above b.
bool ranks_above(const SelectionRow& a, const SelectionRow& b);

}  // namespace spex::gam
