#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spex/gam/formula.hpp"
#include "spex/gam/table.hpp"
#include "spex/smooth/spline.hpp"

namespace spex::gam {

enum class BlockKind { intercept, linear, smooth, random_slope };

// A contiguous run of columns of one parameter's design matrix.
struct Block {
  BlockKind kind = BlockKind::intercept;
  std::string label;
  Eigen::Index offset = 0;
  Eigen::Index width = 0;
  // Penalty with unit smoothing parameter (smooth and random-slope blocks).
  Eigen::MatrixXd penalty;
  // Penalty applied regardless of smoothing (identifiability of centred smooths).
  Eigen::MatrixXd fixed_penalty;
  bool penalized() const { return kind == BlockKind::smooth || kind == BlockKind::random_slope; }
};

// Everything needed to rebuild the design for new rows: spline knots and
// centring constants and random-slope levels are taken from the training table.
class Design {
 public:
  Design(ModelFormula formula, const MaximaTable& training);

  const ModelFormula& formula() const { return formula_; }
  const std::vector<Block>& blocks(Part p) const { return blocks_[static_cast<int>(p)]; }
  Eigen::Index columns(Part p) const;
  Eigen::Index total_columns() const;
  // Offset of the part's coefficients in the stacked vector.
  Eigen::Index part_offset(Part p) const;

  Eigen::MatrixXd matrix(Part p, const MaximaTable& table) const;
  // Block-diagonal penalty for the stacked coefficients, each smooth block
  // scaled by smoothing[k] (k indexes penalized blocks in stacking order),
  // plus the fixed penalties.
  Eigen::MatrixXd penalty(const std::vector<double>& smoothing) const;
  std::vector<std::string> penalized_labels() const;
  std::vector<std::string> coefficient_names() const;

  // Ranges of the training covariates, for extrapolation warnings.
  bool outside_training_range(const MaximaTable& table) const;

  nlohmann::json to_json() const;
  static Design from_json(const nlohmann::json& j);

 private:
  Design() = default;
  struct SmoothState {
    smooth::SplineBasis basis;
    Eigen::RowVectorXd means;  // training column means
  };
  struct SlopeState {
    std::vector<double> levels;
  };
  void build(const MaximaTable& training);
  void finish_blocks();

  ModelFormula formula_;
  std::vector<Block> blocks_[kParts];
  std::vector<SmoothState> smooth_state_[kParts];
  std::vector<SlopeState> slope_state_[kParts];
  std::vector<std::pair<std::string, std::pair<double, double>>> ranges_;
};

}  // namespace spex::gam
