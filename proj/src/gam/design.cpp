#include "spex/gam/design.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spex/common/error.hpp"

namespace spex::gam {
namespace {

using nlohmann::json;

const std::vector<double>& checked_column(const MaximaTable& t, const std::string& name) {
  const auto& col = t.column(name);
  for (double v : col) {
    if (!std::isfinite(v)) throw DataError("covariate '" + name + "' has missing or non-finite values");
  }
  return col;
}

smooth::SplineBasis make_basis(const SmoothTerm& s, const MaximaTable& t) {
  switch (s.kind) {
    case smooth::SplineKind::cubic:
      return smooth::SplineBasis::cubic(smooth::quantile_knots(checked_column(t, s.covariate), s.knots));
    case smooth::SplineKind::cyclic_cubic: {
      std::vector<double> knots(s.knots);
      for (int i = 0; i < s.knots; ++i) knots[i] = s.origin + s.period * i / s.knots;
      return smooth::SplineBasis::cyclic(std::move(knots), s.period);
    }
    case smooth::SplineKind::tensor:
      return smooth::SplineBasis::tensor(
          smooth::SplineBasis::cubic(smooth::quantile_knots(checked_column(t, s.covariate), s.knots)),
          smooth::SplineBasis::cubic(smooth::quantile_knots(checked_column(t, s.covariate2), s.knots2)));
  }
  throw ConfigError("unknown smooth kind");
}

Eigen::MatrixXd raw_smooth(const SmoothTerm& s, const smooth::SplineBasis& basis, const MaximaTable& t) {
  if (s.kind == smooth::SplineKind::tensor) return basis.eval(checked_column(t, s.covariate), checked_column(t, s.covariate2));
  return basis.eval(checked_column(t, s.covariate));
}

json basis_to_json(const smooth::SplineBasis& b) {
  if (b.kind() == smooth::SplineKind::tensor) {
    return {{"first", b.marginal(0).knots()}, {"second", b.marginal(1).knots()}};
  }
  return {{"knots", b.knots()}, {"period", b.period()}};
}

smooth::SplineBasis basis_from_json(const SmoothTerm& s, const json& j) {
  switch (s.kind) {
    case smooth::SplineKind::cubic:
      return smooth::SplineBasis::cubic(j.at("knots").get<std::vector<double>>());
    case smooth::SplineKind::cyclic_cubic:
      return smooth::SplineBasis::cyclic(j.at("knots").get<std::vector<double>>(), j.at("period").get<double>());
    case smooth::SplineKind::tensor:
      return smooth::SplineBasis::tensor(smooth::SplineBasis::cubic(j.at("first").get<std::vector<double>>()),
                                         smooth::SplineBasis::cubic(j.at("second").get<std::vector<double>>()));
  }
  throw ConfigError("unknown smooth kind");
}

}  // namespace

Design::Design(ModelFormula formula, const MaximaTable& training) : formula_(std::move(formula)) { build(training); }

void Design::build(const MaximaTable& training) {
  if (training.size() == 0) throw DataError("cannot build a design from an empty table");
  for (int p = 0; p < kParts; ++p) {
    const ParameterFormula& f = formula_.parts[p];
    for (const auto& s : f.smooths) {
      smooth::SplineBasis basis = make_basis(s, training);
      const Eigen::MatrixXd raw = raw_smooth(s, basis, training);
      smooth_state_[p].push_back({basis, raw.colwise().mean()});
    }
    for (const auto& r : f.random_slopes) {
      checked_column(training, r.covariate);
      const auto& g = checked_column(training, r.group);
      std::set<double> levels(g.begin(), g.end());
      slope_state_[p].push_back({std::vector<double>(levels.begin(), levels.end())});
    }
    for (const auto& name : f.linear) checked_column(training, name);
  }
  for (const auto& name : formula_.covariates()) {
    const auto& col = training.column(name);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    ranges_.push_back({name, {*lo, *hi}});
  }
  finish_blocks();
}

void Design::finish_blocks() {
  for (int p = 0; p < kParts; ++p) {
    const ParameterFormula& f = formula_.parts[p];
    auto& out = blocks_[p];
    out.clear();
    Eigen::Index offset = 0;
    auto push = [&](Block b) {
      b.offset = offset;
      offset += b.width;
      out.push_back(std::move(b));
    };
    if (f.intercept) push({BlockKind::intercept, "(Intercept)", 0, 1, {}, {}});
    for (const auto& name : f.linear) push({BlockKind::linear, name, 0, 1, {}, {}});
    for (std::size_t i = 0; i < f.smooths.size(); ++i) {
      const auto& basis = smooth_state_[p][i].basis;
      const Eigen::Index w = basis.size();
      // Centred columns leave the constant coefficient direction unidentified.
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(w) / std::sqrt(static_cast<double>(w));
      push({BlockKind::smooth, f.smooths[i].label(), 0, w, basis.penalty(), ones * ones.transpose()});
    }
    for (std::size_t i = 0; i < f.random_slopes.size(); ++i) {
      const Eigen::Index w = static_cast<Eigen::Index>(slope_state_[p][i].levels.size());
      push({BlockKind::random_slope, f.random_slopes[i].label(), 0, w, Eigen::MatrixXd::Identity(w, w), {}});
    }
    if (offset == 0) throw ConfigError(std::string("formula part '") + part_name(static_cast<Part>(p)) + "' has no terms");
  }
}

Eigen::Index Design::columns(Part p) const {
  const auto& b = blocks(p);
  return b.empty() ? 0 : b.back().offset + b.back().width;
}

Eigen::Index Design::total_columns() const {
  return columns(Part::location) + columns(Part::log_scale) + columns(Part::shape);
}

Eigen::Index Design::part_offset(Part p) const {
  Eigen::Index off = 0;
  for (int i = 0; i < static_cast<int>(p); ++i) off += columns(static_cast<Part>(i));
  return off;
}

Eigen::MatrixXd Design::matrix(Part part, const MaximaTable& table) const {
  const int p = static_cast<int>(part);
  const ParameterFormula& f = formula_.parts[p];
  const Eigen::Index n = static_cast<Eigen::Index>(table.size());
  Eigen::MatrixXd x(n, columns(part));
  std::size_t block = 0;
  if (f.intercept) x.col(blocks_[p][block++].offset).setOnes();
  for (const auto& name : f.linear) {
    const auto& col = checked_column(table, name);
    x.col(blocks_[p][block++].offset) = Eigen::Map<const Eigen::VectorXd>(col.data(), n);
  }
  for (std::size_t i = 0; i < f.smooths.size(); ++i) {
    const Block& b = blocks_[p][block++];
    const auto& st = smooth_state_[p][i];
    x.middleCols(b.offset, b.width) = raw_smooth(f.smooths[i], st.basis, table).rowwise() - st.means;
  }
  for (std::size_t i = 0; i < f.random_slopes.size(); ++i) {
    const Block& b = blocks_[p][block++];
    const auto& levels = slope_state_[p][i].levels;
    const auto& cov = checked_column(table, f.random_slopes[i].covariate);
    const auto& grp = checked_column(table, f.random_slopes[i].group);
    x.middleCols(b.offset, b.width).setZero();
    for (Eigen::Index r = 0; r < n; ++r) {
      auto it = std::lower_bound(levels.begin(), levels.end(), grp[r]);
      if (it == levels.end() || *it != grp[r]) {
        throw DataError("random slope " + f.random_slopes[i].label() + ": level " + std::to_string(grp[r]) +
                        " was not seen in training");
      }
      x(r, b.offset + (it - levels.begin())) = cov[r];
    }
  }
  return x;
}

Eigen::MatrixXd Design::penalty(const std::vector<double>& smoothing) const {
  const Eigen::Index total = total_columns();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(total, total);
  std::size_t k = 0;
  for (int p = 0; p < kParts; ++p) {
    const Eigen::Index base = part_offset(static_cast<Part>(p));
    for (const Block& b : blocks_[p]) {
      if (!b.penalized()) continue;
      if (k >= smoothing.size()) throw ConfigError("too few smoothing parameters for the formula");
      const double lambda = smoothing[k++];
      if (!(lambda >= 0.0)) throw ConfigError("smoothing parameters must be non-negative");
      s.block(base + b.offset, base + b.offset, b.width, b.width) += lambda * b.penalty;
      if (b.fixed_penalty.size() > 0) s.block(base + b.offset, base + b.offset, b.width, b.width) += b.fixed_penalty;
    }
  }
  if (k != smoothing.size()) throw ConfigError("too many smoothing parameters for the formula");
  return s;
}

std::vector<std::string> Design::penalized_labels() const {
  std::vector<std::string> out;
  for (int p = 0; p < kParts; ++p) {
    for (const Block& b : blocks_[p]) {
      if (b.penalized()) out.push_back(std::string(part_name(static_cast<Part>(p))) + ":" + b.label);
    }
  }
  return out;
}

std::vector<std::string> Design::coefficient_names() const {
  std::vector<std::string> out;
  for (int p = 0; p < kParts; ++p) {
    for (const Block& b : blocks_[p]) {
      const std::string stem = std::string(part_name(static_cast<Part>(p))) + ":" + b.label;
      if (b.width == 1) out.push_back(stem);
      else
        for (Eigen::Index i = 0; i < b.width; ++i) out.push_back(stem + "[" + std::to_string(i + 1) + "]");
    }
  }
  return out;
}

bool Design::outside_training_range(const MaximaTable& table) const {
  for (const auto& [name, range] : ranges_) {
    bool cyclic = false;
    for (const auto& f : formula_.parts) {
      for (const auto& s : f.smooths) cyclic |= s.kind == smooth::SplineKind::cyclic_cubic && s.covariate == name;
    }
    if (cyclic || !table.has(name)) continue;
    for (double v : table.column(name)) {
      if (v < range.first - 1e-9 * (1 + std::abs(range.first)) || v > range.second + 1e-9 * (1 + std::abs(range.second))) {
        return true;
      }
    }
  }
  return false;
}

json Design::to_json() const {
  json j;
  j["formula"] = formula_.to_json();
  json parts = json::array();
  for (int p = 0; p < kParts; ++p) {
    json part;
    part["smooths"] = json::array();
    for (const auto& st : smooth_state_[p]) {
      part["smooths"].push_back({{"basis", basis_to_json(st.basis)},
                                 {"means", std::vector<double>(st.means.data(), st.means.data() + st.means.size())}});
    }
    part["random_slopes"] = json::array();
    for (const auto& sl : slope_state_[p]) part["random_slopes"].push_back(sl.levels);
    parts.push_back(part);
  }
  j["parts"] = parts;
  json ranges = json::array();
  for (const auto& [name, r] : ranges_) ranges.push_back({{"covariate", name}, {"min", r.first}, {"max", r.second}});
  j["ranges"] = ranges;
  return j;
}

Design Design::from_json(const json& j) {
  Design d;
  d.formula_ = ModelFormula::from_json(j.at("formula"));
  const json& parts = j.at("parts");
  for (int p = 0; p < kParts; ++p) {
    const ParameterFormula& f = d.formula_.parts[p];
    const json& part = parts.at(p);
    if (part.at("smooths").size() != f.smooths.size() || part.at("random_slopes").size() != f.random_slopes.size()) {
      throw ConfigError("stored design does not match its formula");
    }
    for (std::size_t i = 0; i < f.smooths.size(); ++i) {
      const json& s = part.at("smooths").at(i);
      const auto means = s.at("means").get<std::vector<double>>();
      auto basis = basis_from_json(f.smooths[i], s.at("basis"));
      if (static_cast<Eigen::Index>(means.size()) != basis.size()) throw ConfigError("stored smooth means have the wrong size");
      d.smooth_state_[p].push_back({basis, Eigen::Map<const Eigen::RowVectorXd>(means.data(), basis.size())});
    }
    for (const auto& levels : part.at("random_slopes")) d.slope_state_[p].push_back({levels.get<std::vector<double>>()});
  }
  for (const auto& r : j.at("ranges")) {
    d.ranges_.push_back({r.at("covariate").get<std::string>(), {r.at("min").get<double>(), r.at("max").get<double>()}});
  }
  d.finish_blocks();
  return d;
}

}  // namespace spex::gam
