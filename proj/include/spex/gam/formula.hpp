#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "spex/smooth/spline.hpp"

namespace spex::gam {

struct SmoothTerm {
  smooth::SplineKind kind = smooth::SplineKind::cubic;
  std::string covariate;
  std::string covariate2;  // tensor only
  int knots = 10;          // cyclic default 12
  int knots2 = 5;          // tensor second margin
  double period = 12.0;    // cyclic only
  double origin = 1.0;     // cyclic: first knot (months start at 1)

  std::string label() const;
};

// Covariate slope that varies with a grouping column (e.g. one slope per month).
struct RandomSlopeTerm {
  std::string covariate;
  std::string group = "month";

  std::string label() const { return covariate + "|" + group; }
};

struct ParameterFormula {
  bool intercept = true;
  std::vector<std::string> linear;
  std::vector<SmoothTerm> smooths;
  std::vector<RandomSlopeTerm> random_slopes;
};

enum class Part { location = 0, log_scale = 1, shape = 2 };
inline constexpr int kParts = 3;
const char* part_name(Part p);

// Additive structure for (mu, ln sigma, xi link).
//
// JSON form:
//   {"name": "M3",
//    "location": {"intercept": true, "linear": ["A"],
//                 "smooth": [{"kind": "cyclic", "covariate": "month", "knots": 12, "period": 12}],
//                 "random_slopes": [{"covariate": "A", "group": "month"}]},
//    "log_scale": {...}, "shape": {...}}
// A missing part means intercept only. Smooth kinds: "cubic", "cyclic",
// "tensor" (with "covariates": [a, b] and "knots": [ka, kb]).
struct ModelFormula {
  std::string name = "model";
  ParameterFormula parts[kParts];

  const ParameterFormula& part(Part p) const { return parts[static_cast<int>(p)]; }
  ParameterFormula& part(Part p) { return parts[static_cast<int>(p)]; }

  // Names of every covariate referenced by any term.
  std::vector<std::string> covariates() const;

  static ModelFormula intercept_only(std::string name = "M0");
  static ModelFormula from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// A list of formulas from a JSON array or {"models": [...]}.
std::vector<ModelFormula> formulas_from_json(const nlohmann::json& j);

}  // namespace spex::gam
