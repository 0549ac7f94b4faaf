#include "spex/gam/formula.hpp"

#include <set>

#include "spex/common/error.hpp"

namespace spex::gam {
namespace {

using nlohmann::json;

SmoothTerm smooth_from_json(const json& j) {
  SmoothTerm s;
  const std::string kind = j.value("kind", "cubic");
  if (kind == "cubic") {
    s.kind = smooth::SplineKind::cubic;
  } else if (kind == "cyclic" || kind == "cyclic_cubic") {
    s.kind = smooth::SplineKind::cyclic_cubic;
    s.knots = 12;
  } else if (kind == "tensor") {
    s.kind = smooth::SplineKind::tensor;
  } else {
    throw ConfigError("unknown smooth kind '" + kind + "'");
  }
  if (s.kind == smooth::SplineKind::tensor) {
    const auto covs = j.at("covariates").get<std::vector<std::string>>();
    if (covs.size() != 2) throw ConfigError("tensor smooth needs exactly two covariates");
    s.covariate = covs[0];
    s.covariate2 = covs[1];
    s.knots = 5;
    if (j.contains("knots")) {
      const auto k = j.at("knots").get<std::vector<int>>();
      if (k.size() != 2) throw ConfigError("tensor smooth needs two knot counts");
      s.knots = k[0];
      s.knots2 = k[1];
    }
  } else {
    s.covariate = j.at("covariate").get<std::string>();
    s.knots = j.value("knots", s.knots);
    s.period = j.value("period", s.period);
    s.origin = j.value("origin", s.origin);
  }
  if (s.knots < 3 || (s.kind == smooth::SplineKind::tensor && s.knots2 < 3)) {
    throw ConfigError("smooth '" + s.label() + "' needs at least 3 knots");
  }
  if (s.kind == smooth::SplineKind::cyclic_cubic && !(s.period > 0.0)) throw ConfigError("cyclic period must be positive");
  return s;
}

json smooth_to_json(const SmoothTerm& s) {
  switch (s.kind) {
    case smooth::SplineKind::cubic:
      return {{"kind", "cubic"}, {"covariate", s.covariate}, {"knots", s.knots}};
    case smooth::SplineKind::cyclic_cubic:
      return {{"kind", "cyclic"}, {"covariate", s.covariate}, {"knots", s.knots}, {"period", s.period}, {"origin", s.origin}};
    case smooth::SplineKind::tensor:
      return {{"kind", "tensor"}, {"covariates", {s.covariate, s.covariate2}}, {"knots", {s.knots, s.knots2}}};
  }
  return {};
}

ParameterFormula part_from_json(const json& j) {
  ParameterFormula p;
  p.intercept = j.value("intercept", true);
  if (j.contains("linear")) p.linear = j.at("linear").get<std::vector<std::string>>();
  if (j.contains("smooth")) {
    for (const auto& s : j.at("smooth")) p.smooths.push_back(smooth_from_json(s));
  }
  if (j.contains("random_slopes")) {
    for (const auto& r : j.at("random_slopes")) {
      p.random_slopes.push_back({r.at("covariate").get<std::string>(), r.value("group", "month")});
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "intercept" && key != "linear" && key != "smooth" && key != "random_slopes") {
      throw ConfigError("unknown formula key '" + key + "'");
    }
  }
  return p;
}

json part_to_json(const ParameterFormula& p) {
  json j;
  j["intercept"] = p.intercept;
  j["linear"] = p.linear;
  j["smooth"] = json::array();
  for (const auto& s : p.smooths) j["smooth"].push_back(smooth_to_json(s));
  j["random_slopes"] = json::array();
  for (const auto& r : p.random_slopes) j["random_slopes"].push_back({{"covariate", r.covariate}, {"group", r.group}});
  return j;
}

}  // namespace

std::string SmoothTerm::label() const {
  switch (kind) {
    case smooth::SplineKind::cubic:
      return "s(" + covariate + ")";
    case smooth::SplineKind::cyclic_cubic:
      return "cc(" + covariate + ")";
    case smooth::SplineKind::tensor:
      return "te(" + covariate + "," + covariate2 + ")";
  }
  return covariate;
}

const char* part_name(Part p) {
  switch (p) {
    case Part::location:
      return "location";
    case Part::log_scale:
      return "log_scale";
    case Part::shape:
      return "shape";
  }
  return "?";
}

std::vector<std::string> ModelFormula::covariates() const {
  std::set<std::string> seen;
  std::vector<std::string> out;
  auto add = [&](const std::string& c) {
    if (!c.empty() && seen.insert(c).second) out.push_back(c);
  };
  for (const auto& p : parts) {
    for (const auto& l : p.linear) add(l);
    for (const auto& s : p.smooths) {
      add(s.covariate);
      add(s.covariate2);
    }
    for (const auto& r : p.random_slopes) {
      add(r.covariate);
      add(r.group);
    }
  }
  return out;
}

ModelFormula ModelFormula::intercept_only(std::string name) {
  ModelFormula f;
  f.name = std::move(name);
  return f;
}

ModelFormula ModelFormula::from_json(const json& j) {
  ModelFormula f;
  f.name = j.value("name", "model");
  for (int i = 0; i < kParts; ++i) {
    const char* key = part_name(static_cast<Part>(i));
    if (j.contains(key)) f.parts[i] = part_from_json(j.at(key));
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "name" && key != "location" && key != "log_scale" && key != "shape") {
      throw ConfigError("unknown formula section '" + key + "'");
    }
  }
  return f;
}

json ModelFormula::to_json() const {
  json j;
  j["name"] = name;
  for (int i = 0; i < kParts; ++i) j[part_name(static_cast<Part>(i))] = part_to_json(parts[i]);
  return j;
}

std::vector<ModelFormula> formulas_from_json(const json& j) {
  const json& list = j.is_object() && j.contains("models") ? j.at("models") : j;
  std::vector<ModelFormula> out;
  if (list.is_array()) {
    for (const auto& f : list) out.push_back(ModelFormula::from_json(f));
  } else {
    out.push_back(ModelFormula::from_json(list));
  }
  return out;
}

}  // namespace spex::gam
