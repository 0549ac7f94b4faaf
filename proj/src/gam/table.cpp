#include "spex/gam/table.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <tuple>

#include "spex/common/csv.hpp"
#include "spex/common/error.hpp"

namespace spex::gam {

const std::vector<double>& MaximaTable::column(const std::string& name) const {
  auto it = columns.find(name);
  if (it == columns.end()) throw ConfigError("covariate '" + name + "' is not a column of the maxima table");
  return it->second;
}

void MaximaTable::set_column(const std::string& name, std::vector<double> values) {
  if (values.size() != size()) throw DataError("column '" + name + "' has the wrong length");
  if (name == "month" || name == "year" || name == "maximum") throw ConfigError("column '" + name + "' is reserved");
  columns[name] = std::move(values);
}

void MaximaTable::add_row(const std::string& site, int m, int y, double value, const std::map<std::string, double>& extra) {
  const std::size_t n = size();
  site_id.push_back(site);
  month.push_back(m);
  year.push_back(y);
  maximum.push_back(value);
  columns["month"].push_back(m);
  columns["year"].push_back(y);
  for (auto& [name, col] : columns) {
    if (name == "month" || name == "year") continue;
    auto it = extra.find(name);
    col.push_back(it == extra.end() ? std::numeric_limits<double>::quiet_NaN() : it->second);
  }
  for (const auto& [name, v] : extra) {
    if (columns.count(name)) continue;
    std::vector<double> col(n, std::numeric_limits<double>::quiet_NaN());
    col.push_back(v);
    columns[name] = std::move(col);
  }
}

MaximaTable MaximaTable::subset(std::span<const std::size_t> rows) const {
  MaximaTable out;
  for (std::size_t r : rows) {
    out.site_id.push_back(site_id.at(r));
    out.month.push_back(month[r]);
    out.year.push_back(year[r]);
    out.maximum.push_back(maximum[r]);
  }
  for (const auto& [name, col] : columns) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (std::size_t r : rows) v.push_back(col[r]);
    out.columns[name] = std::move(v);
  }
  return out;
}

std::vector<std::string> MaximaTable::sites() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& s : site_id) {
    if (seen.insert(s).second) out.push_back(s);
  }
  return out;
}

void MaximaTable::validate() const {
  std::set<std::tuple<std::string, int, int>> keys;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(maximum[i] >= 0.0) || !std::isfinite(maximum[i])) {
      throw DataError("row " + std::to_string(i + 1) + ": maximum must be finite and non-negative");
    }
    if (month[i] < 1 || month[i] > 12) throw DataError("row " + std::to_string(i + 1) + ": month outside 1..12");
    if (!keys.insert({site_id[i], month[i], year[i]}).second) {
      throw DataError("duplicate (site, month, year) = (" + site_id[i] + ", " + std::to_string(month[i]) + ", " +
                      std::to_string(year[i]) + ")");
    }
  }
}

MaximaTable MaximaTable::read_csv(const std::string& path) {
  const csv::Table t = csv::read_file(path);
  const std::size_t is = t.column("site_id"), im = t.column("month"), iy = t.column("year"), ix = t.column("maximum");
  MaximaTable out;
  std::vector<std::pair<std::string, std::size_t>> extra;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == is || c == im || c == iy || c == ix) continue;
    extra.emplace_back(t.header[c], c);
    out.columns[t.header[c]];
  }
  out.columns["month"];
  out.columns["year"];
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path + " line " + std::to_string(t.line_numbers[r]);
    if (row.size() != t.header.size()) throw DataError(where + ": wrong number of fields");
    const auto m = csv::parse_long(row[im]), y = csv::parse_long(row[iy]);
    const auto x = csv::parse_double(row[ix]);
    if (!m || !y || !x) throw DataError(where + ": month, year and maximum must be numeric");
    out.site_id.push_back(row[is]);
    out.month.push_back(static_cast<int>(*m));
    out.year.push_back(static_cast<int>(*y));
    out.maximum.push_back(*x);
    out.columns["month"].push_back(static_cast<double>(*m));
    out.columns["year"].push_back(static_cast<double>(*y));
    for (const auto& [name, c] : extra) {
      const auto v = csv::parse_double(row[c]);
      out.columns[name].push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
    }
  }
  out.validate();
  return out;
}

void MaximaTable::write_csv(std::ostream& out, const std::vector<std::string>& comments) const {
  csv::Writer w(out);
  for (const auto& c : comments) w.comment(c);
  std::vector<std::string> header{"site_id", "month", "year", "maximum"};
  std::vector<const std::vector<double>*> cols;
  for (const auto& [name, col] : columns) {
    if (name == "month" || name == "year") continue;
    header.push_back(name);
    cols.push_back(&col);
  }
  w.row(header);
  for (std::size_t i = 0; i < size(); ++i) {
    std::vector<std::string> row{site_id[i], std::to_string(month[i]), std::to_string(year[i]), csv::format(maximum[i])};
    for (const auto* c : cols) row.push_back(csv::format((*c)[i]));
    w.row(row);
  }
}

}  // namespace spex::gam
