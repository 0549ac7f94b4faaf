#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace spex::gam {

// Monthly block maxima. Every numeric column other than site_id (including
// lon, lat, month and year) is also available by name through column().
struct MaximaTable {
  std::vector<std::string> site_id;
  std::vector<int> month;  // 1..12
  std::vector<int> year;
  std::vector<double> maximum;
  std::map<std::string, std::vector<double>> columns;

  std::size_t size() const { return maximum.size(); }
  bool has(const std::string& name) const { return columns.count(name) > 0; }
  // Throws ConfigError naming the missing covariate.
  const std::vector<double>& column(const std::string& name) const;

  // Adds or replaces a covariate column.
  void set_column(const std::string& name, std::vector<double> values);
  // Appends a row; covariates missing from `extra` are NaN.
  void add_row(const std::string& site, int month, int year, double maximum,
               const std::map<std::string, double>& extra = {});

  MaximaTable subset(std::span<const std::size_t> rows) const;
  // Distinct sites in order of first appearance.
  std::vector<std::string> sites() const;

  // Checks maxima >= 0, months in 1..12, unique (site, month, year).
  void validate() const;

  static MaximaTable read_csv(const std::string& path);
  // Columns: site_id, month, year, maximum, then the others alphabetically.
  void write_csv(std::ostream& out, const std::vector<std::string>& comments = {}) const;
};

}  // namespace spex::gam
