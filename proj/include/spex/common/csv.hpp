#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spex::csv {

// A parsed CSV file. The first non-comment line is the header; lines that
// start with '#' are metadata and are kept separately.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::size_t column(std::string_view name) const;  // throws DataError
  std::optional<std::size_t> find_column(std::string_view name) const;
  std::size_t size() const { return rows.size(); }
};

Table read(std::istream& in);
Table read_file(const std::string& path);

std::vector<std::string> split_line(std::string_view line);

// Shortest round-trip decimal representation.
std::string format(double value);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void comment(std::string_view text);
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

std::string quote(std::string_view field);

// Parses a number; empty or unparsable fields yield nullopt.
std::optional<double> parse_double(std::string_view s);
std::optional<long> parse_long(std::string_view s);

}  // namespace spex::csv
