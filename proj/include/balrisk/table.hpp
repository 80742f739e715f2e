#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace balrisk {

using Cell = std::variant<std::int64_t, double, std::string>;

// 17 significant digits; always carries a '.' or an exponent so the value
// reads back as a double rather than an integer.
std::string format_double(double v);

// Header row, data rows, and leading "# " comment lines.
class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  const std::vector<std::string>& comments() const noexcept { return comments_; }
  std::size_t size() const noexcept { return rows_.size(); }

  void add_comment(std::string line);
  void add_row(std::vector<Cell> row);

  std::size_t column_index(std::string_view name) const;
  const Cell& at(std::size_t row, std::string_view column) const;
  double number(std::size_t row, std::string_view column) const;
  std::string text(std::size_t row, std::string_view column) const;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  static ResultTable parse_csv(std::string_view text);

  friend bool operator==(const ResultTable&, const ResultTable&) = default;

 private:
  std::vector<std::string> comments_;
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace balrisk
