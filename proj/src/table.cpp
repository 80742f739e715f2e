#include "balrisk/table.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "balrisk/data.hpp"
#include "balrisk/error.hpp"

namespace balrisk {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

ResultTable::ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void ResultTable::add_comment(std::string line) { comments_.push_back(std::move(line)); }

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw DomainError("row has " + std::to_string(row.size()) + " cells for " + std::to_string(columns_.size()) +
                      " columns");
  }
  rows_.push_back(std::move(row));
}

std::size_t ResultTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == name) return i;
  }
  throw SchemaError("no column named '" + std::string(name) + "'");
}

const Cell& ResultTable::at(std::size_t row, std::string_view column) const {
  return rows_.at(row).at(column_index(column));
}

double ResultTable::number(std::size_t row, std::string_view column) const {
  const Cell& c = at(row, column);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&c)) return *d;
  throw SchemaError("column '" + std::string(column) + "' is not numeric");
}

std::string ResultTable::text(std::size_t row, std::string_view column) const {
  const Cell& c = at(row, column);
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return format_double(std::get<double>(c));
}

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

Cell parse_cell(const std::string& s) {
  if (s.empty()) return s;
  std::int64_t iv = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), iv);
  if (ec == std::errc() && ptr == s.data() + s.size()) return iv;
  char* end = nullptr;
  double dv = std::strtod(s.c_str(), &end);
  if (end == s.c_str() + s.size()) return dv;
  return s;
}

}  // namespace

void ResultTable::write_csv(std::ostream& out) const {
  for (const auto& c : comments_) out << "# " << c << '\n';
  for (std::size_t j = 0; j < columns_.size(); ++j) out << (j ? "," : "") << quote_if_needed(columns_[j]);
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
              out << quote_if_needed(v);
            } else if constexpr (std::is_same_v<T, double>) {
              out << format_double(v);
            } else {
              out << v;
            }
          },
          row[j]);
    }
    out << '\n';
  }
}

std::string ResultTable::to_csv() const {
  std::ostringstream ss;
  write_csv(ss);
  return ss.str();
}

ResultTable ResultTable::parse_csv(std::string_view text) {
  ResultTable t;
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == '#') {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    line.remove_prefix(1);
    if (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    t.comments_.emplace_back(line);
    if (eol == std::string_view::npos) return t;
    pos = eol + 1;
  }
  auto records = split_csv_records(text.substr(pos), ',');
  if (records.empty()) return t;
  t.columns_ = records.front();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.columns_.size()) throw ParseError("field count differs from header", r + 1);
    std::vector<Cell> row;
    row.reserve(records[r].size());
    for (const auto& f : records[r]) row.push_back(parse_cell(f));
    t.rows_.push_back(std::move(row));
  }
  return t;
}

}  // namespace balrisk
