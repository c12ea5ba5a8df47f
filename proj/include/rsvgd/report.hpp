#pragma once

#include <charconv>
#include <cstddef>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rsvgd/errors.hpp"

namespace rsvgd {

/// Shortest round-trip decimal form, independent of the global locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string header_value(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

}  // namespace detail

/// Per-iteration metrics with a key/value header describing the run.
class RunReport {
 public:
  struct Row {
    std::size_t iteration;
    std::vector<double> values;
  };

  RunReport() = default;
  explicit RunReport(std::vector<std::string> metric_columns) : columns_(std::move(metric_columns)) {}

  void set_header(const std::string& key, const std::string& value) {
    for (auto& [k, v] : header_) {
      if (k == key) {
        v = value;
        return;
      }
    }
    header_.emplace_back(key, value);
  }

  void add_row(std::size_t iteration, std::vector<double> values) {
    if (values.size() != columns_.size()) throw dimension_error("RunReport: row width does not match columns");
    if (!rows_.empty() && iteration <= rows_.back().iteration) {
      throw precondition_error("RunReport: iterations must be strictly increasing");
    }
    rows_.push_back({iteration, std::move(values)});
  }

  const std::vector<std::pair<std::string, std::string>>& header() const noexcept { return header_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<Row>& rows() const noexcept { return rows_; }

  /// Value of `column` in the last row with iteration ≤ `iteration`.
  double value_at(std::size_t iteration, const std::string& column) const {
    std::size_t c = column_index(column);
    const Row* found = nullptr;
    for (const auto& r : rows_) {
      if (r.iteration <= iteration) found = &r;
    }
    if (!found) throw precondition_error("RunReport: no row at or before the requested iteration");
    return found->values[c];
  }

  double last(const std::string& column) const {
    if (rows_.empty()) throw precondition_error("RunReport: empty report");
    return rows_.back().values[column_index(column)];
  }

  std::size_t column_index(const std::string& column) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (columns_[c] == column) return c;
    }
    throw precondition_error("RunReport: unknown column " + column);
  }

  /// `# key=value` lines, a header row, then one line per row.
  void write_csv(std::ostream& out) const {
    for (const auto& [k, v] : header_) out << "# " << k << '=' << detail::header_value(v) << '\n';
    out << "iteration";
    for (const auto& c : columns_) out << ',' << detail::csv_field(c);
    out << '\n';
    for (const auto& r : rows_) {
      out << r.iteration;
      for (double v : r.values) out << ',' << format_number(v);
      out << '\n';
    }
  }

  std::string to_csv() const {
    std::ostringstream ss;
    write_csv(ss);
    return ss.str();
  }

 private:
  std::vector<std::pair<std::string, std::string>> header_;
  std::vector<std::string> columns_;
  std::vector<Row> rows_;
};

}  // namespace rsvgd
