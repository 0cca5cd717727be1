#pragma once

#include "p2pl/csv.hpp"
#include "p2pl/schema.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace p2pl {

using Cell = std::optional<std::string>;

/// Empty fields and the literal `NA` are missing values.
inline Cell make_cell(std::string raw) {
  const auto t = trim(raw);
  if (t.empty() || t == "NA") return std::nullopt;
  return std::string(t);
}

struct RawColumn {
  std::string name;
  ColumnKind kind = ColumnKind::unknown;
};

/// What filter_table removed, for the plain-text drop log.
struct DropReport {
  std::vector<std::pair<std::string, std::string>> columns;  // name, reason
  std::size_t rows_dropped = 0;

  bool empty() const { return columns.empty() && rows_dropped == 0; }

  std::string to_text() const {
    std::string out;
    for (const auto& [name, reason] : columns) out += "drop column " + name + ": " + reason + "\n";
    out += "drop rows with missing values: " + std::to_string(rows_dropped) + "\n";
    return out;
  }
};

/// Parsed loan table: column names and kinds plus one cell per column per row.
struct RawTable {
  DatasetKind kind = DatasetKind::traditional;
  std::vector<RawColumn> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::string> unknown_columns;
  DropReport report;

  std::size_t width() const { return columns.size(); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j].name == name) return j;
    return std::nullopt;
  }

  void check() const {
    std::set<std::string> names;
    for (const auto& c : columns)
      if (!names.insert(c.name).second) throw DataError("table: duplicate column '" + c.name + "'");
    for (const auto& r : rows)
      if (r.size() != columns.size()) throw DataError("table: ragged row");
  }

  std::string to_csv() const {
    csv::Writer w;
    csv::Row header;
    for (const auto& c : columns) header.push_back(c.name);
    w.row(header);
    for (const auto& r : rows) {
      csv::Row out;
      for (const auto& c : r) out.push_back(c.value_or(""));
      w.row(out);
    }
    return w.str();
  }

  /// Same columns and cells (the drop report is not compared).
  bool same_contents(const RawTable& o) const {
    if (columns.size() != o.columns.size() || rows != o.rows) return false;
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j].name != o.columns[j].name || columns[j].kind != o.columns[j].kind) return false;
    return true;
  }
};

}  // namespace p2pl
