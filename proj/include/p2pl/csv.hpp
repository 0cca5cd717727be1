#pragma once

#include "p2pl/text.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace p2pl::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: comma separated, `"` quoting with `""` escapes, quoted
/// fields may span lines. CRLF and LF line endings are both accepted.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {
    // UTF-8 byte-order mark
    if (text_.size() >= 3 && text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
  }

  std::optional<Row> next() {
    if (pos_ >= text_.size()) return std::nullopt;
    Row row;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"' && field.empty() && !was_quoted) {
        quoted = was_quoted = true;
      } else if (c == ',') {
        row.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        ++line_;
        row.push_back(std::move(field));
        return row;
      } else {
        field.push_back(c);
      }
    }
    if (quoted) throw DataError("csv: unterminated quoted field near line " + std::to_string(line_));
    row.push_back(std::move(field));
    return row;
  }

  std::size_t line() const { return line_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

inline std::string quote(std::string_view field) {
  const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string format_row(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += quote(row[i]);
  }
  out.push_back('\n');
  return out;
}

/// Builds a CSV document row by row.
class Writer {
 public:
  Writer& row(const Row& r) {
    out_ += format_row(r);
    return *this;
  }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

}  // namespace p2pl::csv
