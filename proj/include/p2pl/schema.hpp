#pragma once

#include "p2pl/text.hpp"

#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#ifndef P2PL_DATA_DIR
#define P2PL_DATA_DIR "data"
#endif

namespace p2pl {

/// Directory holding the shipped lexicon and schema files. `P2PL_DATA_DIR`
/// in the environment overrides the build-time location.
inline std::string data_dir() {
  if (const char* env = std::getenv("P2PL_DATA_DIR"); env && *env) return env;
  return P2PL_DATA_DIR;
}

enum class ColumnKind { numerical, categorical, text, unknown };

enum class Rule {
  numeric,          // passthrough
  binary,           // class0 -> 0, class1 -> 1
  ordinal,          // i-th class -> i (1-based)
  ordinal_lex,      // ordinal over the lexicographically sorted observed classes
  sentiment,        // compound lexicon score of free text
  rate_response,    // numeric response in [0,1]
  status_response,  // loan status mapped to funded (1) / not funded (0)
};

inline std::string_view to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::numerical: return "numerical";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::text: return "text";
    case ColumnKind::unknown: return "unknown";
  }
  return "unknown";
}

inline std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::numeric: return "numeric";
    case Rule::binary: return "binary";
    case Rule::ordinal: return "ordinal";
    case Rule::ordinal_lex: return "ordinal-lex";
    case Rule::sentiment: return "sentiment";
    case Rule::rate_response: return "rate-response";
    case Rule::status_response: return "status-response";
  }
  return "numeric";
}

inline ColumnKind parse_column_kind(std::string_view s) {
  if (s == "numerical") return ColumnKind::numerical;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "text") return ColumnKind::text;
  throw DataError("unknown column kind '" + std::string(s) + "'");
}

inline Rule parse_rule(std::string_view s) {
  for (Rule r : {Rule::numeric, Rule::binary, Rule::ordinal, Rule::ordinal_lex, Rule::sentiment, Rule::rate_response,
                 Rule::status_response})
    if (to_string(r) == s) return r;
  throw DataError("unknown encoding rule '" + std::string(s) + "'");
}

inline bool is_response(Rule r) { return r == Rule::rate_response || r == Rule::status_response; }

/// Name of the encoded column produced by a sentiment rule.
inline constexpr std::string_view kSentimentFeature = "SentimentScore";
/// Name of the aux column holding the character count of the description.
inline constexpr std::string_view kDescriptionLength = "DescriptionLength";
inline constexpr std::string_view kRateResponse = "BorrowerRate";
inline constexpr std::string_view kStatusResponse = "LoanStatus";

struct ColumnRule {
  std::string column;
  ColumnKind kind = ColumnKind::numerical;
  Rule rule = Rule::numeric;
  /// binary: {class0, class1}; ordinal: ordered classes. Empty for a binary or
  /// ordinal-lex rule that has not been resolved against data yet.
  std::vector<std::string> classes;

  /// Name of the column after encoding.
  std::string encoded_name() const { return rule == Rule::sentiment ? std::string(kSentimentFeature) : column; }
};

/// Per-column encoding rules for one dataset kind, in table order.
struct EncodingSchema {
  DatasetKind kind = DatasetKind::traditional;
  std::vector<ColumnRule> rules;

  const ColumnRule* find(std::string_view column) const {
    for (const auto& r : rules)
      if (r.column == column) return &r;
    return nullptr;
  }

  /// Rule whose encoded output is named `feature`.
  const ColumnRule* find_encoded(std::string_view feature) const {
    for (const auto& r : rules)
      if (r.encoded_name() == feature) return &r;
    return nullptr;
  }

  std::vector<std::string> response_columns() const {
    std::vector<std::string> out;
    for (const auto& r : rules)
      if (is_response(r.rule)) out.push_back(r.column);
    return out;
  }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& r : rules) {
      if (!seen.insert(r.column).second) throw DataError("schema: duplicate column '" + r.column + "'");
      std::set<std::string> cls(r.classes.begin(), r.classes.end());
      if (cls.size() != r.classes.size()) throw DataError("schema: duplicate class in rule for '" + r.column + "'");
      if (r.rule == Rule::binary && !(r.classes.empty() || r.classes.size() == 2))
        throw DataError("schema: binary rule for '" + r.column + "' needs exactly two classes");
      if (r.rule == Rule::ordinal && r.classes.empty())
        throw DataError("schema: ordinal rule for '" + r.column + "' needs a class list");
    }
    if (!find(kRateResponse)) throw DataError("schema: missing response column BorrowerRate");
    if (kind == DatasetKind::bidding && !find(kStatusResponse))
      throw DataError("schema: bidding schema needs response column LoanStatus");
  }

  static EncodingSchema parse(std::string_view text, DatasetKind kind, const std::string& origin = "<schema>") {
    EncodingSchema s;
    s.kind = kind;
    for (const auto& kv : parse_key_values(text, origin)) {
      const std::string where = origin + ":" + std::to_string(kv.line);
      std::string_view v = kv.value;
      auto take_word = [&]() {
        v = trim(v);
        const auto sp = v.find_first_of(" \t");
        std::string w(v.substr(0, sp));
        v = sp == std::string_view::npos ? std::string_view{} : v.substr(sp);
        return w;
      };
      ColumnRule r;
      r.column = kv.key;
      try {
        r.kind = parse_column_kind(take_word());
        r.rule = parse_rule(take_word());
      } catch (const DataError& e) {
        throw DataError(where + ": " + e.what());
      }
      v = trim(v);
      if (!v.empty()) r.classes = split(v, '|');
      s.rules.push_back(std::move(r));
    }
    s.validate();
    return s;
  }

  static EncodingSchema load(const std::string& path, DatasetKind kind) { return parse(read_file(path), kind, path); }

  std::string to_text() const {
    std::string out = "# resolved encoding schema (" + std::string(p2pl::to_string(kind)) + ")\n";
    for (const auto& r : rules) {
      out += r.column + " = " + std::string(p2pl::to_string(r.kind)) + " " + std::string(p2pl::to_string(r.rule));
      if (!r.classes.empty()) {
        out += ' ';
        for (std::size_t i = 0; i < r.classes.size(); ++i) out += (i ? "|" : "") + r.classes[i];
      }
      out += '\n';
    }
    return out;
  }
};

inline std::string default_schema_path(DatasetKind kind) {
  return data_dir() + "/schema/" + (kind == DatasetKind::traditional ? "traditional.schema" : "bidding.schema");
}

inline EncodingSchema default_schema(DatasetKind kind) { return EncodingSchema::load(default_schema_path(kind), kind); }

/// Loan status -> funded flag. Keys are matched case-insensitively.
struct StatusMap {
  std::map<std::string, int> funded;

  int lookup(std::string_view status) const {
    const auto it = funded.find(to_lower(trim(status)));
    if (it == funded.end()) throw DataError("unknown LoanStatus value '" + std::string(status) + "'");
    return it->second;
  }

  static StatusMap parse(std::string_view text, const std::string& origin = "<status map>") {
    StatusMap m;
    for (const auto& kv : parse_key_values(text, origin)) {
      if (kv.value != "0" && kv.value != "1")
        throw DataError(origin + ":" + std::to_string(kv.line) + ": status flag must be 0 or 1");
      m.funded[to_lower(kv.key)] = kv.value == "1" ? 1 : 0;
    }
    return m;
  }

  static StatusMap load_default() {
    const auto path = data_dir() + "/schema/loan_status.map";
    return parse(read_file(path), path);
  }
};

/// Raw export column name -> kept column name.
inline std::map<std::string, std::string> load_aliases(const std::string& path) {
  return key_value_map(parse_key_values(read_file(path), path));
}

inline std::map<std::string, std::string> default_aliases() { return load_aliases(data_dir() + "/schema/aliases.map"); }

}  // namespace p2pl
