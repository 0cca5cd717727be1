#pragma once

#include "p2pl/sentiment.hpp"
#include "p2pl/table.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace p2pl {

namespace detail {
inline std::string column_context(std::string_view column) {
  return column.empty() ? std::string{} : " in column '" + std::string(column) + "'";
}
}  // namespace detail

/// class0 -> 0, class1 -> 1.
inline std::vector<double> encode_binary(const std::vector<std::string>& values, const std::vector<std::string>& classes,
                                         std::string_view column = {}) {
  if (classes.size() != 2) throw DataError("binary encoding needs two classes" + detail::column_context(column));
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    if (v == classes[0])
      out.push_back(0.0);
    else if (v == classes[1])
      out.push_back(1.0);
    else
      throw DataError("unseen class value '" + v + "'" + detail::column_context(column));
  }
  return out;
}

/// Class at 1-based position i of `classes` -> i.
inline std::vector<double> encode_ordinal(const std::vector<std::string>& values,
                                          const std::vector<std::string>& classes, std::string_view column = {}) {
  std::map<std::string, double> code;
  for (std::size_t i = 0; i < classes.size(); ++i) code.emplace(classes[i], static_cast<double>(i + 1));
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    const auto it = code.find(v);
    if (it == code.end()) throw DataError("unseen class value '" + v + "'" + detail::column_context(column));
    out.push_back(it->second);
  }
  return out;
}

inline std::vector<std::string> decode_ordinal(const std::vector<double>& codes, const std::vector<std::string>& classes) {
  std::vector<std::string> out;
  out.reserve(codes.size());
  for (double c : codes) {
    const auto i = static_cast<long>(std::lround(c));
    if (c != static_cast<double>(i) || i < 1 || i > static_cast<long>(classes.size()))
      throw DataError("ordinal code " + format_double(c) + " out of range");
    out.push_back(classes[static_cast<std::size_t>(i - 1)]);
  }
  return out;
}

/// Encodes a single raw value under `rule`. Used for borrower records at
/// prediction time; the rule must already be resolved.
inline double encode_value(const ColumnRule& rule, std::string_view raw, const SentimentLexicon& lex) {
  const std::string v(trim(raw));
  switch (rule.rule) {
    case Rule::numeric:
    case Rule::rate_response: {
      const auto d = parse_double(v);
      if (!d) throw DataError("non-numeric value '" + v + "'" + detail::column_context(rule.column));
      return *d;
    }
    case Rule::binary:
      return encode_binary({v}, rule.classes, rule.column).front();
    case Rule::ordinal:
    case Rule::ordinal_lex:
      return encode_ordinal({v}, rule.classes, rule.column).front();
    case Rule::sentiment:
      return sentiment_score(raw, lex);
    case Rule::status_response:
      break;
  }
  throw DataError("column '" + rule.column + "' cannot be encoded from a single value");
}

/// Fills in class lists learned from the data: sorted observed classes for
/// ordinal-lex rules, and for binary rules without explicit classes (class1 is
/// the lexicographically later one).
inline EncodingSchema resolve_schema(const RawTable& t, EncodingSchema schema) {
  for (auto& r : schema.rules) {
    const bool learn = r.rule == Rule::ordinal_lex || (r.rule == Rule::binary && r.classes.empty());
    if (!learn || !r.classes.empty()) continue;
    const auto j = t.index_of(r.column);
    if (!j) continue;
    std::set<std::string> seen;
    for (const auto& row : t.rows)
      if (row[*j]) seen.insert(*row[*j]);
    r.classes.assign(seen.begin(), seen.end());
    if (r.rule == Rule::binary && r.classes.size() != 2) {
      if (r.classes.size() > 2)
        throw DataError("binary column '" + r.column + "' has " + std::to_string(r.classes.size()) + " classes");
      // a single observed class keeps an unnamed second slot
      while (r.classes.size() < 2) r.classes.push_back("<unobserved-" + std::to_string(r.classes.size()) + ">");
    }
  }
  return schema;
}

/// Encodes every column of `t` under `schema`. Feature columns keep table
/// order; the rate response becomes `y`. LoanStatus (funded 1 / not 0) and the
/// description character count are attached as aux columns.
inline Dataset encode_dataset(const RawTable& t, const EncodingSchema& schema, const SentimentLexicon& lex,
                              const StatusMap& status = {}) {
  const EncodingSchema resolved = resolve_schema(t, schema);
  Dataset d;
  d.kind = t.kind;
  const auto n = static_cast<Eigen::Index>(t.rows.size());

  std::vector<Vector> features;
  bool have_rate = false;
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    const auto& col = t.columns[j];
    std::vector<std::string> values;
    values.reserve(t.rows.size());
    for (const auto& row : t.rows) {
      if (!row[j]) throw DataError("missing value in column '" + col.name + "' (filter the table first)");
      values.push_back(*row[j]);
    }
    const ColumnRule* rule = resolved.find(col.name);
    ColumnRule passthrough{col.name, col.kind, Rule::numeric, {}};
    if (!rule) {
      if (col.kind == ColumnKind::categorical || col.kind == ColumnKind::text)
        throw DataError("schema has no rule for non-numeric column '" + col.name + "'");
      rule = &passthrough;
    }

    Vector encoded(n);
    switch (rule->rule) {
      case Rule::numeric:
      case Rule::rate_response:
        for (Eigen::Index i = 0; i < n; ++i) encoded(i) = encode_value(*rule, values[static_cast<std::size_t>(i)], lex);
        break;
      case Rule::binary:
        encoded = to_vector(encode_binary(values, rule->classes, col.name));
        break;
      case Rule::ordinal:
      case Rule::ordinal_lex:
        encoded = to_vector(encode_ordinal(values, rule->classes, col.name));
        break;
      case Rule::sentiment: {
        Vector length(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto& text = values[static_cast<std::size_t>(i)];
          encoded(i) = sentiment_score(text, lex);
          length(i) = static_cast<double>(utf8_length(text));
        }
        d.aux.push_back(AuxColumn{std::string(kDescriptionLength), std::move(length)});
        break;
      }
      case Rule::status_response:
        for (Eigen::Index i = 0; i < n; ++i) encoded(i) = status.lookup(values[static_cast<std::size_t>(i)]);
        break;
    }

    if (rule->rule == Rule::rate_response) {
      for (Eigen::Index i = 0; i < n; ++i)
        if (encoded(i) < 0.0 || encoded(i) > 1.0)
          throw DataError("rate '" + values[static_cast<std::size_t>(i)] + "' in column '" + col.name +
                          "' outside [0,1]");
      d.response_name = col.name;
      d.y = std::move(encoded);
      have_rate = true;
    } else if (rule->rule == Rule::status_response) {
      d.aux.push_back(AuxColumn{col.name, std::move(encoded)});
    } else {
      d.feature_names.push_back(rule->encoded_name());
      features.push_back(std::move(encoded));
    }
  }
  if (!have_rate) throw DataError("table has no rate response column");

  d.X.resize(n, static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j) d.X.col(static_cast<Eigen::Index>(j)) = features[j];
  d.check();
  return d;
}

/// Encoded Dataset as CSV: features, then response, then aux columns.
inline std::string dataset_to_csv(const Dataset& d) {
  csv::Writer w;
  csv::Row header = d.feature_names;
  header.push_back(d.response_name);
  for (const auto& a : d.aux) header.push_back(a.name);
  w.row(header);
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    csv::Row r;
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) r.push_back(format_double(d.X(i, j)));
    r.push_back(format_double(d.y(i)));
    for (const auto& a : d.aux) r.push_back(format_double(a.values(i)));
    w.row(r);
  }
  return w.str();
}

}  // namespace p2pl
