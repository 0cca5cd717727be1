#pragma once

#include "p2pl/encoding.hpp"

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace p2pl {

// Loading -------------------------------------------------------------------

/// Parses CSV text into a RawTable. Column kinds come from `schema`; columns
/// the schema does not know are kept with kind `unknown` and listed in
/// `unknown_columns`. Raw export names are renamed through `aliases` first.
inline RawTable parse_table(std::string_view text, const EncodingSchema& schema,
                            const std::map<std::string, std::string>& aliases = {},
                            const std::string& origin = "<csv>") {
  csv::Reader reader(text);
  auto header = reader.next();
  if (!header || (header->size() == 1 && trim((*header)[0]).empty()))
    throw DataError(origin + ": missing header row");

  RawTable t;
  t.kind = schema.kind;
  for (auto name : *header) {
    name = std::string(trim(name));
    if (auto it = aliases.find(name); it != aliases.end()) name = it->second;
    RawColumn c{name, ColumnKind::unknown};
    if (const auto* rule = schema.find(name))
      c.kind = rule->kind;
    else
      t.unknown_columns.push_back(name);
    t.columns.push_back(std::move(c));
  }
  for (const auto& required : schema.response_columns())
    if (!t.index_of(required)) throw DataError(origin + ": header lacks required response column '" + required + "'");

  while (auto row = reader.next()) {
    if (row->size() == 1 && trim((*row)[0]).empty()) continue;  // blank line
    if (row->size() != t.columns.size())
      throw DataError(origin + ":" + std::to_string(reader.line() - 1) + ": expected " +
                      std::to_string(t.columns.size()) + " fields, got " + std::to_string(row->size()));
    std::vector<Cell> cells;
    cells.reserve(row->size());
    for (auto& f : *row) cells.push_back(make_cell(std::move(f)));
    t.rows.push_back(std::move(cells));
  }
  t.check();
  return t;
}

inline RawTable load_table(const std::string& path, const EncodingSchema& schema,
                           const std::map<std::string, std::string>& aliases = {}) {
  return parse_table(read_file(path), schema, aliases, path);
}

/// Loads with the shipped schema and alias map for `kind`.
inline RawTable load_table(const std::string& path, DatasetKind kind) {
  return load_table(path, default_schema(kind), default_aliases());
}

// Filtering -----------------------------------------------------------------

struct FilterPolicy {
  bool drop_constant_or_blank_columns = true;
  /// A column is constant when this share of its non-missing values is identical.
  double constant_share = 0.995;
  std::set<std::string> post_origination_feature_names;
  bool drop_rows_with_missing = true;
  bool drop_unknown_columns = true;
  /// Never dropped (responses).
  std::set<std::string> keep_columns;

  static std::set<std::string> load_blacklist(const std::string& path) {
    std::set<std::string> out;
    for (const auto& line : split(read_file(path), '\n'))
      if (!line.empty() && line.front() != '#') out.insert(line);
    return out;
  }

  static FilterPolicy defaults(const EncodingSchema& schema) {
    FilterPolicy p;
    p.post_origination_feature_names = load_blacklist(data_dir() + "/schema/post_origination.txt");
    for (const auto& r : schema.response_columns()) p.keep_columns.insert(r);
    return p;
  }
};

namespace detail {

inline RawTable keep_columns(const RawTable& t, const std::vector<bool>& keep) {
  RawTable out;
  out.kind = t.kind;
  out.report = t.report;
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    if (keep[j]) out.columns.push_back(t.columns[j]);
  for (const auto& u : t.unknown_columns)
    if (out.index_of(u)) out.unknown_columns.push_back(u);
  for (const auto& row : t.rows) {
    std::vector<Cell> r;
    for (std::size_t j = 0; j < row.size(); ++j)
      if (keep[j]) r.push_back(row[j]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

/// Empty when the column is informative, else the reason it is not.
inline std::string uninformative_reason(const RawTable& t, std::size_t j, double share) {
  std::map<std::string, std::size_t> counts;
  std::size_t present = 0;
  for (const auto& row : t.rows)
    if (row[j]) {
      ++counts[*row[j]];
      ++present;
    }
  if (present == 0) return "blank";
  std::size_t top = 0;
  for (const auto& [v, c] : counts) top = std::max(top, c);
  if (static_cast<double>(top) >= share * static_cast<double>(present)) return "constant";
  return {};
}

}  // namespace detail

/// Removes post-origination and unknown columns, blank or constant columns, and
/// rows with missing values. Column and row removal repeat until nothing
/// changes, so filtering a filtered table is a no-op.
inline RawTable filter_table(const RawTable& t, const FilterPolicy& p) {
  RawTable cur = t;
  cur.report = {};
  {
    std::vector<bool> keep(cur.width(), true);
    for (std::size_t j = 0; j < cur.width(); ++j) {
      const auto& name = cur.columns[j].name;
      if (p.keep_columns.count(name)) continue;
      if (p.post_origination_feature_names.count(name)) {
        keep[j] = false;
        cur.report.columns.emplace_back(name, "not available for new borrowers");
      } else if (p.drop_unknown_columns && cur.columns[j].kind == ColumnKind::unknown) {
        keep[j] = false;
        cur.report.columns.emplace_back(name, "not in schema");
      }
    }
    cur = detail::keep_columns(cur, keep);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    if (p.drop_constant_or_blank_columns) {
      std::vector<bool> keep(cur.width(), true);
      for (std::size_t j = 0; j < cur.width(); ++j) {
        if (p.keep_columns.count(cur.columns[j].name)) continue;
        if (auto reason = detail::uninformative_reason(cur, j, p.constant_share); !reason.empty()) {
          keep[j] = false;
          changed = true;
          cur.report.columns.emplace_back(cur.columns[j].name, reason);
        }
      }
      if (changed) cur = detail::keep_columns(cur, keep);
    }
    if (p.drop_rows_with_missing) {
      const auto before = cur.rows.size();
      std::erase_if(cur.rows, [](const std::vector<Cell>& r) {
        return std::any_of(r.begin(), r.end(), [](const Cell& c) { return !c.has_value(); });
      });
      if (cur.rows.size() != before) {
        cur.report.rows_dropped += before - cur.rows.size();
        changed = true;
      }
    }
  }
  return cur;
}

// Splitting -------------------------------------------------------------------

struct SplitPlan {
  double ratio = 0.8;
  std::size_t runs = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must lie in (0,1)");
    if (runs == 0) throw std::invalid_argument("split runs must be positive");
  }
};

struct Split {
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  Dataset train;
  Dataset test;
};

/// Rows are class labels when every response value is 0 or 1.
inline bool is_binary_response(const Dataset& d) {
  return d.y.size() > 0 && (d.y.array() == 0.0 || d.y.array() == 1.0).all();
}

/// Test-set size for n rows: ceil((1 - ratio) n).
inline std::size_t test_size(std::size_t n, double ratio) {
  const double t = (1.0 - ratio) * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil(t - 1e-9));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

/// Row partition for one run. Binary responses are split per class, with
/// per-class test quotas assigned by largest remainder.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(const Dataset& d, double ratio,
                                                                                  Rng& rng) {
  const std::size_t n = d.rows();
  const std::size_t n_test = test_size(n, ratio);
  std::vector<std::vector<std::size_t>> strata;
  if (is_binary_response(d)) {
    strata.resize(2);
    for (std::size_t i = 0; i < n; ++i) strata[d.y(static_cast<Eigen::Index>(i)) == 1.0 ? 1 : 0].push_back(i);
  } else {
    strata.resize(1);
    for (std::size_t i = 0; i < n; ++i) strata[0].push_back(i);
  }

  std::vector<std::size_t> quota(strata.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    const double exact = static_cast<double>(n_test) * static_cast<double>(strata[s].size()) / static_cast<double>(n);
    quota[s] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[s];
    remainders.emplace_back(-(exact - std::floor(exact)), s);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t k = 0; assigned < n_test; ++k, ++assigned) ++quota[remainders[k % remainders.size()].second];

  std::vector<std::size_t> train, test;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    auto rows = strata[s];
    rng.shuffle(rows);
    test.insert(test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(quota[s]));
    train.insert(train.end(), rows.begin() + static_cast<std::ptrdiff_t>(quota[s]), rows.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

/// `plan.runs` independent random train/test splits, reproducible from `plan.seed`.
inline std::vector<Split> split_montecarlo(const Dataset& d, const SplitPlan& plan) {
  plan.validate();
  if (d.rows() < 5) throw DataError("split_montecarlo needs at least 5 rows, got " + std::to_string(d.rows()));
  std::vector<Split> out;
  out.reserve(plan.runs);
  for (std::size_t r = 0; r < plan.runs; ++r) {
    Rng rng(derive_seed(plan.seed, r));
    auto [train, test] = split_indices(d, plan.ratio, rng);
    Split s;
    s.train = take_rows(d, train);
    s.test = take_rows(d, test);
    s.train_idx = std::move(train);
    s.test_idx = std::move(test);
    out.push_back(std::move(s));
  }
  return out;
}

// Sampling --------------------------------------------------------------------

/// Up to `n` rows drawn without replacement, in ascending row order.
inline Dataset sample_rows(const Dataset& d, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(d.rows());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (n < idx.size()) {
    Rng rng(seed);
    rng.shuffle(idx);
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
  }
  return take_rows(d, idx);
}

/// `per_class` rows of each label (0 and 1) of the binary response.
inline Dataset balanced_sample(const Dataset& d, std::size_t per_class, std::uint64_t seed) {
  if (!is_binary_response(d)) throw DataError("balanced_sample needs a binary response");
  Rng rng(seed);
  std::vector<std::size_t> all;
  for (double label : {1.0, 0.0}) {
    auto idx = rows_where(d, d.response_name, label);
    if (idx.size() < per_class)
      throw DataError("balanced_sample: only " + std::to_string(idx.size()) + " rows with label " +
                      format_double(label));
    rng.shuffle(idx);
    all.insert(all.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(per_class));
  }
  std::sort(all.begin(), all.end());
  return take_rows(d, all);
}

}  // namespace p2pl
