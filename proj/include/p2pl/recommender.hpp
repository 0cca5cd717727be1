#pragma once

#include "p2pl/csv.hpp"
#include "p2pl/encoding.hpp"
#include "p2pl/model_io.hpp"
#include "p2pl/sentiment_opt.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace p2pl {

/// One loan application: raw values keyed by column name.
struct BorrowerRecord {
  std::string id;
  std::map<std::string, std::string> fields;
};

enum class LoanType { traditional, bidding };

inline std::string_view to_string(LoanType t) { return t == LoanType::traditional ? "traditional" : "bidding"; }

/// Funding probability assumed for every platform-priced loan.
inline constexpr double kTraditionalSuccess = 0.81;

/// Euclidean distance from (interest, success) to the ideal point (0, 1).
inline double ideal_distance(double interest, double success) {
  return std::sqrt(interest * interest + (1.0 - success) * (1.0 - success));
}

struct LoanTypeEstimate {
  LoanType loan_type = LoanType::traditional;
  double interest = 0.0;
  double success = 0.0;
  double distance = 0.0;

  static LoanTypeEstimate make(LoanType type, double interest, double success) {
    if (!(interest >= 0.0 && interest <= 1.0) || !(success >= 0.0 && success <= 1.0))
      throw std::invalid_argument("loan estimate: interest and success must lie in [0,1]");
    return {type, interest, success, ideal_distance(interest, success)};
  }
};

struct SentimentAdvice {
  double g_star = 0.0;
  double success_at_g_star = 0.0;
};

struct Recommendation {
  std::string borrower_id;
  LoanTypeEstimate traditional;
  LoanTypeEstimate bidding;
  LoanType chosen = LoanType::traditional;
  bool tie_broken = false;
  std::optional<double> sentiment_score;  // of the submitted description
  std::optional<SentimentAdvice> sentiment_advice;
};

/// Picks the estimate closer to the ideal point; an exact tie goes to the
/// traditional loan.
inline Recommendation decide(const LoanTypeEstimate& trad, const LoanTypeEstimate& bid, std::string borrower_id = {}) {
  Recommendation r;
  r.borrower_id = std::move(borrower_id);
  r.traditional = trad;
  r.bidding = bid;
  if (bid.distance < trad.distance) {
    r.chosen = LoanType::bidding;
  } else {
    r.chosen = LoanType::traditional;
    r.tie_broken = bid.distance == trad.distance;
  }
  return r;
}

// Trained bundle ------------------------------------------------------------------

inline constexpr std::string_view kBundleFormat = "p2pl-advisor";

/// The three predictors with the resolved encoding schemas of the data they
/// were trained on.
struct Advisor {
  TrainedModel trad_rate;
  TrainedModel bid_rate;
  TrainedModel success;
  EncodingSchema trad_schema;
  EncodingSchema bid_schema;
  std::optional<double> g_star;
  std::uint64_t seed = 0;

  void validate() const {
    if (trad_rate.task() != Task::regression || bid_rate.task() != Task::regression)
      throw DataError("advisor: rate models must be regressors");
    if (success.task() != Task::classification) throw DataError("advisor: success model must be a classifier");
    const auto check = [](const TrainedModel& m, const EncodingSchema& s, const char* what) {
      for (const auto& f : m.feature_names())
        if (!s.find_encoded(f) && f != kDescriptionLength)
          throw DataError(std::string("advisor: ") + what + " feature '" + f + "' has no encoding rule");
    };
    check(trad_rate, trad_schema, "traditional-rate");
    check(bid_rate, bid_schema, "bidding-rate");
    check(success, bid_schema, "success");
  }

  void save(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    save_model(trad_rate, dir + "/trad_rate.json");
    save_model(bid_rate, dir + "/bid_rate.json");
    save_model(success, dir + "/success.json");
    write_file(dir + "/traditional.schema", trad_schema.to_text());
    write_file(dir + "/bidding.schema", bid_schema.to_text());
    Json meta{{"format", std::string(kBundleFormat)}, {"version", 1}, {"seed", seed}};
    meta["g_star"] = g_star ? Json(*g_star) : Json(nullptr);
    meta["models"] = {{"trad_rate", std::string(to_string(trad_rate.kind()))},
                      {"bid_rate", std::string(to_string(bid_rate.kind()))},
                      {"success", std::string(to_string(success.kind()))}};
    write_file(dir + "/bundle.json", meta.dump(1) + "\n");
  }

  static Advisor load(const std::string& dir) {
    Json meta;
    try {
      meta = Json::parse(read_file(dir + "/bundle.json"));
    } catch (const Json::parse_error& e) {
      throw DataError(dir + "/bundle.json: " + e.what());
    }
    if (meta.value("format", "") != kBundleFormat) throw DataError(dir + ": not an advisor bundle");
    Advisor a{load_model(dir + "/trad_rate.json"),
              load_model(dir + "/bid_rate.json"),
              load_model(dir + "/success.json"),
              EncodingSchema::load(dir + "/traditional.schema", DatasetKind::traditional),
              EncodingSchema::load(dir + "/bidding.schema", DatasetKind::bidding),
              std::nullopt,
              meta.value("seed", std::uint64_t{0})};
    if (meta.contains("g_star") && !meta["g_star"].is_null()) a.g_star = meta["g_star"].get<double>();
    a.validate();
    return a;
  }

  /// Raw columns a record must supply, in first-use order.
  std::vector<const ColumnRule*> required_columns() const {
    std::vector<const ColumnRule*> out;
    const auto add = [&](const TrainedModel& m, const EncodingSchema& s) {
      for (const auto& f : m.feature_names()) {
        const ColumnRule* r = f == kDescriptionLength ? s.find("Description") : s.find_encoded(f);
        if (!r) continue;
        const bool seen = std::any_of(out.begin(), out.end(), [&](const ColumnRule* o) { return o->column == r->column; });
        if (!seen) out.push_back(r);
      }
    };
    add(trad_rate, trad_schema);
    add(bid_rate, bid_schema);
    add(success, bid_schema);
    return out;
  }
};

/// Encoded-feature overrides applied after encoding (for example the
/// sentiment score during a what-if sweep).
using FeatureOverrides = std::map<std::string, double>;

/// Model input row for `m` built from a raw record.
inline Eigen::RowVectorXd encode_record(const BorrowerRecord& b, const TrainedModel& m, const EncodingSchema& schema,
                                        const SentimentLexicon& lex, const FeatureOverrides& overrides = {}) {
  const auto& names = m.feature_names();
  Eigen::RowVectorXd x(static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto& f = names[j];
    double v;
    if (auto o = overrides.find(f); o != overrides.end()) {
      v = o->second;
    } else if (f == kDescriptionLength) {
      const auto it = b.fields.find("Description");
      if (it == b.fields.end()) throw MissingFeature("Description");
      v = static_cast<double>(utf8_length(it->second));
    } else {
      const ColumnRule* rule = schema.find_encoded(f);
      if (!rule) throw DataError("no encoding rule for model feature '" + f + "'");
      const auto it = b.fields.find(rule->column);
      if (it == b.fields.end() || (rule->rule != Rule::sentiment && trim(it->second).empty()))
        throw MissingFeature(rule->column);
      v = encode_value(*rule, it->second, lex);
    }
    x(static_cast<Eigen::Index>(j)) = v;
  }
  return x;
}

/// (traditional, bidding) tuples for one borrower. Rates are clamped to [0,1].
inline std::pair<LoanTypeEstimate, LoanTypeEstimate> estimate_tuples(const BorrowerRecord& b, const Advisor& a,
                                                                     const SentimentLexicon& lex,
                                                                     const FeatureOverrides& overrides = {}) {
  const double i_trad = a.trad_rate.predict_row(encode_record(b, a.trad_rate, a.trad_schema, lex, overrides));
  const double i_bid = a.bid_rate.predict_row(encode_record(b, a.bid_rate, a.bid_schema, lex, overrides));
  const double s_bid = a.success.predict_row(encode_record(b, a.success, a.bid_schema, lex, overrides));
  return {LoanTypeEstimate::make(LoanType::traditional, std::clamp(i_trad, 0.0, 1.0), kTraditionalSuccess),
          LoanTypeEstimate::make(LoanType::bidding, std::clamp(i_bid, 0.0, 1.0), std::clamp(s_bid, 0.0, 1.0))};
}

/// Full recommendation: tuples, decision, the description's sentiment score and,
/// when the bundle carries an optimal sentiment, the success probability at it.
inline Recommendation recommend(const BorrowerRecord& b, const Advisor& a, const SentimentLexicon& lex,
                                const FeatureOverrides& overrides = {}) {
  const auto [trad, bid] = estimate_tuples(b, a, lex, overrides);
  Recommendation r = decide(trad, bid, b.id);
  if (auto it = b.fields.find("Description"); it != b.fields.end()) r.sentiment_score = sentiment_score(it->second, lex);
  if (a.g_star && a.success.uses_feature(kSentimentFeature)) {
    FeatureOverrides at = overrides;
    at[std::string(kSentimentFeature)] = *a.g_star;
    const double s = a.success.predict_row(encode_record(b, a.success, a.bid_schema, lex, at));
    r.sentiment_advice = SentimentAdvice{*a.g_star, std::clamp(s, 0.0, 1.0)};
  }
  return r;
}

inline Json to_json(const LoanTypeEstimate& e) {
  return {{"loan_type", std::string(to_string(e.loan_type))},
          {"interest", e.interest},
          {"success", e.success},
          {"distance", e.distance}};
}

inline Json to_json(const Recommendation& r) {
  Json j{{"borrower_id", r.borrower_id},
         {"traditional", to_json(r.traditional)},
         {"bidding", to_json(r.bidding)},
         {"chosen", std::string(to_string(r.chosen))},
         {"tie_broken", r.tie_broken}};
  j["sentiment_score"] = r.sentiment_score ? Json(*r.sentiment_score) : Json(nullptr);
  j["sentiment_advice"] = r.sentiment_advice ? Json{{"g_star", r.sentiment_advice->g_star},
                                                    {"success_at_g_star", r.sentiment_advice->success_at_g_star}}
                                             : Json(nullptr);
  return j;
}

inline csv::Row recommendation_csv_header() {
  return {"id", "interest_traditional", "success_traditional", "distance_traditional", "interest_bidding",
          "success_bidding", "distance_bidding", "chosen", "tie_broken", "sentiment_score", "g_star",
          "success_at_g_star"};
}

inline csv::Row recommendation_csv_row(const Recommendation& r) {
  const auto f = [](double v) { return format_fixed(v, 6); };
  return {r.borrower_id,
          f(r.traditional.interest),
          f(r.traditional.success),
          f(r.traditional.distance),
          f(r.bidding.interest),
          f(r.bidding.success),
          f(r.bidding.distance),
          std::string(to_string(r.chosen)),
          r.tie_broken ? "1" : "0",
          r.sentiment_score ? f(*r.sentiment_score) : "",
          r.sentiment_advice ? f(r.sentiment_advice->g_star) : "",
          r.sentiment_advice ? f(r.sentiment_advice->success_at_g_star) : ""};
}

// Record files ----------------------------------------------------------------------

/// Borrower records from CSV. An `Id` column names the rows (default: row
/// number); empty cells are left out so they surface as missing features.
inline std::vector<BorrowerRecord> parse_records(std::string_view text, const std::string& origin = "<records>") {
  csv::Reader reader(text);
  const auto header = reader.next();
  if (!header) throw DataError(origin + ": missing header row");
  std::vector<std::string> names;
  for (const auto& h : *header) names.emplace_back(trim(h));
  std::vector<BorrowerRecord> out;
  while (auto row = reader.next()) {
    if (row->size() == 1 && trim((*row)[0]).empty()) continue;
    if (row->size() != names.size())
      throw DataError(origin + ":" + std::to_string(reader.line() - 1) + ": expected " + std::to_string(names.size()) +
                      " fields, got " + std::to_string(row->size()));
    BorrowerRecord r;
    r.id = std::to_string(out.size() + 1);
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto v = trim((*row)[j]);
      if (names[j] == "Id") {
        if (!v.empty()) r.id = std::string(v);
      } else if (!v.empty() && v != "NA") {
        r.fields[names[j]] = std::string(v);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

// Portfolio evaluation -----------------------------------------------------------------

struct PortfolioLoan {
  BorrowerRecord record;
  LoanType historical_type = LoanType::traditional;
  double historical_rate = 0.0;
  bool historical_funded = false;
};

inline std::vector<PortfolioLoan> parse_portfolio(std::string_view text, const std::string& origin = "<portfolio>") {
  std::vector<PortfolioLoan> out;
  for (auto& r : parse_records(text, origin)) {
    PortfolioLoan p;
    const auto take = [&](const char* name) {
      const auto it = r.fields.find(name);
      if (it == r.fields.end()) throw DataError(origin + ": row " + r.id + " lacks " + name);
      std::string v = it->second;
      r.fields.erase(it);
      return v;
    };
    const std::string type = take("HistoricalType");
    if (type != "traditional" && type != "bidding")
      throw DataError(origin + ": row " + r.id + ": HistoricalType must be traditional or bidding");
    p.historical_type = type == "traditional" ? LoanType::traditional : LoanType::bidding;
    const std::string rate = take("HistoricalRate");
    const auto rv = parse_double(rate);
    if (!rv) throw DataError(origin + ": row " + r.id + ": bad HistoricalRate '" + rate + "'");
    p.historical_rate = *rv;
    const std::string funded = take("HistoricalFunded");
    if (funded != "0" && funded != "1") throw DataError(origin + ": row " + r.id + ": HistoricalFunded must be 0 or 1");
    p.historical_funded = funded == "1";
    p.record = std::move(r);
    out.push_back(std::move(p));
  }
  return out;
}

struct PortfolioSummary {
  std::size_t loans = 0;
  std::size_t recommended_traditional = 0;
  std::size_t recommended_bidding = 0;
  /// 0.81 per traditional recommendation plus each bidding recommendation classified funded.
  double expected_funded = 0.0;
  /// Predicted rate averaged over funded loans, weighted like expected_funded.
  double mean_predicted_rate = 0.0;
  std::size_t historical_funded = 0;
  double historical_mean_rate = 0.0;  // over historically funded loans
  std::vector<Recommendation> recommendations;

  std::string to_csv() const {
    csv::Writer w;
    w.row({"row", "recommended_traditional", "recommended_bidding", "funded", "mean_rate"});
    w.row({"historical", "", "", std::to_string(historical_funded), format_fixed(historical_mean_rate, 4)});
    w.row({"recommended", std::to_string(recommended_traditional), std::to_string(recommended_bidding),
           format_fixed(expected_funded, 2), format_fixed(mean_predicted_rate, 4)});
    return w.str();
  }
};

/// Recommends every loan with its sentiment set to g* and compares the
/// expected outcome with the historical one.
inline PortfolioSummary portfolio_eval(const std::vector<PortfolioLoan>& loans, const Advisor& a,
                                       const SentimentLexicon& lex, std::optional<double> g_star) {
  PortfolioSummary s;
  s.loans = loans.size();
  double rate_weighted = 0.0, hist_rate = 0.0;
  FeatureOverrides overrides;
  if (g_star) overrides[std::string(kSentimentFeature)] = *g_star;
  for (const auto& loan : loans) {
    if (loan.historical_funded) {
      ++s.historical_funded;
      hist_rate += loan.historical_rate;
    }
    const auto [trad, bid] = estimate_tuples(loan.record, a, lex, overrides);
    Recommendation r = decide(trad, bid, loan.record.id);
    if (r.chosen == LoanType::traditional) {
      ++s.recommended_traditional;
      s.expected_funded += kTraditionalSuccess;
      rate_weighted += kTraditionalSuccess * trad.interest;
    } else {
      ++s.recommended_bidding;
      if (is_positive(a.success, bid.success)) {
        s.expected_funded += 1.0;
        rate_weighted += bid.interest;
      }
    }
    s.recommendations.push_back(std::move(r));
  }
  s.mean_predicted_rate = s.expected_funded > 0.0 ? rate_weighted / s.expected_funded : 0.0;
  s.historical_mean_rate = s.historical_funded ? hist_rate / static_cast<double>(s.historical_funded) : 0.0;
  return s;
}

}  // namespace p2pl
