#pragma once

// Synthetic loan populations calibrated to the grade-level rate means and the
// funded share of the public bidding data. Raw tables go through the same
// filter and encoder as real exports.

#include "p2pl/encoding.hpp"
#include "p2pl/ingest.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace p2pl {

struct SynthConfig {
  std::size_t n_traditional = 10000;
  std::size_t n_bidding = 12006;
  /// Rows per historical loan type in the portfolio sample.
  std::size_t n_portfolio = 500;
  /// Mean rates for grades AA, A, B, C, D, E, HR.
  std::array<double, 7> traditional_means{0.112, 0.082, 0.158, 0.197, 0.247, 0.295, 0.318};
  std::array<double, 7> bidding_means{0.113, 0.102, 0.151, 0.182, 0.208, 0.247, 0.235};
  /// Relative grade frequencies (uniform by default).
  std::array<double, 7> grade_weights{1, 1, 1, 1, 1, 1, 1};
  double grade_rate_sd = 0.03;
  double funded_fraction = 0.076;
  /// When nonempty, the traditional rate is planted_intercept + sum(w * x) +
  /// grade_rate_sd * N(0,1) over these numeric traditional columns.
  std::map<std::string, double> planted_coefficients;
  double planted_intercept = 0.0;

  void validate() const {
    if (n_traditional == 0 || n_bidding == 0) throw std::invalid_argument("synth: row counts must be positive");
    if (!(funded_fraction > 0.0 && funded_fraction < 1.0))
      throw std::invalid_argument("synth: funded_fraction must lie in (0,1)");
    if (!(grade_rate_sd >= 0.0)) throw std::invalid_argument("synth: grade_rate_sd must be nonnegative");
    double w = 0.0;
    for (double g : grade_weights) {
      if (g < 0.0) throw std::invalid_argument("synth: negative grade weight");
      w += g;
    }
    if (w <= 0.0) throw std::invalid_argument("synth: grade weights sum to zero");
  }
};

/// One generated applicant with every column of both loan tables.
struct SynthBorrower {
  std::map<std::string, std::string> fields;
  int grade = 0;  // 0 = AA ... 6 = HR
  double traditional_rate = 0.0;
  double bidding_rate = 0.0;  // realized if funded, else the maximum rate
  double funding_latent = 0.0;
  bool funded = false;
};

struct SynthOutput {
  RawTable traditional_raw;
  RawTable bidding_raw;
  Dataset traditional;
  Dataset bidding;  // response BorrowerRate, aux LoanStatus and DescriptionLength
  /// Historical sample: n_portfolio traditional + n_portfolio bidding loans
  /// with all borrower columns plus Id, HistoricalType, HistoricalRate, HistoricalFunded.
  std::string portfolio_csv;
  double funding_threshold = 0.0;
};

namespace synth_detail {

inline const std::vector<std::string>& states() {
  static const std::vector<std::string> v{"AZ", "CA", "CO", "FL", "GA", "IL", "MA", "MD", "MI", "MN",
                                          "MO", "NC", "NJ", "NY", "OH", "PA", "TX", "VA", "WA", "WI"};
  return v;
}
inline const std::vector<std::string>& occupations() {
  static const std::vector<std::string> v{"Accountant/CPA", "Administrative Assistant", "Analyst", "Clerical",
                                          "Computer Programmer", "Construction", "Engineer - Mechanical",
                                          "Executive", "Laborer", "Nurse (RN)", "Professional", "Retail Management",
                                          "Sales - Commission", "Skilled Labor", "Teacher", "Other"};
  return v;
}
inline const std::vector<std::string>& employment() {
  static const std::vector<std::string> v{"Employed", "Full-time", "Other", "Part-time", "Retired", "Self-employed"};
  return v;
}

// Fragments for loan descriptions, from cheerful to gloomy.
inline const std::vector<std::string>& upbeat() {
  static const std::vector<std::string> v{
      "I am a responsible borrower with a great payment history", "thank you for your help",
      "I love my stable job and my income is good", "excellent credit and I always pay on time",
      "happy to answer any questions", "this loan will help my family achieve our dream",
      "I am confident and committed to repaying", "my business is growing and successful"};
  return v;
}
inline const std::vector<std::string>& plain() {
  static const std::vector<std::string> v{"loan to payoff credit cards", "home improvement project",
                                          "car repair and tires", "paying for school tuition",
                                          "consolidate two accounts into one payment", "moving to a new apartment",
                                          "purchase equipment for work", "wedding costs"};
  return v;
}
inline const std::vector<std::string>& gloomy() {
  static const std::vector<std::string> v{
      "I lost my job last year and fell behind", "bad debt from a failed business",
      "struggling with high interest debt", "unfortunately I had medical problems",
      "sorry for the late payments in the past", "my divorce left me with serious bills",
      "I was hurt and could not work", "the situation is difficult and stressful"};
  return v;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.index(v.size())];
}

inline std::string description(Rng& rng) {
  // tone bias per listing, then 1-4 fragments
  const double tone = rng.uniform();
  const std::size_t k = 1 + rng.index(4);
  std::string out;
  for (std::size_t i = 0; i < k; ++i) {
    const double u = rng.uniform();
    const auto& bank = u < 0.25 + 0.5 * tone ? upbeat() : (u < 0.8 + 0.15 * tone ? plain() : gloomy());
    std::string frag = pick(rng, bank);
    if (i == 0) frag[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(frag[0])));
    out += (i ? ". " : "") + frag;
  }
  return out + ".";
}

inline std::size_t pick_grade(Rng& rng, const std::array<double, 7>& w) {
  double total = 0.0;
  for (double x : w) total += x;
  double u = rng.uniform() * total;
  for (std::size_t g = 0; g < 7; ++g) {
    if (u < w[g]) return g;
    u -= w[g];
  }
  return 6;
}

inline std::string num(double v) { return format_double(v); }
inline std::string fixed(double v, int d) { return format_fixed(v, d); }

inline double count_draw(Rng& rng, double mean) {
  // geometric count with the given mean
  const double p = 1.0 / (1.0 + mean);
  double k = 0;
  while (rng.uniform() > p && k < 60) ++k;
  return k;
}

inline SynthBorrower borrower(Rng& rng, const SynthConfig& cfg, const SentimentLexicon& lex) {
  SynthBorrower b;
  const auto g = pick_grade(rng, cfg.grade_weights);
  b.grade = static_cast<int>(g);
  const double gd = static_cast<double>(g);
  auto& f = b.fields;
  static const char* kGrades[] = {"AA", "A", "B", "C", "D", "E", "HR"};
  f["ProsperGrade"] = kGrades[g];

  const double credit = std::clamp(std::round((790.0 - 22.0 * gd + 28.0 * rng.normal()) / 20.0) * 20.0, 600.0, 880.0);
  const double credit_dev = (credit - (790.0 - 22.0 * gd)) / 28.0;
  f["CreditScoreRangeLower"] = num(credit);
  f["ProsperScore"] = num(std::clamp(std::round(10.5 - 1.3 * gd + 1.2 * rng.normal()), 1.0, 11.0));
  const double uterm = rng.uniform();
  const double term = uterm < 0.12 ? 12.0 : (uterm < 0.72 ? 36.0 : 60.0);
  f["Term"] = num(term);
  const double delinq = count_draw(rng, 0.4 + 0.9 * gd);
  f["DelinquenciesLast7Years"] = num(delinq);
  f["CurrentDelinquencies"] = num(rng.bernoulli(0.05 + 0.04 * gd) ? 1.0 + count_draw(rng, 1.0) : 0.0);
  f["AmountDelinquent"] = num(rng.bernoulli(0.04 + 0.03 * gd) ? std::round(rng.uniform(50.0, 8000.0)) : 0.0);
  f["PublicRecordsLast10Years"] = num(rng.bernoulli(0.08 + 0.03 * gd) ? 1.0 + count_draw(rng, 0.3) : 0.0);
  f["ListingCategory"] = num(static_cast<double>(rng.index(21)));
  const double open_lines = 3.0 + count_draw(rng, 6.0);
  f["OpenCreditLines"] = num(open_lines);
  f["CurrentCreditLines"] = num(open_lines + count_draw(rng, 1.0));
  f["TotalCreditLinespast7years"] = num(open_lines + 5.0 + count_draw(rng, 15.0));
  f["OpenRevolvingAccounts"] = num(1.0 + count_draw(rng, 5.0));
  f["OpenRevolvingMonthlyPayment"] = num(std::round(rng.uniform(0.0, 1200.0)));
  f["TotalInquiries"] = num(count_draw(rng, 3.0 + 0.8 * gd));
  f["InquiriesLast6Months"] = num(count_draw(rng, 0.8 + 0.3 * gd));
  f["RevolvingCreditBalance"] = num(std::round(std::exp(rng.normal(8.8, 1.1))));
  f["TradesNeverDelinquent"] = fixed(std::clamp(1.0 - 0.03 * gd - 0.12 * std::fabs(rng.normal()), 0.0, 1.0), 2);
  f["TotalTrades"] = num(5.0 + count_draw(rng, 20.0));
  f["StatedMonthlyIncome"] = fixed(std::exp(rng.normal(8.4 - 0.05 * gd, 0.5)), 2);
  f["AvailableBankcardCredit"] = num(std::round(std::exp(rng.normal(8.5 - 0.25 * gd, 1.2))));
  f["TradesOpenedLast6Months"] = num(count_draw(rng, 0.8));
  f["BankcardUtilization"] = fixed(std::clamp(0.35 + 0.06 * gd + 0.2 * rng.normal(), 0.0, 1.0), 2);
  f["DebtToIncomeRatio"] = fixed(std::clamp(0.2 + 0.02 * gd + 0.1 * rng.normal(), 0.0, 1.5), 2);
  f["LoanAmount"] = num(std::round(std::exp(rng.normal(8.6 - 0.08 * gd, 0.6)) / 100.0) * 100.0 + 1000.0);
  f["EmploymentStatusDuration"] = num(count_draw(rng, 60.0));
  f["Homeownership"] = rng.bernoulli(0.55 - 0.04 * gd) ? "Own" : "Not own";
  f["Occupation"] = pick(rng, occupations());
  f["BorrowerState"] = pick(rng, states());
  f["EmploymentStatus"] = pick(rng, employment());
  const std::string text = description(rng);
  f["Description"] = text;
  const double sentiment = sentiment_score(text, lex);

  // bidding-only fields
  const double images = rng.bernoulli(0.55) ? 1.0 + count_draw(rng, 1.0) : 0.0;
  f["Images"] = num(images);
  f["Duration"] = num(rng.bernoulli(0.7) ? 7.0 : (rng.bernoulli(0.5) ? 10.0 : 14.0));
  const bool open_duration = rng.bernoulli(0.35);
  f["FundingOption"] = open_duration ? "Open for duration" : "Close when funded";
  const bool verified = rng.bernoulli(0.6);
  f["HasVerifiedBankAccount"] = verified ? "True" : "False";
  const double max_rate = std::clamp(cfg.bidding_means[g] + rng.uniform(-0.03, 0.1), 0.05, 0.36);
  f["BorrowerMaximumRate"] = fixed(max_rate, 4);

  // rate deviation driven by observable credit detail
  const double term_z = (term - 42.0) / 14.0;
  const double delinq_z = std::min(delinq, 10.0) / 3.0 - 0.5;
  const double noise = rng.normal();
  const double z = (-0.6 * credit_dev + 0.5 * term_z + 0.4 * delinq_z + 0.45 * noise) / std::sqrt(0.36 + 0.25 + 0.16 + 0.2025);
  const double sd = cfg.grade_rate_sd;
  if (cfg.planted_coefficients.empty()) {
    b.traditional_rate = sd == 0.0 ? cfg.traditional_means[g] : std::clamp(cfg.traditional_means[g] + sd * z, 0.01, 0.5);
  } else {
    double r = cfg.planted_intercept;
    for (const auto& [name, w] : cfg.planted_coefficients) {
      const auto it = f.find(name);
      const auto v = it == f.end() ? std::nullopt : parse_double(it->second);
      if (!v) throw std::invalid_argument("synth: planted feature '" + name + "' is not a numeric column");
      r += w * *v;
    }
    b.traditional_rate = r + sd * rng.normal();
  }
  const double bid_rate = sd == 0.0 ? cfg.bidding_means[g] : std::clamp(cfg.bidding_means[g] + sd * z, 0.01, 0.5);

  // funding propensity: generous maximum rate, clear sentiment peak near 0.68
  const double excess = (max_rate - cfg.bidding_means[g]) / 0.04;
  const double s = (sentiment - 0.68) / 0.3;
  const double sent_term = std::max(-2.5, 1.0 - s * s);
  b.funding_latent = 1.1 * excess + 1.4 * sent_term + 0.5 * std::min(images, 3.0) + 0.6 * (verified ? 1.0 : 0.0) +
                     0.4 * (open_duration ? 1.0 : 0.0) - 0.15 * gd + 0.5 * rng.normal();
  b.bidding_rate = std::min(max_rate, bid_rate);
  return b;
}

inline RawTable table_from(const std::vector<SynthBorrower>& people, const EncodingSchema& schema, bool bidding) {
  RawTable t;
  t.kind = schema.kind;
  for (const auto& r : schema.rules) t.columns.push_back({r.column, r.kind});
  for (const auto& p : people) {
    std::vector<Cell> row;
    for (const auto& c : t.columns) {
      if (c.name == kRateResponse) {
        const double rate = bidding ? (p.funded ? p.bidding_rate : std::stod(p.fields.at("BorrowerMaximumRate")))
                                    : p.traditional_rate;
        row.emplace_back(format_double(rate));
      } else if (c.name == kStatusResponse) {
        row.emplace_back(p.funded ? "Completed" : "Expired");
      } else {
        row.emplace_back(p.fields.at(c.name));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace synth_detail

/// Union of the traditional and bidding feature columns, in schema order.
inline std::vector<std::string> borrower_columns(const EncodingSchema& trad, const EncodingSchema& bid) {
  std::vector<std::string> out;
  for (const auto* s : {&trad, &bid})
    for (const auto& r : s->rules)
      if (!is_response(r.rule) && std::find(out.begin(), out.end(), r.column) == out.end()) out.push_back(r.column);
  return out;
}

inline SynthOutput synth_generate(const SynthConfig& cfg, std::uint64_t seed, const SentimentLexicon& lex,
                                  const EncodingSchema& trad_schema, const EncodingSchema& bid_schema,
                                  const StatusMap& status) {
  cfg.validate();
  using namespace synth_detail;
  SynthOutput out;

  Rng trng(derive_seed(seed, 1));
  std::vector<SynthBorrower> trad;
  trad.reserve(cfg.n_traditional);
  for (std::size_t i = 0; i < cfg.n_traditional; ++i) trad.push_back(borrower(trng, cfg, lex));

  Rng brng(derive_seed(seed, 2));
  std::vector<SynthBorrower> bid;
  bid.reserve(cfg.n_bidding);
  for (std::size_t i = 0; i < cfg.n_bidding; ++i) bid.push_back(borrower(brng, cfg, lex));
  // fund the top share of listings by latent propensity
  std::vector<double> latent;
  for (const auto& b : bid) latent.push_back(b.funding_latent);
  std::sort(latent.begin(), latent.end(), std::greater<>());
  const auto n_funded = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.funded_fraction * static_cast<double>(cfg.n_bidding))));
  out.funding_threshold = latent[std::min(n_funded, latent.size()) - 1];
  for (auto& b : bid) b.funded = b.funding_latent >= out.funding_threshold;

  out.traditional_raw = table_from(trad, trad_schema, false);
  out.bidding_raw = table_from(bid, bid_schema, true);
  out.traditional = encode_dataset(out.traditional_raw, trad_schema, lex, status);
  out.bidding = encode_dataset(out.bidding_raw, bid_schema, lex, status);

  // historical portfolio: traditional loans were all funded at their rate
  Rng prng(derive_seed(seed, 3));
  const auto cols = borrower_columns(trad_schema, bid_schema);
  csv::Writer w;
  csv::Row header{"Id"};
  header.insert(header.end(), cols.begin(), cols.end());
  header.insert(header.end(), {"HistoricalType", "HistoricalRate", "HistoricalFunded"});
  w.row(header);
  for (std::size_t i = 0; i < 2 * cfg.n_portfolio; ++i) {
    auto b = borrower(prng, cfg, lex);
    const bool is_trad = i < cfg.n_portfolio;
    b.funded = is_trad || b.funding_latent >= out.funding_threshold;
    csv::Row row{"P" + std::to_string(i + 1)};
    for (const auto& c : cols) row.push_back(b.fields.at(c));
    row.push_back(is_trad ? "traditional" : "bidding");
    row.push_back(format_double(is_trad ? b.traditional_rate : b.bidding_rate));
    row.push_back(b.funded ? "1" : "0");
    w.row(row);
  }
  out.portfolio_csv = w.str();
  return out;
}

/// Uses the shipped lexicon, schemas and status map.
inline SynthOutput synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  static const SentimentLexicon lex = SentimentLexicon::load_default();
  return synth_generate(cfg, seed, lex, default_schema(DatasetKind::traditional), default_schema(DatasetKind::bidding),
                        StatusMap::load_default());
}

}  // namespace p2pl
