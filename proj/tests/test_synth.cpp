#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace p2pl;

namespace {

SynthConfig small() {
  SynthConfig c;
  c.n_traditional = 300;
  c.n_bidding = 400;
  c.n_portfolio = 20;
  return c;
}

}  // namespace

TEST(Synth, SameSeedSameCorpus) {
  const auto a = synth_generate(small(), 3);
  const auto b = synth_generate(small(), 3);
  const auto c = synth_generate(small(), 4);
  EXPECT_EQ(a.traditional_raw.to_csv(), b.traditional_raw.to_csv());
  EXPECT_EQ(a.bidding_raw.to_csv(), b.bidding_raw.to_csv());
  EXPECT_EQ(a.portfolio_csv, b.portfolio_csv);
  EXPECT_NE(a.bidding_raw.to_csv(), c.bidding_raw.to_csv());
}

TEST(Synth, SizesAndFundedShare) {
  const auto s = synth_generate(small(), 5);
  EXPECT_EQ(s.traditional.rows(), 300u);
  EXPECT_EQ(s.bidding.rows(), 400u);
  EXPECT_EQ(s.bidding.column(kStatusResponse).sum(), 30.0);  // round(0.076 * 400)
  EXPECT_EQ(parse_portfolio(s.portfolio_csv).size(), 40u);
}

TEST(Synth, ZeroSpreadGivesGradeMeans) {
  SynthConfig c = small();
  c.grade_rate_sd = 0.0;
  const auto s = synth_generate(c, 6);
  const Vector g = s.traditional.column("ProsperGrade");
  for (Eigen::Index i = 0; i < g.size(); ++i)
    EXPECT_EQ(s.traditional.y(i), c.traditional_means[static_cast<std::size_t>(g(i)) - 1]);
}

TEST(Synth, PlantedCoefficientsDriveTraditionalRate) {
  SynthConfig c = small();
  c.grade_rate_sd = 0.0;
  c.planted_intercept = 0.05;
  c.planted_coefficients = {{"LoanAmount", 1e-5}};
  const auto s = synth_generate(c, 7);
  const Vector amount = s.traditional.column("LoanAmount");
  for (Eigen::Index i = 0; i < amount.size(); ++i) EXPECT_NEAR(s.traditional.y(i), 0.05 + 1e-5 * amount(i), 1e-12);
  c.planted_coefficients = {{"ProsperGrade", 1.0}};
  EXPECT_THROW(synth_generate(c, 7), std::invalid_argument);
}

TEST(Synth, ValidationRejectsBadSettings) {
  SynthConfig c = small();
  c.n_bidding = 0;
  EXPECT_THROW(synth_generate(c, 1), std::invalid_argument);
  c = small();
  c.funded_fraction = 1.0;
  EXPECT_THROW(synth_generate(c, 1), std::invalid_argument);
  c = small();
  c.grade_weights = {0, 0, 0, 0, 0, 0, 0};
  EXPECT_THROW(synth_generate(c, 1), std::invalid_argument);
}

TEST(Synth, RawTablesSurviveIngestUnchanged) {
  const auto s = synth_generate(small(), 8);
  const auto lex = SentimentLexicon::load_default();
  const auto t = prepare_table(s.traditional_raw, default_schema(DatasetKind::traditional), lex,
                               StatusMap::load_default());
  EXPECT_EQ(t.cleaned.rows.size(), 300u);
  EXPECT_EQ(t.data.rows(), 300u);
}

TEST(Synth, FundedLoansClusterAroundPlantedSentiment) {
  SynthConfig c;
  c.n_traditional = 10;
  c.n_bidding = 4000;
  c.n_portfolio = 0;
  const auto s = synth_generate(c, 9);
  const Vector sent = s.bidding.column(kSentimentFeature), funded = s.bidding.column(kStatusResponse);
  double near_f = 0, all_f = 0, near = 0;
  for (Eigen::Index i = 0; i < sent.size(); ++i) {
    const bool close = std::fabs(sent(i) - 0.68) < 0.2;
    near += close;
    all_f += funded(i);
    near_f += close && funded(i) == 1.0;
  }
  EXPECT_GT(near_f / near, all_f / static_cast<double>(sent.size()));
}
