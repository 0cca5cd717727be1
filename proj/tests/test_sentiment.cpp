#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace p2pl;

namespace {
const SentimentLexicon& lex() {
  static const SentimentLexicon l = SentimentLexicon::load_default();
  return l;
}
}  // namespace

// Reference compound scores from the original lexicon-based analyzer.
struct Oracle {
  const char* text;
  double compound;
};

class SentimentOracle : public ::testing::TestWithParam<Oracle> {};

TEST_P(SentimentOracle, MatchesReferenceAnalyzer) {
  EXPECT_NEAR(sentiment_score(GetParam().text, lex()), GetParam().compound, 1e-4) << GetParam().text;
}

INSTANTIATE_TEST_SUITE_P(Reference, SentimentOracle,
                         ::testing::Values(Oracle{"Payoff Credit Cards", 0.3818}, Oracle{"I am not happy", -0.4585},
                                           Oracle{"very good loan", 0.4927}, Oracle{"debt consolidation", -0.3612},
                                           Oracle{"", 0.0},
                                           Oracle{"Lender seeing Prosper from borrower's point-of-view", 0.0}));

TEST(Sentiment, CompoundNormalizationClosedForm) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const double s = rng.uniform(-20.0, 20.0);
    EXPECT_NEAR(compound_normalize(s), s / std::sqrt(s * s + 15.0), 1e-12);
  }
  EXPECT_EQ(compound_normalize(0.0), 0.0);
}

TEST(Sentiment, ScoresStayInUnitInterval) {
  std::string gushing;
  for (int i = 0; i < 200; ++i) gushing += "excellent wonderful ";
  EXPECT_LE(sentiment_score(gushing, lex()), 1.0);
  EXPECT_GT(sentiment_score(gushing, lex()), 0.99);
  std::string grim;
  for (int i = 0; i < 200; ++i) grim += "terrible awful ";
  EXPECT_GE(sentiment_score(grim, lex()), -1.0);
}

TEST(Sentiment, NegationFlipsPolarity) {
  const double pos = sentiment_score("happy", lex());
  const double neg = sentiment_score("not happy", lex());
  EXPECT_GT(pos, 0.0);
  EXPECT_LT(neg, 0.0);
  EXPECT_LT(sentiment_score("isn't happy", lex()), 0.0);
}

TEST(Sentiment, TokenizerLowercasesAndSplitsPunctuation) {
  EXPECT_EQ(tokenize("Payoff, CREDIT-cards!"), (std::vector<std::string>{"payoff", "credit", "cards"}));
  EXPECT_EQ(tokenize("borrower's"), (std::vector<std::string>{"borrower's"}));
  EXPECT_TRUE(tokenize("  ...  ").empty());
}

TEST(Sentiment, CaseInsensitive) {
  EXPECT_DOUBLE_EQ(sentiment_score("GOOD LOAN", lex()), sentiment_score("good loan", lex()));
}

TEST(Sentiment, LexiconFileErrors) {
  const auto dir = p2pl::testing::scratch_dir("lexicon");
  write_file(dir + "/bad.tsv", "word no-tab\n");
  EXPECT_THROW(SentimentLexicon::load(dir + "/bad.tsv"), DataError);
  write_file(dir + "/empty.tsv", "# only a comment\n");
  EXPECT_THROW(SentimentLexicon::load(dir + "/empty.tsv"), DataError);
  EXPECT_THROW(SentimentLexicon::load(dir + "/missing.tsv"), DataError);
}
