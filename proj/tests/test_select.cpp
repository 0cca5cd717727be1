#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace p2pl;
using p2pl::testing::contains_all;
using p2pl::testing::planted_linear;

namespace {

ModelSpec linear_spec() { return ModelSpec::make(ModelKind::linear, Task::regression); }

Dataset x0_x2_example() {
  Rng rng(31);
  const Matrix X = p2pl::testing::gaussian_matrix(rng, 200, 5);
  Vector y(200);
  for (Eigen::Index i = 0; i < 200; ++i) y(i) = 2.0 * X(i, 0) + 1.5 * X(i, 2) + 0.3 * rng.normal();
  return p2pl::testing::make_dataset(X, y);
}

const std::vector<SelectMethod> kGreedy{SelectMethod::forward, SelectMethod::backward, SelectMethod::recursive};

}  // namespace

class SelectMethods : public ::testing::TestWithParam<SelectMethod> {};

TEST_P(SelectMethods, RecoversInformativePair) {
  const auto rep = select_features_by(GetParam(), linear_spec(), x0_x2_example(), inner_plan(1));
  EXPECT_TRUE(contains_all(rep.selected, {"x0", "x2"})) << rep.to_text();
  EXPECT_EQ(rep.method, GetParam());
  EXPECT_FALSE(rep.trajectory.empty());
}

TEST_P(SelectMethods, FinalScoreIsReproducibleFromSelectedSubset) {
  const Dataset d = x0_x2_example();
  const auto rep = select_features_by(GetParam(), linear_spec(), d, inner_plan(2));
  EXPECT_DOUBLE_EQ(rep.final_score, montecarlo_cv(linear_spec(), d, inner_plan(2), rep.selected).mean);
}

TEST_P(SelectMethods, NoiselessDataMatchesExhaustiveOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto planted = planted_linear(seed, 150, 6, 0.0);
    const auto oracle = exhaustive_oracle(linear_spec(), planted.data, inner_plan(seed));
    const auto rep = select_features_by(GetParam(), linear_spec(), planted.data, inner_plan(seed));
    EXPECT_EQ(oracle.selected, planted.informative);
    EXPECT_NEAR(rep.final_score, oracle.final_score, 1e-4) << "seed " << seed;
    EXPECT_TRUE(contains_all(rep.selected, planted.informative));
  }
}

TEST_P(SelectMethods, SingleFeatureIsKept) {
  Rng rng(3);
  const Matrix X = p2pl::testing::gaussian_matrix(rng, 40, 1);
  const auto rep = select_features_by(GetParam(), linear_spec(), p2pl::testing::make_dataset(X, 3.0 * X.col(0)),
                                      inner_plan(3));
  EXPECT_EQ(rep.selected, std::vector<std::string>{"x0"});
}

TEST_P(SelectMethods, SameSeedSameSelection) {
  const Dataset d = x0_x2_example();
  ModelSpec spec = ModelSpec::make(ModelKind::random_forest, Task::regression, 8);
  std::get<ForestParams>(spec.params).trees = 8;
  const auto a = select_features_by(GetParam(), spec, d, inner_plan(4));
  const auto b = select_features_by(GetParam(), spec, d, inner_plan(4));
  EXPECT_EQ(a.to_text(), b.to_text());
}

INSTANTIATE_TEST_SUITE_P(Greedy, SelectMethods, ::testing::ValuesIn(kGreedy),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Select, ForwardOnPureNoiseStaysSmall) {
  int small = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(static_cast<std::uint64_t>(500 + s));
    const Matrix X = p2pl::testing::gaussian_matrix(rng, 120, 6);
    const Vector y = p2pl::testing::gaussian_matrix(rng, 120, 1).col(0);
    const auto rep = forward_select(linear_spec(), p2pl::testing::make_dataset(X, y), inner_plan(static_cast<std::uint64_t>(s)));
    if (rep.selected.size() <= 2) ++small;
  }
  EXPECT_GE(small, 18);
}

TEST(Select, ForwardPicksOneOfADuplicatedPair) {
  Rng rng(9);
  Matrix X = p2pl::testing::gaussian_matrix(rng, 150, 4);
  X.col(1) = X.col(0);
  Vector y = 2.0 * X.col(0) + X.col(3);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.1 * rng.normal();
  const auto rep = forward_select(linear_spec(), p2pl::testing::make_dataset(X, y), inner_plan(9));
  const bool has0 = contains_all(rep.selected, {"x0"}), has1 = contains_all(rep.selected, {"x1"});
  EXPECT_NE(has0, has1) << rep.to_text();
  EXPECT_TRUE(contains_all(rep.selected, {"x3"}));
}

TEST(Select, ForwardTrajectoryImproves) {
  const auto rep = forward_select(linear_spec(), x0_x2_example(), inner_plan(5));
  for (std::size_t i = 1; i < rep.trajectory.size(); ++i) {
    EXPECT_GT(rep.trajectory[i].score, rep.trajectory[i - 1].score + kSelectionEpsilon);
    EXPECT_EQ(rep.trajectory[i].size, i + 1);
  }
}

TEST(Select, ExhaustivePrefersSmallestNearBestSubset) {
  const auto planted = planted_linear(17, 100, 4, 0.0);
  const auto rep = exhaustive_oracle(linear_spec(), planted.data, inner_plan(0));
  EXPECT_EQ(rep.selected, planted.informative);
  EXPECT_NEAR(rep.final_score, 1.0, 1e-9);
}

TEST(Select, ExhaustiveRefusesWideData) {
  const auto planted = planted_linear(1, 40, 13, 0.0);
  EXPECT_THROW(exhaustive_oracle(linear_spec(), planted.data, inner_plan(0)), std::invalid_argument);
  EXPECT_THROW(exhaustive_oracle(linear_spec(), planted.data, inner_plan(0), 13), std::invalid_argument);
}

TEST(Select, BaselinePresetNamesDescriptionLength) {
  const auto b = baseline_preset();
  EXPECT_EQ(b.size(), 5u);
  EXPECT_TRUE(contains_all(b, {"BorrowerMaximumRate", std::string(kDescriptionLength)}));
  EXPECT_EQ(description_length("caf\xC3\xA9"), 4.0);
}

TEST(Select, ReportTextListsSelection) {
  const auto rep = forward_select(linear_spec(), x0_x2_example(), inner_plan(1));
  const std::string text = rep.to_text();
  EXPECT_NE(text.find("method = forward"), std::string::npos);
  EXPECT_NE(text.find("step,size,score,features"), std::string::npos);
}
