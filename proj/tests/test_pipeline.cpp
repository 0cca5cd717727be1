#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace p2pl;
using p2pl::testing::small_world;

TEST(TaskNames, ParseAndPrint) {
  for (auto t : {TaskKind::trad_rate, TaskKind::bid_rate, TaskKind::success})
    EXPECT_EQ(parse_task_kind(to_string(t)), t);
  EXPECT_THROW(parse_task_kind("rate"), std::invalid_argument);
  EXPECT_EQ(task_of(TaskKind::success), Task::classification);
  for (auto s : {Selection::none, Selection::baseline, Selection::forward, Selection::backward, Selection::recursive})
    EXPECT_EQ(parse_selection(to_string(s)), s);
  EXPECT_THROW(parse_selection("lasso"), std::invalid_argument);
}

TEST(TaskDataset, ShapesFollowTask) {
  const auto& w = small_world();
  const Dataset trad = task_dataset(TaskKind::trad_rate, w.traditional.data, w.bidding.data, w.cfg);
  EXPECT_EQ(trad.rows(), 1000u);
  EXPECT_EQ(trad.response_name, std::string(kRateResponse));

  const Dataset bid = task_dataset(TaskKind::bid_rate, w.traditional.data, w.bidding.data, w.cfg);
  EXPECT_EQ(static_cast<double>(bid.rows()), w.bidding.data.column(kStatusResponse).sum());
  EXPECT_TRUE((bid.column(kStatusResponse).array() == 1.0).all());

  const Dataset suc = task_dataset(TaskKind::success, w.traditional.data, w.bidding.data, w.cfg);
  EXPECT_EQ(suc.response_name, std::string(kStatusResponse));
  EXPECT_EQ(2.0 * suc.y.sum(), static_cast<double>(suc.rows()));
  EXPECT_EQ(suc.rows(), bid.rows() * 2);
  EXPECT_FALSE(suc.feature_index(kRateResponse).has_value());
}

TEST(TaskDataset, PerClassCapsBalancedSample) {
  const auto& w = small_world();
  RunConfig cfg = w.cfg;
  cfg.per_class = 50;
  EXPECT_EQ(task_dataset(TaskKind::success, w.traditional.data, w.bidding.data, cfg).rows(), 100u);
}

TEST(ChooseFeatures, BaselineNeedsItsColumns) {
  const auto& w = small_world();
  const Dataset suc = task_dataset(TaskKind::success, w.traditional.data, w.bidding.data, w.cfg);
  const ModelSpec spec = w.cfg.spec(Task::classification);
  EXPECT_EQ(choose_features(Selection::baseline, spec, suc, 1), baseline_preset());
  EXPECT_EQ(choose_features(Selection::none, spec, suc, 1), suc.feature_names);
  EXPECT_THROW(choose_features(Selection::baseline, spec, select_features(suc, {"ProsperGrade"}), 1),
               MissingFeature);
}

TEST(NestedCv, SelectionPerRunAndDeterministic) {
  const auto& w = small_world();
  Dataset bid = task_dataset(TaskKind::bid_rate, w.traditional.data, w.bidding.data, w.cfg);
  bid = select_features(bid, {"BorrowerMaximumRate", "ProsperGrade", "LoanAmount", "DebtToIncomeRatio"});
  const ModelSpec spec = ModelSpec::make(ModelKind::linear, Task::regression, 3);
  const SplitPlan plan{0.8, 3, 4};
  const NestedCV a = montecarlo_cv_selected(spec, bid, plan, Selection::forward);
  const NestedCV b = montecarlo_cv_selected(spec, bid, plan, Selection::forward);
  ASSERT_EQ(a.run_features.size(), 3u);
  EXPECT_EQ(a.run_features, b.run_features);
  EXPECT_EQ(a.report.runs, b.report.runs);
  for (const auto& f : a.run_features) EXPECT_TRUE(p2pl::testing::contains_all(f, {"BorrowerMaximumRate"}));
  // with no selection it reduces to the plain estimate
  const NestedCV none = montecarlo_cv_selected(spec, bid, plan, Selection::none);
  EXPECT_EQ(none.report.runs, montecarlo_cv(spec, bid, plan).runs);
}

TEST(Advisor, TrainingIsDeterministic) {
  const auto& w = small_world();
  const Advisor again = train_advisor(w.traditional, w.bidding, w.cfg);
  EXPECT_EQ(model_to_json(again.success).dump(), model_to_json(w.advisor.success).dump());
  EXPECT_EQ(model_to_json(again.trad_rate).dump(), model_to_json(w.advisor.trad_rate).dump());
  EXPECT_EQ(again.g_star, w.advisor.g_star);
}

TEST(Advisor, ModelsHaveExpectedTasks) {
  const auto& a = small_world().advisor;
  EXPECT_EQ(a.trad_rate.task(), Task::regression);
  EXPECT_EQ(a.bid_rate.task(), Task::regression);
  EXPECT_EQ(a.success.task(), Task::classification);
  EXPECT_TRUE(a.bid_rate.uses_feature("BorrowerMaximumRate"));
}

TEST(RunConfigFile, LoadsAndRejects) {
  const auto dir = p2pl::testing::scratch_dir("config");
  write_file(dir + "/run.cfg", "seed = 9\nmodel = svm\nselect = forward\nsplit_runs = 3\n");
  const RunConfig c = RunConfig::load(dir + "/run.cfg");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.model, ModelKind::svm);
  EXPECT_EQ(c.plan.runs, 3u);
  EXPECT_THROW(RunConfig::load(dir + "/absent.cfg"), DataError);
}

TEST(LoadPrepared, EmptyPathIsUsageError) {
  const auto& w = small_world();
  EXPECT_THROW(load_prepared("", DatasetKind::bidding, w.cfg, w.lex), std::invalid_argument);
  EXPECT_THROW(load_prepared("/nonexistent/table.csv", DatasetKind::bidding, w.cfg, w.lex), DataError);
}
