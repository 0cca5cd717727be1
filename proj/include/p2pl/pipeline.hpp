#pragma once

// End-to-end steps shared by the command-line tool and the tests: run
// configuration, loading and encoding both loan tables, task datasets,
// cross-validation with per-run feature selection, and advisor training.

#include "p2pl/evaluation.hpp"
#include "p2pl/recommender.hpp"
#include "p2pl/select.hpp"
#include "p2pl/sentiment_opt.hpp"
#include "p2pl/synth.hpp"

#include <charconv>
#include <sstream>
#include <string>

namespace p2pl {

/// Prediction problems of the advisor.
enum class TaskKind { trad_rate, bid_rate, success };

inline std::string_view to_string(TaskKind t) {
  switch (t) {
    case TaskKind::trad_rate: return "trad-rate";
    case TaskKind::bid_rate: return "bid-rate";
    case TaskKind::success: return "success";
  }
  return "?";
}

inline TaskKind parse_task_kind(std::string_view s) {
  if (s == "trad-rate") return TaskKind::trad_rate;
  if (s == "bid-rate") return TaskKind::bid_rate;
  if (s == "success") return TaskKind::success;
  throw std::invalid_argument("unknown task '" + std::string(s) + "' (expected trad-rate|bid-rate|success)");
}

inline Task task_of(TaskKind t) { return t == TaskKind::success ? Task::classification : Task::regression; }

/// How the feature subset of a model is chosen.
enum class Selection { none, baseline, forward, backward, recursive };

inline std::string_view to_string(Selection s) {
  switch (s) {
    case Selection::none: return "none";
    case Selection::baseline: return "baseline";
    case Selection::forward: return "forward";
    case Selection::backward: return "backward";
    case Selection::recursive: return "recursive";
  }
  return "?";
}

inline Selection parse_selection(std::string_view s) {
  if (s == "none") return Selection::none;
  if (s == "baseline") return Selection::baseline;
  if (s == "forward") return Selection::forward;
  if (s == "backward") return Selection::backward;
  if (s == "recursive") return Selection::recursive;
  throw std::invalid_argument("unknown selection '" + std::string(s) +
                              "' (expected forward|backward|recursive|none|baseline)");
}

struct RunConfig {
  std::string traditional;  // raw CSV paths
  std::string bidding;
  std::string lexicon;  // empty: shipped lexicon
  std::string traditional_schema;
  std::string bidding_schema;
  std::string status_map;
  std::string out = "out";
  std::uint64_t seed = 0;
  ModelKind model = ModelKind::random_forest;
  Selection select = Selection::recursive;
  SplitPlan plan{0.8, 5, 0};
  std::size_t sample_traditional = 10000;  // 0: every row
  std::size_t per_class = 908;             // balanced success sample; 0: size of the smaller class
  int trees = 100;
  SvmKernel svm_kernel = SvmKernel::linear;
  int knn_k = 5;
  double grid_step = 0.01;
  SynthConfig synth;

  ModelSpec spec(Task task) const { return spec(model, task); }

  ModelSpec spec(ModelKind kind, Task task) const {
    ModelSpec s = ModelSpec::make(kind, task, seed);
    if (auto* f = std::get_if<ForestParams>(&s.params)) f->trees = trees;
    if (auto* v = std::get_if<SvmParams>(&s.params)) v->kernel = svm_kernel;
    if (auto* k = std::get_if<KnnParams>(&s.params)) k->k = knn_k;
    return s;
  }

  SplitPlan split_plan() const { return SplitPlan{plan.ratio, plan.runs, seed}; }

  /// Applies `key = value` settings; unknown keys are errors.
  void apply(const std::string& key, const std::string& value, const std::string& where = "config") {
    const auto num = [&]() {
      const auto v = parse_double(value);
      if (!v) throw std::invalid_argument(where + ": '" + key + "' needs a number, got '" + value + "'");
      return *v;
    };
    const auto count = [&]() {
      const double v = num();
      if (v < 0 || v != std::floor(v)) throw std::invalid_argument(where + ": '" + key + "' needs a whole number");
      return static_cast<std::size_t>(v);
    };
    if (key == "traditional") traditional = value;
    else if (key == "bidding") bidding = value;
    else if (key == "lexicon") lexicon = value;
    else if (key == "traditional_schema") traditional_schema = value;
    else if (key == "bidding_schema") bidding_schema = value;
    else if (key == "status_map") status_map = value;
    else if (key == "out") out = value;
    else if (key == "seed") {
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
      if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
        throw std::invalid_argument(where + ": seed must be an unsigned 64-bit integer");
    } else if (key == "model") model = parse_model_kind(value);
    else if (key == "select") select = parse_selection(value);
    else if (key == "split_ratio") plan.ratio = num();
    else if (key == "split_runs") plan.runs = count();
    else if (key == "sample_traditional") sample_traditional = count();
    else if (key == "per_class") per_class = count();
    else if (key == "trees") trees = static_cast<int>(count());
    else if (key == "svm_kernel") {
      if (value != "linear" && value != "rbf") throw std::invalid_argument(where + ": svm_kernel is linear or rbf");
      svm_kernel = value == "rbf" ? SvmKernel::rbf : SvmKernel::linear;
    } else if (key == "knn_k") knn_k = static_cast<int>(count());
    else if (key == "grid_step") grid_step = num();
    else if (key == "synth_traditional") synth.n_traditional = count();
    else if (key == "synth_bidding") synth.n_bidding = count();
    else if (key == "synth_portfolio") synth.n_portfolio = count();
    else if (key == "synth_rate_sd") synth.grade_rate_sd = num();
    else if (key == "synth_funded_fraction") synth.funded_fraction = num();
    else throw std::invalid_argument(where + ": unknown setting '" + key + "'");
  }

  void validate() const {
    plan.validate();
    if (trees < 1) throw std::invalid_argument("trees must be positive");
    if (knn_k < 1) throw std::invalid_argument("knn_k must be positive");
    sentiment_grid(grid_step);
    synth.validate();
  }

  static RunConfig parse(std::string_view text, const std::string& origin = "<config>") {
    RunConfig c;
    for (const auto& kv : parse_key_values(text, origin))
      c.apply(kv.key, kv.value, origin + ":" + std::to_string(kv.line));
    c.validate();
    return c;
  }

  static RunConfig load(const std::string& path) { return parse(read_file(path), path); }

  std::string to_text() const {
    std::ostringstream os;
    os << "traditional = " << traditional << "\n"
       << "bidding = " << bidding << "\n"
       << "lexicon = " << lexicon << "\n"
       << "traditional_schema = " << traditional_schema << "\n"
       << "bidding_schema = " << bidding_schema << "\n"
       << "status_map = " << status_map << "\n"
       << "out = " << out << "\n"
       << "seed = " << seed << "\n"
       << "model = " << to_string(model) << "\n"
       << "select = " << to_string(select) << "\n"
       << "split_ratio = " << format_double(plan.ratio) << "\n"
       << "split_runs = " << plan.runs << "\n"
       << "sample_traditional = " << sample_traditional << "\n"
       << "per_class = " << per_class << "\n"
       << "trees = " << trees << "\n"
       << "svm_kernel = " << to_string(svm_kernel) << "\n"
       << "knn_k = " << knn_k << "\n"
       << "grid_step = " << format_double(grid_step) << "\n"
       << "synth_traditional = " << synth.n_traditional << "\n"
       << "synth_bidding = " << synth.n_bidding << "\n"
       << "synth_portfolio = " << synth.n_portfolio << "\n"
       << "synth_rate_sd = " << format_double(synth.grade_rate_sd) << "\n"
       << "synth_funded_fraction = " << format_double(synth.funded_fraction) << "\n";
    return os.str();
  }

  SentimentLexicon load_lexicon() const {
    return lexicon.empty() ? SentimentLexicon::load_default() : SentimentLexicon::load(lexicon);
  }
  EncodingSchema schema(DatasetKind kind) const {
    const std::string& p = kind == DatasetKind::traditional ? traditional_schema : bidding_schema;
    return p.empty() ? default_schema(kind) : EncodingSchema::load(p, kind);
  }
  StatusMap load_status_map() const {
    return status_map.empty() ? StatusMap::load_default() : StatusMap::parse(read_file(status_map), status_map);
  }
};

/// A cleaned, encoded loan table with the schema resolved against it.
struct LoadedTable {
  RawTable cleaned;
  EncodingSchema schema;  // resolved
  Dataset data;
};

inline LoadedTable prepare_table(const RawTable& raw, const EncodingSchema& schema, const SentimentLexicon& lex,
                                 const StatusMap& status) {
  LoadedTable t;
  t.cleaned = filter_table(raw, FilterPolicy::defaults(schema));
  t.schema = resolve_schema(t.cleaned, schema);
  t.data = encode_dataset(t.cleaned, t.schema, lex, status);
  return t;
}

inline LoadedTable load_prepared(const std::string& path, DatasetKind kind, const RunConfig& cfg,
                                 const SentimentLexicon& lex) {
  if (path.empty())
    throw std::invalid_argument(std::string("no ") + std::string(to_string(kind)) + " table given (--" +
                                std::string(to_string(kind)) + " or config key)");
  const EncodingSchema schema = cfg.schema(kind);
  return prepare_table(load_table(path, schema, default_aliases()), schema, lex, cfg.load_status_map());
}

/// Dataset for one prediction problem:
///  trad-rate: up to sample_traditional traditional loans;
///  bid-rate: funded bidding loans;
///  success: balanced funded / non-funded bidding loans, response LoanStatus.
inline Dataset task_dataset(TaskKind task, const Dataset& traditional, const Dataset& bidding, const RunConfig& cfg) {
  switch (task) {
    case TaskKind::trad_rate:
      return cfg.sample_traditional ? sample_rows(traditional, cfg.sample_traditional, derive_seed(cfg.seed, 101))
                                    : traditional;
    case TaskKind::bid_rate:
      return take_rows(bidding, rows_where(bidding, kStatusResponse, 1.0));
    case TaskKind::success: {
      const Dataset s = with_response(bidding, std::string(kStatusResponse));
      const auto funded = rows_where(s, s.response_name, 1.0).size();
      const auto open = rows_where(s, s.response_name, 0.0).size();
      const std::size_t per = cfg.per_class ? std::min({cfg.per_class, funded, open}) : std::min(funded, open);
      return balanced_sample(s, per, derive_seed(cfg.seed, 102));
    }
  }
  throw std::invalid_argument("unknown task");
}

/// Feature subset chosen on `d` alone (inner splits drawn from `seed`).
inline std::vector<std::string> choose_features(Selection method, const ModelSpec& spec, const Dataset& d,
                                                std::uint64_t seed, SelectionReport* report = nullptr) {
  switch (method) {
    case Selection::none: return d.feature_names;
    case Selection::baseline: {
      for (const auto& f : baseline_preset())
        if (!d.has_column(f)) throw MissingFeature(f);
      return baseline_preset();
    }
    case Selection::forward:
    case Selection::backward:
    case Selection::recursive: {
      const auto m = method == Selection::forward    ? SelectMethod::forward
                     : method == Selection::backward ? SelectMethod::backward
                                                     : SelectMethod::recursive;
      SelectionReport r = select_features_by(m, spec, d, inner_plan(seed));
      if (report) *report = r;
      return r.selected;
    }
  }
  throw std::invalid_argument("unknown selection");
}

struct NestedCV {
  CVReport report;
  std::vector<std::vector<std::string>> run_features;
};

/// Monte-Carlo CV where the feature subset is chosen inside each training
/// split, so selection never sees the test rows.
inline NestedCV montecarlo_cv_selected(const ModelSpec& spec, const Dataset& d, const SplitPlan& plan,
                                       Selection method) {
  NestedCV out;
  CVReport& rep = out.report;
  rep.spec = spec;
  rep.metric = spec.task == Task::classification ? "accuracy" : "r2";
  const auto splits = split_montecarlo(d, plan);
  for (std::size_t r = 0; r < splits.size(); ++r) {
    ModelSpec run_spec = spec;
    run_spec.seed = derive_seed(spec.seed, r);
    const auto features = choose_features(method, run_spec, splits[r].train, derive_seed(plan.seed, 1000 + r));
    const TrainedModel m = fit(run_spec, select_features(splits[r].train, features));
    const Dataset test = select_features(splits[r].test, features);
    if (spec.task == Task::classification) {
      const Vector labels = predict_labels(m, test);
      rep.runs.push_back(accuracy(test.y, labels));
      rep.confusions.push_back(confusion(test.y, labels));
    } else {
      rep.runs.push_back(r_squared(test.y, predict(m, test)));
    }
    out.run_features.push_back(features);
  }
  double s = 0.0;
  for (double v : rep.runs) s += v;
  rep.mean = s / static_cast<double>(rep.runs.size());
  rep.features = out.run_features.front();
  return out;
}

struct TrainedTask {
  TrainedModel model;
  SelectionReport selection;  // empty trajectory when no search ran
};

inline TrainedTask train_task(TaskKind task, const Dataset& d, const RunConfig& cfg) {
  const ModelSpec spec = cfg.spec(task_of(task));
  SelectionReport report;
  const auto features = choose_features(cfg.select, spec, d, derive_seed(cfg.seed, 200 + static_cast<int>(task)), &report);
  if (report.selected.empty()) {
    report.selected = features;
  }
  return {fit(spec, select_features(d, features)), report};
}

/// Trains the three predictors and finds the optimal sentiment on the
/// non-funded bidding loans.
inline Advisor train_advisor(const LoadedTable& traditional, const LoadedTable& bidding, const RunConfig& cfg) {
  auto trad = train_task(TaskKind::trad_rate, task_dataset(TaskKind::trad_rate, traditional.data, bidding.data, cfg), cfg);
  auto bid = train_task(TaskKind::bid_rate, task_dataset(TaskKind::bid_rate, traditional.data, bidding.data, cfg), cfg);
  auto suc = train_task(TaskKind::success, task_dataset(TaskKind::success, traditional.data, bidding.data, cfg), cfg);
  Advisor a{std::move(trad.model), std::move(bid.model), std::move(suc.model), traditional.schema, bidding.schema,
            std::nullopt, cfg.seed};
  const Dataset open = take_rows(with_response(bidding.data, std::string(kStatusResponse)),
                                 rows_where(bidding.data, kStatusResponse, 0.0));
  if (open.rows() > 0) a.g_star = optimal_sentiment(sweep_sentiment(a.success, open, cfg.grid_step)).first;
  a.validate();
  return a;
}

}  // namespace p2pl
