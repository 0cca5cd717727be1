#pragma once

// The p2pl command-line program. Every command writes its reports under
// --out; the same flags and seed always give byte-identical files.

#include "p2pl/pipeline.hpp"
#include "p2pl/service.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace p2pl::cli {

/// Exit status for a bad command line or flag value.
inline constexpr int kUsageError = 2;
/// Exit status for unreadable or inconsistent data.
inline constexpr int kDataError = 1;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Flag values as given; unset flags leave the config untouched.
struct Flags {
  std::string config;
  std::optional<std::string> seed, model, select, out, traditional, bidding, grid_step, trees;
  std::string task, input, bundle, bind = "127.0.0.1:8080";
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"Loan-type advisor for peer-to-peer lending borrowers", "p2pl"};
    app.require_subcommand(1);
    app.fallthrough(false);

    struct Cmd {
      const char* name;
      const char* help;
      void (Runner::*fn)();
    };
    const Cmd commands[] = {
        {"ingest", "clean and encode loan tables", &Runner::ingest},
        {"analyze-grades", "per-grade traditional vs bidding rate comparison", &Runner::analyze_grades},
        {"cv", "Monte-Carlo cross-validation of one task", &Runner::cross_validate},
        {"select", "feature selection for one task", &Runner::select},
        {"sweep-sentiment", "optimal description sentiment and funding uplift", &Runner::sweep},
        {"train", "train the advisor bundle", &Runner::train},
        {"recommend", "recommend a loan type for each borrower record", &Runner::recommend},
        {"portfolio", "compare recommendations with historical outcomes", &Runner::portfolio},
        {"synth", "write a seeded synthetic loan corpus", &Runner::synth},
        {"serve", "HTTP advisor service", &Runner::serve},
    };
    std::vector<std::pair<CLI::App*, void (Runner::*)()>> subs;
    for (const auto& c : commands) {
      CLI::App* s = app.add_subcommand(c.name, c.help);
      add_common(*s);
      const std::string name = c.name;
      if (name == "cv" || name == "select")
        s->add_option("--task", flags_.task, "trad-rate | bid-rate | success")->required();
      if (name == "recommend" || name == "portfolio")
        s->add_option("--input", flags_.input, "borrower CSV (portfolio: with historical columns)")->required();
      if (name == "recommend" || name == "portfolio" || name == "serve")
        s->add_option("--bundle", flags_.bundle, "trained advisor directory")->required();
      if (name == "sweep-sentiment") s->add_option("--bundle", flags_.bundle, "use this bundle's success model");
      if (name == "train") s->add_option("--bundle", flags_.bundle, "bundle directory (default <out>/bundle)");
      if (name == "serve") s->add_option("--bind", flags_.bind, "host:port")->capture_default_str();
      subs.emplace_back(s, c.fn);
    }

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      err_ << "p2pl: " << e.what() << "\n" << app.help();
      return kUsageError;
    }

    try {
      cfg_ = flags_.config.empty() ? RunConfig{} : RunConfig::load(flags_.config);
      apply_flags();
      for (const auto& [s, fn] : subs)
        if (s->parsed()) (this->*fn)();
      return 0;
    } catch (const UsageError& e) {
      err_ << "p2pl: " << e.what() << "\n";
      return kUsageError;
    } catch (const std::invalid_argument& e) {
      err_ << "p2pl: " << e.what() << "\n";
      return kUsageError;
    } catch (const std::exception& e) {
      err_ << "p2pl: " << e.what() << "\n";
      return kDataError;
    }
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  Flags flags_;
  RunConfig cfg_;
  bool all_models_ = false;

  void add_common(CLI::App& s) {
    s.add_option("--config", flags_.config, "key = value run configuration");
    s.add_option("--seed", flags_.seed, "seed (unsigned 64-bit)");
    s.add_option("--model", flags_.model, "linear | logit | rf | svm | knn (cv also: all)");
    s.add_option("--select", flags_.select, "forward | backward | recursive | none | baseline");
    s.add_option("--out", flags_.out, "output directory");
    s.add_option("--traditional", flags_.traditional, "traditional loan CSV");
    s.add_option("--bidding", flags_.bidding, "bidding loan CSV");
    s.add_option("--trees", flags_.trees, "random-forest size");
    s.add_option("--grid-step", flags_.grid_step, "sentiment grid step");
  }

  void apply_flags() {
    const auto set = [&](const std::optional<std::string>& v, const char* key, const char* flag) {
      if (v) cfg_.apply(key, *v, std::string("--") + flag);
    };
    set(flags_.seed, "seed", "seed");
    if (flags_.model && *flags_.model == "all") all_models_ = true;
    else set(flags_.model, "model", "model");
    set(flags_.select, "select", "select");
    set(flags_.out, "out", "out");
    set(flags_.traditional, "traditional", "traditional");
    set(flags_.bidding, "bidding", "bidding");
    set(flags_.trees, "trees", "trees");
    set(flags_.grid_step, "grid_step", "grid-step");
    cfg_.validate();
  }

  std::string out_path(const std::string& name) const {
    std::filesystem::create_directories(cfg_.out);
    return (std::filesystem::path(cfg_.out) / name).string();
  }

  void write(const std::string& name, const std::string& contents) {
    const std::string p = out_path(name);
    write_file(p, contents);
    out_ << "wrote " << p << "\n";
  }

  LoadedTable load(DatasetKind kind, const SentimentLexicon& lex) const {
    return load_prepared(kind == DatasetKind::traditional ? cfg_.traditional : cfg_.bidding, kind, cfg_, lex);
  }

  /// Tables a task needs; the other slot stays empty.
  std::pair<Dataset, Dataset> task_inputs(TaskKind task) const {
    const SentimentLexicon lex = cfg_.load_lexicon();
    Dataset trad, bid;
    if (task == TaskKind::trad_rate) trad = load(DatasetKind::traditional, lex).data;
    else bid = load(DatasetKind::bidding, lex).data;
    return {trad, bid};
  }

  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ";") + x;
    return s;
  }

  // Commands ------------------------------------------------------------------

  void ingest() {
    if (cfg_.traditional.empty() && cfg_.bidding.empty())
      throw UsageError("ingest needs --traditional and/or --bidding");
    const SentimentLexicon lex = cfg_.load_lexicon();
    std::ostringstream summary;
    for (DatasetKind kind : {DatasetKind::traditional, DatasetKind::bidding}) {
      const std::string& path = kind == DatasetKind::traditional ? cfg_.traditional : cfg_.bidding;
      if (path.empty()) continue;
      const std::string k(to_string(kind));
      const EncodingSchema schema = cfg_.schema(kind);
      const RawTable raw = load_table(path, schema, default_aliases());
      const LoadedTable t = prepare_table(raw, schema, lex, cfg_.load_status_map());
      write(k + "_clean.csv", t.cleaned.to_csv());
      write(k + "_encoded.csv", dataset_to_csv(t.data));
      write(k + "_drops.txt", t.cleaned.report.to_text());
      summary << k << ": rows_in = " << raw.rows.size() << ", rows_out = " << t.data.rows()
              << ", features = " << t.data.cols() << ", unknown_columns = " << join(raw.unknown_columns) << "\n";
    }
    write("ingest_summary.txt", summary.str());
  }

  void analyze_grades() {
    const SentimentLexicon lex = cfg_.load_lexicon();
    const LoadedTable trad = load(DatasetKind::traditional, lex);
    const LoadedTable bid = load(DatasetKind::bidding, lex);
    const GradeReport r = p2pl::analyze_grades(trad.data, bid.data);
    write("grade_means.csv", grade_means_csv(r));
    write("grade_tests.csv", grade_tests_csv(r));
    std::ostringstream s;
    std::size_t rejected = 0;
    for (const auto& row : r.rows) rejected += row.reject ? 1 : 0;
    s << "grades = " << r.rows.size() << "\nwelch_rejections_at_0.05 = " << rejected << "\n";
    write("grade_summary.txt", s.str());
  }

  void cross_validate() {
    const TaskKind task = parse_task_kind(flags_.task);
    const auto [trad, bid] = task_inputs(task);
    const Dataset d = task_dataset(task, trad, bid, cfg_);
    std::vector<ModelKind> kinds{cfg_.model};
    if (all_models_) {
      kinds = task_of(task) == Task::regression
                  ? std::vector<ModelKind>{ModelKind::linear, ModelKind::random_forest, ModelKind::svm, ModelKind::knn}
                  : std::vector<ModelKind>{ModelKind::logit, ModelKind::random_forest, ModelKind::svm, ModelKind::knn};
    }
    std::vector<CVReport> reports;
    csv::Writer features;
    features.row({"model", "run", "features"});
    std::ostringstream summary;
    const std::string t(to_string(task));
    summary << "task = " << t << "\nrows = " << d.rows() << "\nselect = " << to_string(cfg_.select)
            << "\nsplit = " << cfg_.plan.runs << " x " << format_double(cfg_.plan.ratio) << "\nseed = " << cfg_.seed
            << "\n";
    for (ModelKind k : kinds) {
      const NestedCV cv = montecarlo_cv_selected(cfg_.spec(k, task_of(task)), d, cfg_.split_plan(), cfg_.select);
      for (std::size_t r = 0; r < cv.run_features.size(); ++r)
        features.row({std::string(to_string(k)), std::to_string(r + 1), join(cv.run_features[r])});
      summary << to_string(k) << " mean " << cv.report.metric << " = " << format_fixed(cv.report.mean, 4) << "\n";
      if (!cv.report.confusions.empty() && kinds.size() == 1)
        write("cv_" + t + "_confusion.csv", confusion_csv(cv.report.confusions.front()));
      reports.push_back(cv.report);
    }
    write("cv_" + t + ".csv", cv_reports_csv(reports));
    write("cv_" + t + "_features.csv", features.str());
    write("cv_" + t + "_summary.txt", summary.str());
  }

  void select() {
    const TaskKind task = parse_task_kind(flags_.task);
    const auto [trad, bid] = task_inputs(task);
    const Dataset d = task_dataset(task, trad, bid, cfg_);
    SelectionReport report;
    const auto chosen = choose_features(cfg_.select, cfg_.spec(task_of(task)), d, derive_seed(cfg_.seed, 300), &report);
    const std::string t(to_string(task));
    std::ostringstream text;
    text << "task = " << t << "\nmodel = " << to_string(cfg_.model) << "\nselect = " << to_string(cfg_.select)
         << "\nselected = " << join(chosen) << "\n";
    if (!report.trajectory.empty()) text << "final_score = " << format_double(report.final_score) << "\n";
    write("selection_" + t + ".txt", text.str());
    write("selection_" + t + ".csv", report.trajectory_csv());
  }

  void sweep() {
    const SentimentLexicon lex = cfg_.load_lexicon();
    const LoadedTable bid = load(DatasetKind::bidding, lex);
    std::optional<TrainedModel> model;
    if (!flags_.bundle.empty()) {
      model.emplace(Advisor::load(flags_.bundle).success);
    } else {
      Dataset traditional_unused;
      model.emplace(train_task(TaskKind::success, task_dataset(TaskKind::success, traditional_unused, bid.data, cfg_),
                               cfg_)
                        .model);
    }
    const Dataset loans = with_response(bid.data, std::string(kStatusResponse));
    const UpliftReport r = uplift_report(*model, loans, cfg_.grid_step);
    write("sweep.csv", r.curve.to_csv());
    write("uplift.csv", r.to_csv());
    std::ostringstream s;
    s << "success_features = " << join(model->feature_names()) << "\nnon_funded_loans = " << r.curve.n_loans
      << "\ng_star = " << format_fixed(r.g_star, 2) << "\nfunded_before = " << r.before
      << "\nfunded_after = " << r.after << "\n";
    write("sweep_summary.txt", s.str());
  }

  void train() {
    const SentimentLexicon lex = cfg_.load_lexicon();
    const LoadedTable trad = load(DatasetKind::traditional, lex);
    const LoadedTable bid = load(DatasetKind::bidding, lex);
    const Advisor a = train_advisor(trad, bid, cfg_);
    const std::string dir = flags_.bundle.empty() ? out_path("bundle") : flags_.bundle;
    a.save(dir);
    out_ << "wrote " << dir << "\n";
    std::ostringstream s;
    s << "trad_rate = " << to_string(a.trad_rate.kind()) << " [" << join(a.trad_rate.feature_names()) << "]\n"
      << "bid_rate = " << to_string(a.bid_rate.kind()) << " [" << join(a.bid_rate.feature_names()) << "]\n"
      << "success = " << to_string(a.success.kind()) << " [" << join(a.success.feature_names()) << "]\n"
      << "g_star = " << (a.g_star ? format_fixed(*a.g_star, 2) : std::string("none")) << "\n";
    write("train_summary.txt", s.str());
  }

  void recommend() {
    const Advisor a = Advisor::load(flags_.bundle);
    const SentimentLexicon lex = cfg_.load_lexicon();
    const auto records = parse_records(read_file(flags_.input), flags_.input);
    csv::Writer w;
    w.row(recommendation_csv_header());
    Json all = Json::array();
    for (const auto& rec : records) {
      Recommendation r;
      try {
        r = p2pl::recommend(rec, a, lex);
      } catch (const MissingFeature& e) {
        throw DataError(flags_.input + ": record " + rec.id + ": " + e.what());
      }
      w.row(recommendation_csv_row(r));
      all.push_back(to_json(r));
    }
    write("recommendations.csv", w.str());
    write("recommendations.json", all.dump(1) + "\n");
  }

  void portfolio() {
    const Advisor a = Advisor::load(flags_.bundle);
    const SentimentLexicon lex = cfg_.load_lexicon();
    const auto loans = parse_portfolio(read_file(flags_.input), flags_.input);
    const PortfolioSummary s = portfolio_eval(loans, a, lex, a.g_star);
    csv::Writer w;
    w.row(recommendation_csv_header());
    for (const auto& r : s.recommendations) w.row(recommendation_csv_row(r));
    write("portfolio.csv", s.to_csv());
    write("portfolio_recommendations.csv", w.str());
  }

  void synth() {
    const SentimentLexicon lex = cfg_.load_lexicon();
    const SynthOutput o = synth_generate(cfg_.synth, cfg_.seed, lex, cfg_.schema(DatasetKind::traditional),
                                         cfg_.schema(DatasetKind::bidding), cfg_.load_status_map());
    write("traditional.csv", o.traditional_raw.to_csv());
    write("bidding.csv", o.bidding_raw.to_csv());
    write("portfolio.csv", o.portfolio_csv);
    std::ostringstream s;
    s << "seed = " << cfg_.seed << "\ntraditional_rows = " << o.traditional_raw.rows.size()
      << "\nbidding_rows = " << o.bidding_raw.rows.size()
      << "\nbidding_funded = " << rows_where(o.bidding, kStatusResponse, 1.0).size()
      << "\nportfolio_rows = " << 2 * cfg_.synth.n_portfolio << "\n";
    write("synth_summary.txt", s.str());
  }

  void serve() {
    const auto [host, port] = service::parse_bind(flags_.bind);
    const service::Context ctx{Advisor::load(flags_.bundle), cfg_.load_lexicon()};
    httplib::Server server;
    service::install_routes(server, ctx);
    if (!server.bind_to_port(host, port)) throw DataError("cannot bind " + flags_.bind);
    out_ << "listening on " << host << ":" << port << std::endl;
    server.listen_after_bind();
  }
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return Runner(out, err).run(argc, argv);
}

}  // namespace p2pl::cli
