#pragma once

#include "p2pl/csv.hpp"
#include "p2pl/ingest.hpp"
#include "p2pl/metrics.hpp"
#include "p2pl/ml.hpp"
#include "p2pl/schema.hpp"
#include "p2pl/stats.hpp"
#include "p2pl/text.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace p2pl {

// Monte-Carlo cross-validation ---------------------------------------------------

struct CVReport {
  ModelSpec spec;
  std::vector<std::string> features;
  std::string metric;  // "r2" or "accuracy"
  std::vector<double> runs;
  double mean = 0.0;
  std::vector<ConfusionMatrix> confusions;  // classification only, one per run
};

/// Fit on each training split restricted to `features` (all features when
/// empty) and score the matching test split. Run r trains with seed
/// derive_seed(spec.seed, r).
inline CVReport montecarlo_cv(const ModelSpec& spec, const Dataset& d, const SplitPlan& plan,
                              const std::vector<std::string>& features = {}) {
  CVReport rep;
  rep.spec = spec;
  rep.features = features.empty() ? d.feature_names : features;
  rep.metric = spec.task == Task::classification ? "accuracy" : "r2";
  const Dataset view = select_features(d, rep.features);
  const auto splits = split_montecarlo(view, plan);
  for (std::size_t r = 0; r < splits.size(); ++r) {
    ModelSpec run_spec = spec;
    run_spec.seed = derive_seed(spec.seed, r);
    const TrainedModel m = fit(run_spec, splits[r].train);
    if (spec.task == Task::classification) {
      const Vector labels = predict_labels(m, splits[r].test);
      rep.runs.push_back(accuracy(splits[r].test.y, labels));
      rep.confusions.push_back(confusion(splits[r].test.y, labels));
    } else {
      rep.runs.push_back(r_squared(splits[r].test.y, predict(m, splits[r].test)));
    }
  }
  double s = 0.0;
  for (double v : rep.runs) s += v;
  rep.mean = s / static_cast<double>(rep.runs.size());
  return rep;
}

/// One row per report: model, metric, run_1..run_k, mean, features.
inline std::string cv_reports_csv(const std::vector<CVReport>& reports) {
  std::size_t k = 0;
  for (const auto& r : reports) k = std::max(k, r.runs.size());
  csv::Row header{"model", "metric"};
  for (std::size_t i = 1; i <= k; ++i) header.push_back("run_" + std::to_string(i));
  header.insert(header.end(), {"mean", "features"});
  csv::Writer w;
  w.row(header);
  for (const auto& r : reports) {
    csv::Row row{std::string(to_string(r.spec.kind())), r.metric};
    for (std::size_t i = 0; i < k; ++i) row.push_back(i < r.runs.size() ? format_fixed(r.runs[i], 4) : "");
    row.push_back(format_fixed(r.mean, 4));
    std::string f;
    for (const auto& name : r.features) f += (f.empty() ? "" : ";") + name;
    row.push_back(f);
    w.row(row);
  }
  return w.str();
}

/// 2x2 layout: rows are actual classes, columns predicted classes.
inline std::string confusion_csv(const ConfusionMatrix& cm) {
  csv::Writer w;
  w.row({"actual", "predicted_funded", "predicted_not_funded"});
  w.row({"funded", std::to_string(cm.tp), std::to_string(cm.fn)});
  w.row({"not_funded", std::to_string(cm.fp), std::to_string(cm.tn)});
  w.row({"accuracy", format_fixed(cm.accuracy(), 4), ""});
  w.row({"tpr", format_fixed(cm.tpr(), 4), ""});
  w.row({"tnr", format_fixed(cm.tnr(), 4), ""});
  return w.str();
}

// Grade-level comparison ---------------------------------------------------------

struct GradeRow {
  std::string grade;
  std::size_t n_traditional = 0;
  std::size_t n_bidding = 0;
  bool computed = false;  // false when a side has fewer than two loans
  double mean_traditional = std::numeric_limits<double>::quiet_NaN();
  double mean_bidding = std::numeric_limits<double>::quiet_NaN();
  double difference = std::numeric_limits<double>::quiet_NaN();  // traditional - bidding
  double t = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();         // Welch
  double p_pooled = std::numeric_limits<double>::quiet_NaN();  // pooled-variance Student
  bool reject = false;                                          // Welch p < 0.05; NaN never rejects
};

struct GradeReport {
  std::vector<GradeRow> rows;
  const GradeRow* find(std::string_view grade) const {
    for (const auto& r : rows)
      if (r.grade == grade) return &r;
    return nullptr;
  }
};

inline const std::vector<std::string>& default_grades() {
  static const std::vector<std::string> g{"AA", "A", "B", "C", "D", "E", "HR"};
  return g;
}

/// Per-grade mean rates and t-tests. Bidding loans count only when funded
/// (LoanStatus = 1), since a non-funded listing has no realized rate. Grade
/// codes are the 1-based ordinal positions in `grades`.
inline GradeReport analyze_grades(const Dataset& traditional, const Dataset& bidding,
                                  const std::vector<std::string>& grades = default_grades()) {
  const std::string grade_col = "ProsperGrade";
  const std::string rate_col(kRateResponse);
  const Vector tg = traditional.column(grade_col), tr = traditional.column(rate_col);
  const Vector bg = bidding.column(grade_col), br = bidding.column(rate_col);
  const bool has_status = bidding.has_column(kStatusResponse);
  const Vector bs = has_status ? bidding.column(kStatusResponse) : Vector::Ones(bg.size());

  GradeReport rep;
  for (std::size_t g = 0; g < grades.size(); ++g) {
    const double code = static_cast<double>(g + 1);
    std::vector<double> a, b;
    for (Eigen::Index i = 0; i < tg.size(); ++i)
      if (tg(i) == code) a.push_back(tr(i));
    for (Eigen::Index i = 0; i < bg.size(); ++i)
      if (bg(i) == code && bs(i) == 1.0) b.push_back(br(i));
    GradeRow row;
    row.grade = grades[g];
    row.n_traditional = a.size();
    row.n_bidding = b.size();
    if (!a.empty()) row.mean_traditional = to_vector(a).mean();
    if (!b.empty()) row.mean_bidding = to_vector(b).mean();
    row.difference = row.mean_traditional - row.mean_bidding;
    if (a.size() >= 2 && b.size() >= 2) {
      row.computed = true;
      try {
        const auto w = welch_ttest(to_vector(a), to_vector(b));
        row.t = w.t;
        row.p = w.p;
        row.p_pooled = student_ttest(to_vector(a), to_vector(b)).p;
        row.reject = w.reject();
      } catch (const DataError&) {
        // both samples constant: leave t and p as NaN, do not reject
      }
    }
    rep.rows.push_back(row);
  }
  return rep;
}

namespace eval_detail {
inline std::string num(double v, int digits = 4) { return std::isnan(v) ? "NA" : format_fixed(v, digits); }
inline std::string sci(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}
}  // namespace eval_detail

/// Mean rates per grade: rows traditional, bidding, difference; one column per grade.
inline std::string grade_means_csv(const GradeReport& r) {
  csv::Row header{"row"}, trad{"average_traditional_rate"}, bid{"average_bidding_rate"}, diff{"difference"};
  for (const auto& g : r.rows) {
    header.push_back(g.grade);
    trad.push_back(eval_detail::num(g.mean_traditional));
    bid.push_back(eval_detail::num(g.mean_bidding));
    diff.push_back(eval_detail::num(g.difference));
  }
  csv::Writer w;
  w.row(header).row(trad).row(bid).row(diff);
  return w.str();
}

/// t statistics, p-values and decisions per grade.
inline std::string grade_tests_csv(const GradeReport& r) {
  csv::Row header{"row"}, t{"t"}, p{"p_welch"}, pp{"p_pooled"}, dec{"decision"}, nt{"n_traditional"},
      nb{"n_bidding"};
  for (const auto& g : r.rows) {
    header.push_back(g.grade);
    t.push_back(eval_detail::num(g.t, 3));
    p.push_back(eval_detail::sci(g.p));
    pp.push_back(eval_detail::sci(g.p_pooled));
    dec.push_back(!g.computed ? "not computed" : (g.reject ? "Reject" : "Not reject"));
    nt.push_back(std::to_string(g.n_traditional));
    nb.push_back(std::to_string(g.n_bidding));
  }
  csv::Writer w;
  w.row(header).row(t).row(p).row(pp).row(dec).row(nt).row(nb);
  return w.str();
}

}  // namespace p2pl
