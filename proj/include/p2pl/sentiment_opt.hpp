#pragma once

#include "p2pl/csv.hpp"
#include "p2pl/ml.hpp"
#include "p2pl/schema.hpp"
#include "p2pl/stats.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace p2pl {

struct SweepCurve {
  std::vector<double> grid;  // ascending, within [-1, 1]
  std::vector<std::size_t> funded_counts;
  std::size_t n_loans = 0;

  std::string to_csv() const {
    csv::Writer w;
    w.row({"sentiment", "funded_count"});
    for (std::size_t i = 0; i < grid.size(); ++i) w.row({format_fixed(grid[i], 4), std::to_string(funded_counts[i])});
    return w.str();
  }
};

/// Grid (i - m) / m for i = 0..2m, where m = 1 / step must be a whole number.
inline std::vector<double> sentiment_grid(double step) {
  if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("sentiment grid step must lie in (0, 1]");
  const double inv = 1.0 / step;
  const double m = std::round(inv);
  if (std::fabs(inv - m) > 1e-9 * inv) throw std::invalid_argument("sentiment grid step must divide 1 evenly");
  const auto mi = static_cast<long>(m);
  std::vector<double> g;
  for (long i = 0; i <= 2 * mi; ++i) g.push_back(static_cast<double>(i - mi) / m);
  return g;
}

/// Count of loans classified funded when every loan's sentiment score is set
/// to each grid value. The input dataset is not modified. A model that does
/// not use the sentiment feature yields a flat curve.
inline SweepCurve sweep_sentiment(const TrainedModel& m, const Dataset& loans, double grid_step = 0.01) {
  if (m.task() != Task::classification) throw std::invalid_argument("sweep_sentiment needs the success classifier");
  if (loans.rows() == 0) throw DataError("sweep_sentiment: no loans to sweep");
  SweepCurve c;
  c.grid = sentiment_grid(grid_step);
  c.n_loans = loans.rows();
  Dataset view = select_features(loans, m.feature_names());
  const auto j = view.feature_index(kSentimentFeature);
  const auto count = [&]() {
    const Vector labels = predict_labels(m, view);
    return static_cast<std::size_t>((labels.array() == 1.0).count());
  };
  if (!j) {
    c.funded_counts.assign(c.grid.size(), count());
    return c;
  }
  for (double g : c.grid) {
    view.X.col(static_cast<Eigen::Index>(*j)).setConstant(g);
    c.funded_counts.push_back(count());
  }
  return c;
}

/// Grid value with the most predicted-funded loans; ties go to the smallest
/// |g|, then to the positive value.
inline std::pair<double, std::size_t> optimal_sentiment(const SweepCurve& c) {
  if (c.grid.empty() || c.grid.size() != c.funded_counts.size())
    throw std::invalid_argument("optimal_sentiment: empty or malformed curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.grid.size(); ++i) {
    const auto a = c.funded_counts[i], b = c.funded_counts[best];
    const double ga = std::fabs(c.grid[i]), gb = std::fabs(c.grid[best]);
    if (a > b || (a == b && (ga < gb || (ga == gb && c.grid[i] > c.grid[best])))) best = i;
  }
  return {c.grid[best], c.funded_counts[best]};
}

struct UpliftReport {
  std::size_t n_loans = 0;
  std::size_t before = 0;  // actually funded
  std::size_t after = 0;   // funded plus non-funded predicted funded at g*
  double g_star = 0.0;
  std::size_t newly_funded = 0;
  SweepCurve curve;  // over the non-funded loans
  double t = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();         // Welch
  double p_pooled = std::numeric_limits<double>::quiet_NaN();  // pooled-variance Student

  std::string to_csv() const {
    csv::Writer w;
    w.row({"loans", "funded_before", "funded_after", "optimal_sentiment", "t", "p_welch", "p_pooled"});
    char p1[32], p2[32];
    std::snprintf(p1, sizeof p1, "%.3g", p);
    std::snprintf(p2, sizeof p2, "%.3g", p_pooled);
    w.row({std::to_string(n_loans), std::to_string(before), std::to_string(after), format_fixed(g_star, 2),
           std::isnan(t) ? "NA" : format_fixed(t, 4), std::isnan(p) ? "NA" : p1, std::isnan(p_pooled) ? "NA" : p2});
    return w.str();
  }
};

/// Sweeps the non-funded loans (label 0), picks g*, and compares the funded
/// indicator before and after the intervention. Funded loans stay funded.
inline UpliftReport uplift_report(const TrainedModel& m, const Dataset& loans, double grid_step = 0.01) {
  if (!((loans.y.array() == 0.0) || (loans.y.array() == 1.0)).all())
    throw DataError("uplift_report: loans must carry 0/1 funded labels as the response");
  UpliftReport r;
  r.n_loans = loans.rows();
  const auto funded_idx = rows_where(loans, loans.response_name, 1.0);
  const auto open_idx = rows_where(loans, loans.response_name, 0.0);
  r.before = funded_idx.size();
  Vector before = loans.y, after = loans.y;
  if (!open_idx.empty()) {
    const Dataset open = take_rows(loans, open_idx);
    r.curve = sweep_sentiment(m, open, grid_step);
    const auto [g, count] = optimal_sentiment(r.curve);
    r.g_star = g;
    r.newly_funded = count;
    Dataset at = select_features(open, m.feature_names());
    if (auto j = at.feature_index(kSentimentFeature)) at.X.col(static_cast<Eigen::Index>(*j)).setConstant(g);
    const Vector labels = predict_labels(m, at);
    for (std::size_t k = 0; k < open_idx.size(); ++k)
      if (labels(static_cast<Eigen::Index>(k)) == 1.0) after(static_cast<Eigen::Index>(open_idx[k])) = 1.0;
  }
  r.after = static_cast<std::size_t>((after.array() == 1.0).count());
  if (before.size() >= 2) {
    try {
      const auto w = welch_ttest(before, after);
      r.t = w.t;
      r.p = w.p;
      r.p_pooled = student_ttest(before, after).p;
    } catch (const DataError&) {
      // both indicator vectors constant
    }
  }
  return r;
}

}  // namespace p2pl
