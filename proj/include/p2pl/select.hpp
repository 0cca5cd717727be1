#pragma once

#include "p2pl/evaluation.hpp"

#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace p2pl {

enum class SelectMethod { forward, backward, recursive, exhaustive };

inline std::string_view to_string(SelectMethod m) {
  switch (m) {
    case SelectMethod::forward: return "forward";
    case SelectMethod::backward: return "backward";
    case SelectMethod::recursive: return "recursive";
    case SelectMethod::exhaustive: return "exhaustive";
  }
  return "?";
}

struct TrajectoryPoint {
  std::size_t size = 0;
  double score = 0.0;
  std::vector<std::string> features;
};

struct SelectionReport {
  SelectMethod method = SelectMethod::forward;
  std::vector<std::string> selected;
  std::vector<TrajectoryPoint> trajectory;
  double final_score = 0.0;

  std::string to_text() const {
    std::ostringstream os;
    os << "method = " << to_string(method) << "\n";
    os << "final_score = " << format_double(final_score) << "\n";
    os << "selected = ";
    for (std::size_t i = 0; i < selected.size(); ++i) os << (i ? ";" : "") << selected[i];
    os << "\n\n";
    os << trajectory_csv();
    return os.str();
  }

  std::string trajectory_csv() const {
    csv::Writer w;
    w.row({"step", "size", "score", "features"});
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
      std::string f;
      for (const auto& n : trajectory[i].features) f += (f.empty() ? "" : ";") + n;
      w.row({std::to_string(i + 1), std::to_string(trajectory[i].size), format_double(trajectory[i].score), f});
    }
    return w.str();
  }
};

/// Improvements at or below this are treated as no improvement.
inline constexpr double kSelectionEpsilon = 1e-4;

/// Inner validation used while searching: 3 random 80:20 splits.
inline SplitPlan inner_plan(std::uint64_t seed, double ratio = 0.8) { return SplitPlan{ratio, 3, seed}; }

/// Mean inner-CV score of a feature subset, memoized per subset. Every subset
/// is scored on the same splits.
class SubsetScorer {
 public:
  SubsetScorer(const ModelSpec& spec, const Dataset& d, const SplitPlan& inner) : spec_(spec), d_(d), plan_(inner) {}

  double operator()(std::vector<std::size_t> subset) {
    std::sort(subset.begin(), subset.end());
    if (auto it = cache_.find(subset); it != cache_.end()) return it->second;
    const double s = montecarlo_cv(spec_, d_, plan_, names(subset)).mean;
    cache_.emplace(std::move(subset), s);
    return s;
  }

  std::vector<std::string> names(std::vector<std::size_t> subset) const {
    std::sort(subset.begin(), subset.end());
    std::vector<std::string> out;
    for (auto j : subset) out.push_back(d_.feature_names[j]);
    return out;
  }

  std::size_t evaluations() const { return cache_.size(); }

 private:
  ModelSpec spec_;
  const Dataset& d_;
  SplitPlan plan_;
  std::map<std::vector<std::size_t>, double> cache_;
};

namespace select_detail {
inline void require_features(const Dataset& d) {
  if (d.cols() == 0) throw DataError("feature selection needs at least one feature");
}
inline std::vector<std::size_t> without(const std::vector<std::size_t>& s, std::size_t j) {
  std::vector<std::size_t> out;
  for (auto k : s)
    if (k != j) out.push_back(k);
  return out;
}
}  // namespace select_detail

/// Greedy forward search: add the best candidate while it improves the
/// current score by more than epsilon. Ties go to the earlier column.
inline SelectionReport forward_select(const ModelSpec& spec, const Dataset& d, const SplitPlan& inner) {
  select_detail::require_features(d);
  SubsetScorer score(spec, d, inner);
  SelectionReport rep;
  rep.method = SelectMethod::forward;
  std::vector<std::size_t> current;
  double current_score = -std::numeric_limits<double>::infinity();
  while (current.size() < d.cols()) {
    std::size_t best = d.cols();
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (std::find(current.begin(), current.end(), j) != current.end()) continue;
      auto cand = current;
      cand.push_back(j);
      const double s = score(cand);
      if (s > best_score) {
        best_score = s;
        best = j;
      }
    }
    if (!current.empty() && !(best_score - current_score > kSelectionEpsilon)) break;
    current.push_back(best);
    std::sort(current.begin(), current.end());
    current_score = best_score;
    rep.trajectory.push_back({current.size(), current_score, score.names(current)});
  }
  rep.selected = score.names(current);
  rep.final_score = current_score;
  return rep;
}

/// Greedy backward search from the full set: remove the feature whose removal
/// scores best, as long as that score stays within epsilon of the best score
/// seen so far. Ties go to the earlier column.
inline SelectionReport backward_select(const ModelSpec& spec, const Dataset& d, const SplitPlan& inner) {
  select_detail::require_features(d);
  SubsetScorer score(spec, d, inner);
  SelectionReport rep;
  rep.method = SelectMethod::backward;
  std::vector<std::size_t> current(d.cols());
  std::iota(current.begin(), current.end(), std::size_t{0});
  double current_score = score(current);
  double best_seen = current_score;
  rep.trajectory.push_back({current.size(), current_score, score.names(current)});
  while (current.size() > 1) {
    std::size_t drop = d.cols();
    double drop_score = -std::numeric_limits<double>::infinity();
    for (auto j : current) {
      const double s = score(select_detail::without(current, j));
      if (s > drop_score) {
        drop_score = s;
        drop = j;
      }
    }
    if (drop_score < best_seen - kSelectionEpsilon) break;
    current = select_detail::without(current, drop);
    current_score = drop_score;
    best_seen = std::max(best_seen, current_score);
    rep.trajectory.push_back({current.size(), current_score, score.names(current)});
  }
  rep.selected = score.names(current);
  rep.final_score = current_score;
  return rep;
}

/// Importance-driven elimination: each round scores the current subset, then
/// drops its least important feature (importance measured by a model fitted on
/// the first inner training split and evaluated on its test split). Returns the
/// smallest subset on the path whose score is within epsilon of the best.
inline SelectionReport recursive_select(const ModelSpec& spec, const Dataset& d, const SplitPlan& inner) {
  select_detail::require_features(d);
  SubsetScorer score(spec, d, inner);
  SelectionReport rep;
  rep.method = SelectMethod::recursive;
  SplitPlan first = inner;
  first.runs = 1;
  std::vector<std::size_t> current(d.cols());
  std::iota(current.begin(), current.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> path;
  while (true) {
    rep.trajectory.push_back({current.size(), score(current), score.names(current)});
    path.push_back(current);
    if (current.size() == 1) break;
    const auto names = score.names(current);
    const Dataset view = select_features(d, names);
    const auto split = split_montecarlo(view, first).front();
    ModelSpec s = spec;
    s.seed = derive_seed(spec.seed, 0);
    const TrainedModel m = fit(s, split.train);
    const Vector imp = feature_importance(m, split.test);
    Eigen::Index worst = 0;
    for (Eigen::Index k = 1; k < imp.size(); ++k)
      if (imp(k) < imp(worst)) worst = k;
    current = select_detail::without(current, current[static_cast<std::size_t>(worst)]);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : rep.trajectory) best = std::max(best, p.score);
  std::size_t pick = 0;
  for (std::size_t i = 0; i < rep.trajectory.size(); ++i)
    if (rep.trajectory[i].score >= best - kSelectionEpsilon) pick = i;  // later entries are smaller
  rep.selected = rep.trajectory[pick].features;
  rep.final_score = rep.trajectory[pick].score;
  return rep;
}

/// Scores every nonempty subset. Among subsets within epsilon of the maximum
/// it returns the smallest, then the higher score, then the earliest columns.
inline SelectionReport exhaustive_oracle(const ModelSpec& spec, const Dataset& d, const SplitPlan& inner,
                                         std::size_t max_features = 12) {
  select_detail::require_features(d);
  if (max_features > 12) throw std::invalid_argument("exhaustive_oracle: max_features is capped at 12");
  if (d.cols() > max_features)
    throw std::invalid_argument("exhaustive_oracle: " + std::to_string(d.cols()) + " features exceed the limit of " +
                                std::to_string(max_features));
  SubsetScorer score(spec, d, inner);
  const std::size_t p = d.cols();
  struct Entry {
    std::vector<std::size_t> subset;
    double score;
  };
  std::vector<Entry> all;
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << p); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < p; ++j)
      if (mask & (1u << j)) s.push_back(j);
    const double v = score(s);
    best = std::max(best, v);
    all.push_back({std::move(s), v});
  }
  const Entry* pick = nullptr;
  for (const auto& e : all) {
    if (e.score < best - kSelectionEpsilon) continue;
    if (!pick || e.subset.size() < pick->subset.size() ||
        (e.subset.size() == pick->subset.size() &&
         (e.score > pick->score || (e.score == pick->score && e.subset < pick->subset))))
      pick = &e;
  }
  SelectionReport rep;
  rep.method = SelectMethod::exhaustive;
  rep.selected = score.names(pick->subset);
  rep.final_score = pick->score;
  rep.trajectory.push_back({pick->subset.size(), pick->score, rep.selected});
  return rep;
}

inline SelectionReport select_features_by(SelectMethod method, const ModelSpec& spec, const Dataset& d,
                                          const SplitPlan& inner) {
  switch (method) {
    case SelectMethod::forward: return forward_select(spec, d, inner);
    case SelectMethod::backward: return backward_select(spec, d, inner);
    case SelectMethod::recursive: return recursive_select(spec, d, inner);
    case SelectMethod::exhaustive: return exhaustive_oracle(spec, d, inner);
  }
  throw std::invalid_argument("unknown selection method");
}

/// Feature list of the earlier description-length model used as a comparison
/// baseline for funding prediction.
inline std::vector<std::string> baseline_preset() {
  return {"BorrowerMaximumRate", "DebtToIncomeRatio", "LoanAmount", "Homeownership", std::string(kDescriptionLength)};
}

/// Length of a description in characters (UTF-8 code points).
inline double description_length(std::string_view text) { return static_cast<double>(utf8_length(text)); }

}  // namespace p2pl
