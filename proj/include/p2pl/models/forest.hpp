#pragma once

#include "p2pl/core.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace p2pl {

struct ForestParams {
  int trees = 100;
  int max_depth = 0;     // 0 = unlimited
  int min_leaf = 1;
  int max_features = 0;  // 0 = sqrt(p) for classification, max(1, p/3) for regression
  bool bootstrap = true;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf mean (regression) or share of class 1 (classification)
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int k = 0;
    while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(k)];
      k = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(k)].value;
  }
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  /// Mean decrease in impurity per feature, summing to 1 (all zero if no split was made).
  Vector importance;

  /// Mean leaf value over trees: the regression estimate, or for
  /// classification the share of trees voting class 1 (leaves are pure unless
  /// identical rows disagree).
  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict_row(x);
    return s / static_cast<double>(trees.size());
  }
};

inline int resolve_max_features(const ForestParams& p, Eigen::Index n_features, bool classification) {
  const int nf = static_cast<int>(n_features);
  if (p.max_features > 0) return std::min(p.max_features, nf);
  if (classification) return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(nf)))));
  return std::max(1, nf / 3);
}

namespace detail {

/// CART growth: variance reduction for regression, Gini for classification.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, const Vector& y, bool classification, const ForestParams& params, std::uint64_t seed)
      : X_(X), y_(y), cls_(classification), params_(params), rng_(seed),
        mtry_(resolve_max_features(params, X.cols(), classification)), importance_(Vector::Zero(X.cols())) {}

  DecisionTree build() {
    const auto n = static_cast<std::size_t>(X_.rows());
    samples_.resize(n);
    if (params_.bootstrap)
      for (auto& s : samples_) s = rng_.index(n);
    else
      std::iota(samples_.begin(), samples_.end(), std::size_t{0});
    features_.resize(static_cast<std::size_t>(X_.cols()));
    std::iota(features_.begin(), features_.end(), 0);

    DecisionTree tree;
    tree.nodes.emplace_back();
    struct Job {
      int node;
      std::size_t begin, end;
      int depth;
    };
    std::vector<Job> stack{{0, 0, n, 0}};
    while (!stack.empty()) {
      const Job job = stack.back();
      stack.pop_back();
      const Split s = find_split(job.begin, job.end, job.depth);
      auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
      node.value = s.node_value;
      if (s.feature < 0) continue;

      const auto mid = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(job.begin),
                                      samples_.begin() + static_cast<std::ptrdiff_t>(job.end),
                                      [&](std::size_t r) {
                                        return X_(static_cast<Eigen::Index>(r), s.feature) <= s.threshold;
                                      }) -
                       samples_.begin();
      importance_(s.feature) += s.decrease;
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& parent = tree.nodes[static_cast<std::size_t>(job.node)];
      parent.feature = s.feature;
      parent.threshold = s.threshold;
      parent.left = left;
      parent.right = left + 1;
      stack.push_back({left + 1, static_cast<std::size_t>(mid), job.end, job.depth + 1});
      stack.push_back({left, job.begin, static_cast<std::size_t>(mid), job.depth + 1});
    }
    return tree;
  }

  const Vector& importance() const { return importance_; }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
    double node_value = 0.0;
  };

  Split find_split(std::size_t begin, std::size_t end, int depth) {
    Split best;
    const std::size_t n = end - begin;
    double sum = 0.0, lo = y_(static_cast<Eigen::Index>(samples_[begin])), hi = lo;
    for (std::size_t k = begin; k < end; ++k) {
      const double v = y_(static_cast<Eigen::Index>(samples_[k]));
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double dn = static_cast<double>(n);
    best.node_value = sum / dn;
    const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf));
    if (lo == hi || n < 2 * min_leaf || (params_.max_depth > 0 && depth >= params_.max_depth)) return best;

    // parent term of the impurity decrease, in the same units as `score`
    double parent = sum * sum / dn;
    if (cls_) parent += (dn - sum) * (dn - sum) / dn;

    double best_score = -std::numeric_limits<double>::infinity();
    int examined = 0;
    for (std::size_t f = 0; f < features_.size(); ++f) {
      if (examined >= mtry_ && best.feature >= 0) break;
      std::swap(features_[f], features_[f + rng_.index(features_.size() - f)]);
      const int feat = features_[f];

      scratch_.clear();
      for (std::size_t k = begin; k < end; ++k) {
        const auto r = static_cast<Eigen::Index>(samples_[k]);
        scratch_.emplace_back(X_(r, feat), y_(r));
      }
      std::sort(scratch_.begin(), scratch_.end());
      if (scratch_.front().first == scratch_.back().first) continue;  // constant here
      ++examined;

      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += scratch_[i].second;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < min_leaf) continue;
        if (nr < min_leaf) break;
        if (scratch_[i].first == scratch_[i + 1].first) continue;
        const double dl = static_cast<double>(nl), dr = static_cast<double>(nr);
        const double right_sum = sum - left_sum;
        double score = left_sum * left_sum / dl + right_sum * right_sum / dr;
        if (cls_) score += (dl - left_sum) * (dl - left_sum) / dl + (dr - right_sum) * (dr - right_sum) / dr;
        if (score > best_score) {
          best_score = score;
          best.feature = feat;
          const double a = scratch_[i].first, b = scratch_[i + 1].first;
          double t = a + (b - a) / 2.0;
          if (!(t < b)) t = a;
          best.threshold = t;
          best.decrease = std::max(0.0, score - parent);
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  const Vector& y_;
  bool cls_;
  ForestParams params_;
  Rng rng_;
  int mtry_;
  Vector importance_;
  std::vector<std::size_t> samples_;
  std::vector<int> features_;
  std::vector<std::pair<double, double>> scratch_;
};

}  // namespace detail

/// Bagged CART ensemble. Tree t is grown from seed derive_seed(seed, t), so
/// the forest is reproducible and independent of evaluation order.
inline ForestModel fit_forest(const Matrix& X, const Vector& y, bool classification, const ForestParams& params,
                              std::uint64_t seed) {
  if (params.trees < 1) throw std::invalid_argument("forest needs at least one tree");
  ForestModel m;
  m.importance = Vector::Zero(X.cols());
  m.trees.reserve(static_cast<std::size_t>(params.trees));
  for (int t = 0; t < params.trees; ++t) {
    detail::TreeBuilder builder(X, y, classification, params, derive_seed(seed, static_cast<std::uint64_t>(t)));
    m.trees.push_back(builder.build());
    const double total = builder.importance().sum();
    if (total > 0.0) m.importance += builder.importance() / total;
  }
  const double total = m.importance.sum();
  if (total > 0.0) m.importance /= total;
  return m;
}

}  // namespace p2pl
