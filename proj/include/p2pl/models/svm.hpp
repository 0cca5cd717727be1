#pragma once

#include "p2pl/core.hpp"

#include <list>
#include <numeric>
#include <unordered_map>
#include <vector>

namespace p2pl {

enum class SvmKernel { linear, rbf };

inline std::string_view to_string(SvmKernel k) { return k == SvmKernel::linear ? "linear" : "rbf"; }

struct SvmParams {
  double C = 1.0;
  double tolerance = 1e-3;
  /// Iteration budget is max_passes times the number of dual variables.
  int max_passes = 200;
  SvmKernel kernel = SvmKernel::linear;
  double gamma = 0.0;  // rbf width; 0 means 1 / feature count
  double epsilon = 0.01;  // tube half-width for regression
  std::size_t cache_mb = 100;
};

/// Kernel on standardized rows.
struct KernelFunction {
  SvmKernel kind = SvmKernel::linear;
  double gamma = 1.0;

  double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
    if (kind == SvmKernel::linear) return a.dot(b);
    return std::exp(-gamma * (a - b).squaredNorm());
  }
};

struct SvmModel {
  KernelFunction kernel;
  Matrix support;  // standardized support vectors (rows)
  Vector coef;     // y_i * alpha_i per support vector (alpha_i - alpha_i* for regression)
  double rho = 0.0;
  Vector w;        // explicit weights, linear kernel only
  // solver diagnostics
  double kkt_gap = 0.0;
  long iterations = 0;
  bool converged = false;

  double decision_row(const Eigen::Ref<const Eigen::RowVectorXd>& xs) const {
    if (kernel.kind == SvmKernel::linear && w.size() == xs.size()) return xs.dot(w) - rho;
    double f = -rho;
    for (Eigen::Index i = 0; i < support.rows(); ++i) f += coef(i) * kernel(support.row(i), xs);
    return f;
  }
};

/// Dual problem in the common form
///   min 0.5 a'Qa + p'a  s.t.  y'a = const, 0 <= a <= C,  Q_ij = y_i y_j K(r_i, r_j)
/// where r_i = row_of[i] indexes the training matrix (regression uses each row twice).
struct SmoProblem {
  const Matrix* X = nullptr;
  KernelFunction kernel;
  std::vector<std::size_t> row_of;
  Vector y;  // +1 / -1
  Vector p;
  double C = 1.0;

  std::size_t size() const { return row_of.size(); }
};

struct SmoResult {
  Vector alpha;
  Vector gradient;
  double rho = 0.0;
  double kkt_gap = 0.0;
  long iterations = 0;
  bool converged = false;
};

namespace detail {

/// LRU cache of kernel rows K(r, .) over the distinct training rows.
class KernelCache {
 public:
  KernelCache(const Matrix& X, KernelFunction k, std::size_t budget_bytes) : X_(X), k_(k) {
    const auto n = static_cast<std::size_t>(X.rows());
    capacity_ = std::max<std::size_t>(2, budget_bytes / std::max<std::size_t>(1, n * sizeof(double)));
  }

  const std::vector<double>& row(std::size_t r) {
    if (auto it = index_.find(r); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> values(static_cast<std::size_t>(X_.rows()));
    for (Eigen::Index c = 0; c < X_.rows(); ++c)
      values[static_cast<std::size_t>(c)] = k_(X_.row(static_cast<Eigen::Index>(r)), X_.row(c));
    lru_.emplace_front(r, std::move(values));
    index_[r] = lru_.begin();
    return lru_.front().second;
  }

 private:
  const Matrix& X_;
  KernelFunction k_;
  std::size_t capacity_;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, std::list<std::pair<std::size_t, std::vector<double>>>::iterator> index_;
};

inline bool is_upper(double a, double C) { return a >= C; }
inline bool is_lower(double a) { return a <= 0.0; }

/// Bias from the final gradient: average of y_i G_i over free variables,
/// midpoint of the feasible interval if there are none.
inline double compute_rho(const SmoProblem& prob, const Vector& alpha, const Vector& G) {
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  int nr_free = 0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double yG = prob.y(k) * G(k);
    if (is_upper(alpha(k), prob.C)) {
      if (prob.y(k) < 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else if (is_lower(alpha(k))) {
      if (prob.y(k) > 0) ub = std::min(ub, yG);
      else lb = std::max(lb, yG);
    } else {
      ++nr_free;
      sum_free += yG;
    }
  }
  return nr_free > 0 ? sum_free / nr_free : (ub + lb) / 2.0;
}

}  // namespace detail

/// Largest KKT violation m(a) - M(a) for the given multipliers, recomputing
/// the gradient from scratch. Zero or negative means optimal.
inline double kkt_gap(const SmoProblem& prob, const Vector& alpha) {
  const std::size_t l = prob.size();
  double up = -std::numeric_limits<double>::infinity(), low = -up;
  for (std::size_t t = 0; t < l; ++t) {
    const auto kt = static_cast<Eigen::Index>(t);
    double g = prob.p(kt);
    for (std::size_t s = 0; s < l; ++s) {
      const auto ks = static_cast<Eigen::Index>(s);
      if (alpha(ks) == 0.0) continue;
      g += prob.y(kt) * prob.y(ks) * alpha(ks) *
           prob.kernel(prob.X->row(static_cast<Eigen::Index>(prob.row_of[t])),
                       prob.X->row(static_cast<Eigen::Index>(prob.row_of[s])));
    }
    const double v = -prob.y(kt) * g;
    const bool in_up = (prob.y(kt) > 0 && alpha(kt) < prob.C) || (prob.y(kt) < 0 && alpha(kt) > 0);
    const bool in_low = (prob.y(kt) > 0 && alpha(kt) > 0) || (prob.y(kt) < 0 && alpha(kt) < prob.C);
    if (in_up) up = std::max(up, v);
    if (in_low) low = std::min(low, v);
  }
  if (!std::isfinite(up) || !std::isfinite(low)) return 0.0;
  return up - low;
}

/// Sequential minimal optimization with second-order working-set selection
/// and shrinking of variables stuck at a bound.
inline SmoResult solve_smo(const SmoProblem& prob, double tolerance, long max_iterations, std::size_t cache_bytes) {
  constexpr double kTau = 1e-12;
  const std::size_t l = prob.size();
  const double C = prob.C;
  detail::KernelCache cache(*prob.X, prob.kernel, cache_bytes);

  Vector QD(static_cast<Eigen::Index>(l));
  for (std::size_t i = 0; i < l; ++i) {
    const auto r = static_cast<Eigen::Index>(prob.row_of[i]);
    QD(static_cast<Eigen::Index>(i)) = prob.kernel(prob.X->row(r), prob.X->row(r));
  }

  SmoResult res;
  res.alpha = Vector::Zero(static_cast<Eigen::Index>(l));
  res.gradient = prob.p;
  Vector& alpha = res.alpha;
  Vector& G = res.gradient;
  const Vector& y = prob.y;

  // Q_i[t] = y_i y_t K(row_of[i], row_of[t])
  const auto q = [&](std::size_t i, const std::vector<double>& krow, std::size_t t) {
    return y(static_cast<Eigen::Index>(i)) * y(static_cast<Eigen::Index>(t)) * krow[prob.row_of[t]];
  };
  const auto in_up = [&](std::size_t t) {
    const auto k = static_cast<Eigen::Index>(t);
    return (y(k) > 0 && alpha(k) < C) || (y(k) < 0 && alpha(k) > 0);
  };
  const auto in_low = [&](std::size_t t) {
    const auto k = static_cast<Eigen::Index>(t);
    return (y(k) > 0 && alpha(k) > 0) || (y(k) < 0 && alpha(k) < C);
  };

  std::vector<std::size_t> active(l);
  std::iota(active.begin(), active.end(), std::size_t{0});
  const auto reset_active = [&]() {
    active.resize(l);
    std::iota(active.begin(), active.end(), std::size_t{0});
  };
  // G = p + sum_s alpha_s Q_s, recomputed for every variable
  const auto reconstruct_gradient = [&]() {
    if (active.size() == l) return;
    G = prob.p;
    for (std::size_t s = 0; s < l; ++s) {
      const double a = alpha(static_cast<Eigen::Index>(s));
      if (a == 0.0) continue;
      const std::vector<double>& krow = cache.row(prob.row_of[s]);
      for (std::size_t t = 0; t < l; ++t) G(static_cast<Eigen::Index>(t)) += a * q(s, krow, t);
    }
  };

  struct Selection {
    std::size_t i, j;
    double gap;
  };
  const auto select = [&]() -> Selection {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = l;
    for (auto t : active) {
      const auto k = static_cast<Eigen::Index>(t);
      if (in_up(t) && -y(k) * G(k) > gmax) {
        gmax = -y(k) * G(k);
        i = t;
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = l;
    double obj_min = std::numeric_limits<double>::infinity();
    const std::vector<double>* krow_i = i < l ? &cache.row(prob.row_of[i]) : nullptr;
    for (auto t : active) {
      if (!in_low(t)) continue;
      const auto k = static_cast<Eigen::Index>(t);
      gmax2 = std::max(gmax2, y(k) * G(k));
      if (!krow_i) continue;
      const double b = gmax + y(k) * G(k);
      if (b <= 0) continue;
      const auto ki = static_cast<Eigen::Index>(i);
      double a = QD(ki) + QD(k) - 2.0 * y(ki) * y(k) * q(i, *krow_i, t);
      if (a <= 0) a = kTau;
      const double obj = -(b * b) / a;
      if (obj < obj_min) {
        obj_min = obj;
        j = t;
      }
    }
    const double gap = (std::isfinite(gmax) && std::isfinite(gmax2)) ? gmax + gmax2 : 0.0;
    return {i, j, gap};
  };

  bool unshrunk = false;
  const auto shrink = [&]() {
    double gmax1 = -std::numeric_limits<double>::infinity(), gmax2 = gmax1;
    for (auto t : active) {
      const auto k = static_cast<Eigen::Index>(t);
      if (in_up(t)) gmax1 = std::max(gmax1, -y(k) * G(k));
      if (in_low(t)) gmax2 = std::max(gmax2, y(k) * G(k));
    }
    if (!unshrunk && gmax1 + gmax2 <= tolerance * 10) {
      unshrunk = true;
      reconstruct_gradient();
      reset_active();
    }
    const auto shrinkable = [&](std::size_t t) {
      const auto k = static_cast<Eigen::Index>(t);
      if (detail::is_upper(alpha(k), C)) return y(k) > 0 ? -G(k) > gmax1 : -G(k) > gmax2;
      if (detail::is_lower(alpha(k))) return y(k) > 0 ? G(k) > gmax2 : G(k) > gmax1;
      return false;
    };
    active.erase(std::remove_if(active.begin(), active.end(), shrinkable), active.end());
  };

  const long shrink_every = static_cast<long>(std::min<std::size_t>(l, 1000));
  long counter = shrink_every;
  while (true) {
    if (--counter == 0) {
      counter = shrink_every;
      shrink();
    }
    Selection sel = select();
    if (sel.gap < tolerance || sel.i == l || sel.j == l) {
      reconstruct_gradient();
      reset_active();
      sel = select();
      res.kkt_gap = sel.gap;
      if (sel.gap < tolerance || sel.i == l || sel.j == l) {
        res.converged = sel.gap < tolerance;
        break;
      }
      counter = 1;
    }
    res.kkt_gap = sel.gap;
    if (res.iterations >= max_iterations) break;
    ++res.iterations;

    const std::size_t i = sel.i, j = sel.j;
    const auto ki = static_cast<Eigen::Index>(i), kj = static_cast<Eigen::Index>(j);
    const std::vector<double> Ki = cache.row(prob.row_of[i]);  // copy: the next lookup may evict it
    const std::vector<double>& Kj = cache.row(prob.row_of[j]);
    const double Qij = y(ki) * y(kj) * Ki[prob.row_of[j]];
    const double old_ai = alpha(ki), old_aj = alpha(kj);

    if (y(ki) != y(kj)) {
      double quad = QD(ki) + QD(kj) + 2.0 * Qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-G(ki) - G(kj)) / quad;
      const double diff = alpha(ki) - alpha(kj);
      alpha(ki) += delta;
      alpha(kj) += delta;
      if (diff > 0) {
        if (alpha(kj) < 0) { alpha(kj) = 0; alpha(ki) = diff; }
      } else if (alpha(ki) < 0) {
        alpha(ki) = 0;
        alpha(kj) = -diff;
      }
      if (diff > 0) {
        if (alpha(ki) > C) { alpha(ki) = C; alpha(kj) = C - diff; }
      } else if (alpha(kj) > C) {
        alpha(kj) = C;
        alpha(ki) = C + diff;
      }
    } else {
      double quad = QD(ki) + QD(kj) - 2.0 * Qij;
      if (quad <= 0) quad = kTau;
      const double delta = (G(ki) - G(kj)) / quad;
      const double sum = alpha(ki) + alpha(kj);
      alpha(ki) -= delta;
      alpha(kj) += delta;
      if (sum > C) {
        if (alpha(ki) > C) { alpha(ki) = C; alpha(kj) = sum - C; }
      } else if (alpha(kj) < 0) {
        alpha(kj) = 0;
        alpha(ki) = sum;
      }
      if (sum > C) {
        if (alpha(kj) > C) { alpha(kj) = C; alpha(ki) = sum - C; }
      } else if (alpha(ki) < 0) {
        alpha(ki) = 0;
        alpha(kj) = sum;
      }
    }

    const double dai = alpha(ki) - old_ai, daj = alpha(kj) - old_aj;
    for (auto t : active) G(static_cast<Eigen::Index>(t)) += q(i, Ki, t) * dai + q(j, Kj, t) * daj;
  }
  reconstruct_gradient();
  reset_active();
  res.rho = detail::compute_rho(prob, alpha, G);
  return res;
}

namespace detail {

inline SvmModel finish_svm(const Matrix& Xs, const SmoProblem& prob, const SmoResult& r, const Vector& beta) {
  SvmModel m;
  m.kernel = prob.kernel;
  m.rho = r.rho;
  m.kkt_gap = r.kkt_gap;
  m.iterations = r.iterations;
  m.converged = r.converged;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < beta.size(); ++i)
    if (beta(i) != 0.0) sv.push_back(i);
  m.support.resize(static_cast<Eigen::Index>(sv.size()), Xs.cols());
  m.coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    m.support.row(static_cast<Eigen::Index>(k)) = Xs.row(sv[k]);
    m.coef(static_cast<Eigen::Index>(k)) = beta(sv[k]);
  }
  if (prob.kernel.kind == SvmKernel::linear) m.w = m.support.transpose() * m.coef;
  return m;
}

inline KernelFunction make_kernel(const SvmParams& p, Eigen::Index n_features) {
  KernelFunction k;
  k.kind = p.kernel;
  k.gamma = p.gamma > 0 ? p.gamma : 1.0 / static_cast<double>(std::max<Eigen::Index>(1, n_features));
  return k;
}

}  // namespace detail

/// C-SVC. Labels are 0/1; class 1 maps to +1.
inline SvmModel fit_svc(const Matrix& Xs, const Vector& labels, const SvmParams& params) {
  const auto n = static_cast<std::size_t>(Xs.rows());
  SmoProblem prob;
  prob.X = &Xs;
  prob.kernel = detail::make_kernel(params, Xs.cols());
  prob.C = params.C;
  prob.row_of.resize(n);
  prob.y.resize(static_cast<Eigen::Index>(n));
  prob.p = Vector::Constant(static_cast<Eigen::Index>(n), -1.0);
  for (std::size_t i = 0; i < n; ++i) {
    prob.row_of[i] = i;
    prob.y(static_cast<Eigen::Index>(i)) = labels(static_cast<Eigen::Index>(i)) == 1.0 ? 1.0 : -1.0;
  }
  const auto r = solve_smo(prob, params.tolerance, static_cast<long>(params.max_passes) * static_cast<long>(n),
                           params.cache_mb << 20);
  const Vector beta = prob.y.cwiseProduct(r.alpha);
  return detail::finish_svm(Xs, prob, r, beta);
}

/// Epsilon-SVR with 2n dual variables (alpha, alpha*).
inline SvmModel fit_svr(const Matrix& Xs, const Vector& z, const SvmParams& params) {
  const auto n = static_cast<std::size_t>(Xs.rows());
  SmoProblem prob;
  prob.X = &Xs;
  prob.kernel = detail::make_kernel(params, Xs.cols());
  prob.C = params.C;
  prob.row_of.resize(2 * n);
  prob.y.resize(static_cast<Eigen::Index>(2 * n));
  prob.p.resize(static_cast<Eigen::Index>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(i + n);
    prob.row_of[i] = prob.row_of[i + n] = i;
    prob.y(a) = 1.0;
    prob.y(b) = -1.0;
    prob.p(a) = params.epsilon - z(a);
    prob.p(b) = params.epsilon + z(a);
  }
  const auto r = solve_smo(prob, params.tolerance, static_cast<long>(params.max_passes) * static_cast<long>(2 * n),
                           params.cache_mb << 20);
  Vector beta(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    beta(static_cast<Eigen::Index>(i)) = r.alpha(static_cast<Eigen::Index>(i)) - r.alpha(static_cast<Eigen::Index>(i + n));
  return detail::finish_svm(Xs, prob, r, beta);
}

}  // namespace p2pl
