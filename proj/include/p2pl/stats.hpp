#pragma once

#include "p2pl/core.hpp"

#include <cmath>
#include <limits>

namespace p2pl {

namespace stats_detail {

/// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double x, double a, double b) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace stats_detail

/// Regularized incomplete beta I_x(a, b). `complement` must equal 1 - x; it
/// is passed separately so callers can supply it without cancellation.
inline double incomplete_beta(double x, double complement, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (complement <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(complement);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * stats_detail::beta_cf(x, a, b) / a;
  return 1.0 - front * stats_detail::beta_cf(complement, b, a) / b;
}

inline double incomplete_beta(double x, double a, double b) { return incomplete_beta(x, 1.0 - x, a, b); }

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `df` degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_two_sided: df must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  return incomplete_beta(df / (df + t2), t2 / (df + t2), df / 2.0, 0.5);
}

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  bool reject(double alpha = 0.05) const { return p < alpha; }
};

namespace stats_detail {

struct Moments {
  double n, mean, var;
};

inline Moments moments(const Vector& v, const char* who) {
  if (v.size() < 2) throw DataError(std::string(who) + ": each sample needs at least two observations");
  if (!v.allFinite()) throw DataError(std::string(who) + ": non-finite observation");
  const double n = static_cast<double>(v.size());
  const double mean = v.mean();
  return {n, mean, (v.array() - mean).square().sum() / (n - 1.0)};
}

}  // namespace stats_detail

/// Two-sided Welch (unequal variance) t-test with Welch-Satterthwaite df.
inline TTestResult welch_ttest(const Vector& a, const Vector& b) {
  const auto A = stats_detail::moments(a, "welch_ttest");
  const auto B = stats_detail::moments(b, "welch_ttest");
  const double sa = A.var / A.n, sb = B.var / B.n;
  if (sa + sb == 0.0) throw DataError("welch_ttest: both samples have zero variance");
  TTestResult r;
  r.t = (A.mean - B.mean) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) / (sa * sa / (A.n - 1.0) + sb * sb / (B.n - 1.0));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

/// Two-sided Student t-test with pooled variance, df = n_a + n_b - 2.
inline TTestResult student_ttest(const Vector& a, const Vector& b) {
  const auto A = stats_detail::moments(a, "student_ttest");
  const auto B = stats_detail::moments(b, "student_ttest");
  const double df = A.n + B.n - 2.0;
  const double pooled = ((A.n - 1.0) * A.var + (B.n - 1.0) * B.var) / df;
  if (pooled == 0.0) throw DataError("student_ttest: both samples have zero variance");
  TTestResult r;
  r.df = df;
  r.t = (A.mean - B.mean) / std::sqrt(pooled * (1.0 / A.n + 1.0 / B.n));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

}  // namespace p2pl
