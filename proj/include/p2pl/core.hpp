#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace p2pl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Errors ------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent input data (file contents, unseen class values, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A model or request needs a feature the caller did not supply.
class MissingFeature : public Error {
 public:
  explicit MissingFeature(std::string feature)
      : Error("missing required feature '" + feature + "'"), feature_(std::move(feature)) {}
  const std::string& feature() const noexcept { return feature_; }

 private:
  std::string feature_;
};

// Random numbers ------------------------------------------------------------
//
// Every stochastic step draws from Rng so results are bit-identical across
// standard libraries (std distributions are implementation-defined).

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for the i-th independent sub-stream of `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// xoshiro256** generator.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x = splitmix64(x);
      s = x;
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased.
  std::size_t index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: empty range");
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
  }

  /// Standard normal (Box-Muller, one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4]{};
};

// Dataset -------------------------------------------------------------------

enum class DatasetKind { traditional, bidding };

inline std::string_view to_string(DatasetKind k) {
  return k == DatasetKind::traditional ? "traditional" : "bidding";
}

/// A named numeric column kept beside the features (a second response, or a
/// derived quantity such as description length). Never used as a model input
/// unless requested by name.
struct AuxColumn {
  std::string name;
  Vector values;
};

/// Encoded numeric table: features X, active response y.
struct Dataset {
  DatasetKind kind = DatasetKind::traditional;
  std::vector<std::string> feature_names;
  Matrix X;
  std::string response_name;
  Vector y;
  std::vector<AuxColumn> aux;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }

  std::optional<std::size_t> feature_index(std::string_view name) const {
    for (std::size_t j = 0; j < feature_names.size(); ++j)
      if (feature_names[j] == name) return j;
    return std::nullopt;
  }

  const AuxColumn* find_aux(std::string_view name) const {
    for (const auto& a : aux)
      if (a.name == name) return &a;
    return nullptr;
  }

  /// Column by name from the features, the aux columns or the response.
  Vector column(std::string_view name) const {
    if (auto j = feature_index(name)) return X.col(static_cast<Eigen::Index>(*j));
    if (const auto* a = find_aux(name)) return a->values;
    if (name == response_name) return y;
    throw MissingFeature(std::string(name));
  }

  bool has_column(std::string_view name) const {
    return feature_index(name) || find_aux(name) || name == response_name;
  }

  void check() const {
    if (static_cast<std::size_t>(X.cols()) != feature_names.size())
      throw DataError("dataset: feature name count does not match matrix width");
    if (X.rows() != y.size()) throw DataError("dataset: X and y row counts differ");
    for (const auto& a : aux)
      if (a.values.size() != X.rows()) throw DataError("dataset: aux column '" + a.name + "' length mismatch");
    if (!X.allFinite() || !y.allFinite()) throw DataError("dataset: non-finite entries");
  }
};

/// Rows `idx` of d (all columns, aux and response).
inline Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.kind = d.kind;
  out.feature_names = d.feature_names;
  out.response_name = d.response_name;
  const auto n = static_cast<Eigen::Index>(idx.size());
  out.X.resize(n, d.X.cols());
  out.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto src = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]);
    out.X.row(r) = d.X.row(src);
    out.y(r) = d.y(src);
  }
  for (const auto& a : d.aux) {
    AuxColumn c{a.name, Vector(n)};
    for (Eigen::Index r = 0; r < n; ++r) c.values(r) = a.values(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]));
    out.aux.push_back(std::move(c));
  }
  return out;
}

/// Restrict to `names` (in that order). Names may come from the features or
/// from aux columns; the aux list is carried over unchanged.
inline Dataset select_features(const Dataset& d, const std::vector<std::string>& names) {
  Dataset out;
  out.kind = d.kind;
  out.feature_names = names;
  out.response_name = d.response_name;
  out.y = d.y;
  out.aux = d.aux;
  out.X.resize(d.X.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) out.X.col(static_cast<Eigen::Index>(j)) = d.column(names[j]);
  return out;
}

/// Make aux column (or a feature) `name` the response; the old response moves to aux.
inline Dataset with_response(const Dataset& d, const std::string& name) {
  if (name == d.response_name) return d;
  Dataset out = d;
  const AuxColumn* a = d.find_aux(name);
  if (!a) throw MissingFeature(name);
  out.aux.erase(std::remove_if(out.aux.begin(), out.aux.end(), [&](const AuxColumn& c) { return c.name == name; }),
                out.aux.end());
  out.aux.push_back(AuxColumn{d.response_name, d.y});
  out.response_name = name;
  out.y = a->values;
  return out;
}

/// Indices of rows whose value in `column` equals `value`.
inline std::vector<std::size_t> rows_where(const Dataset& d, std::string_view column, double value) {
  const Vector c = d.column(column);
  std::vector<std::size_t> idx;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (c(i) == value) idx.push_back(static_cast<std::size_t>(i));
  return idx;
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace p2pl
