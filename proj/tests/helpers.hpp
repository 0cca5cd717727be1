#pragma once

#include "p2pl.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace p2pl::testing {

inline Dataset make_dataset(const Matrix& X, const Vector& y, std::vector<std::string> names = {},
                            std::string response = "y") {
  Dataset d;
  d.X = X;
  d.y = y;
  d.response_name = std::move(response);
  if (names.empty())
    for (Eigen::Index j = 0; j < X.cols(); ++j) names.push_back("x" + std::to_string(j));
  d.feature_names = std::move(names);
  d.check();
  return d;
}

inline Matrix gaussian_matrix(Rng& rng, Eigen::Index n, Eigen::Index p) {
  Matrix X(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rng.normal();
  return X;
}

/// y = 2 x_a + 1.5 x_b + noise, with signal variance / noise variance = snr
/// (snr = 0 means noiseless).
struct Planted {
  Dataset data;
  std::vector<std::string> informative;  // column order
};

inline Planted planted_linear(std::uint64_t seed, Eigen::Index n, Eigen::Index p, double snr) {
  Rng rng(seed);
  const auto a = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(p)));
  Eigen::Index b;
  do b = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(p)));
  while (b == a);
  const Matrix X = gaussian_matrix(rng, n, p);
  const double noise_sd = snr > 0.0 ? std::sqrt((4.0 + 2.25) / snr) : 0.0;
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = 2.0 * X(i, a) + 1.5 * X(i, b) + noise_sd * rng.normal();
  Planted out{make_dataset(X, y), {}};
  out.informative = {"x" + std::to_string(std::min(a, b)), "x" + std::to_string(std::max(a, b))};
  return out;
}

inline bool contains_all(const std::vector<std::string>& have, const std::vector<std::string>& want) {
  for (const auto& w : want)
    if (std::find(have.begin(), have.end(), w) == have.end()) return false;
  return true;
}

/// Fresh scratch directory under the system temp dir.
inline std::string scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("p2pl_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

/// Small synthetic corpus and a trained advisor shared by several tests.
struct SmallWorld {
  RunConfig cfg;
  SentimentLexicon lex;
  SynthOutput synth;
  LoadedTable traditional;
  LoadedTable bidding;
  Advisor advisor;
};

inline RunConfig small_config(std::uint64_t seed = 7) {
  RunConfig c;
  c.seed = seed;
  c.select = Selection::none;
  c.trees = 25;
  c.sample_traditional = 1000;
  c.per_class = 0;
  c.synth.n_traditional = 1200;
  c.synth.n_bidding = 2500;
  c.synth.n_portfolio = 50;
  return c;
}

inline const SmallWorld& small_world() {
  static const SmallWorld w = [] {
    const RunConfig cfg = small_config();
    const SentimentLexicon lex = SentimentLexicon::load_default();
    const auto ts = default_schema(DatasetKind::traditional);
    const auto bs = default_schema(DatasetKind::bidding);
    const auto status = StatusMap::load_default();
    SynthOutput s = synth_generate(cfg.synth, cfg.seed, lex, ts, bs, status);
    LoadedTable t = prepare_table(s.traditional_raw, ts, lex, status);
    LoadedTable b = prepare_table(s.bidding_raw, bs, lex, status);
    Advisor a = train_advisor(t, b, cfg);
    return SmallWorld{cfg, lex, std::move(s), std::move(t), std::move(b), std::move(a)};
  }();
  return w;
}

}  // namespace p2pl::testing
