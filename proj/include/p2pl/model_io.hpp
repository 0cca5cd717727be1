#pragma once

// JSON model artifacts. Doubles are written in shortest round-trip form, so a
// reloaded model predicts bit-identically.

#include "p2pl/ml.hpp"
#include "p2pl/text.hpp"

#include "json.hpp"

#include <string>

namespace p2pl {

using Json = nlohmann::json;

inline constexpr std::string_view kModelFormat = "p2pl-model";
inline constexpr int kModelFormatVersion = 1;

namespace io_detail {

inline Json vec(const Vector& v) { return Json(to_std(v)); }

inline Vector vec(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return to_vector(v);
}

inline Json mat(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_std(m.row(i).transpose()));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

inline Matrix mat(const Json& j) {
  Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.rows()) throw DataError("model file: matrix row count mismatch");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto row = data[static_cast<std::size_t>(i)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) throw DataError("model file: matrix width mismatch");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

inline Json params_to_json(const Hyperparameters& h) {
  return std::visit(
      [](const auto& p) -> Json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearParams>) return {{"jitter", p.jitter}};
        else if constexpr (std::is_same_v<P, LogitParams>)
          return {{"ridge", p.ridge}, {"max_iterations", p.max_iterations}, {"tolerance", p.tolerance}};
        else if constexpr (std::is_same_v<P, ForestParams>)
          return {{"trees", p.trees}, {"max_depth", p.max_depth}, {"min_leaf", p.min_leaf},
                  {"max_features", p.max_features}, {"bootstrap", p.bootstrap}};
        else if constexpr (std::is_same_v<P, SvmParams>)
          return {{"C", p.C}, {"tolerance", p.tolerance}, {"max_passes", p.max_passes},
                  {"kernel", std::string(to_string(p.kernel))}, {"gamma", p.gamma}, {"epsilon", p.epsilon},
                  {"cache_mb", p.cache_mb}};
        else return {{"k", p.k}};
      },
      h);
}

inline Hyperparameters params_from_json(ModelKind kind, const Json& j) {
  switch (kind) {
    case ModelKind::linear: return LinearParams{j.at("jitter").get<double>()};
    case ModelKind::logit:
      return LogitParams{j.at("ridge").get<double>(), j.at("max_iterations").get<int>(), j.at("tolerance").get<double>()};
    case ModelKind::random_forest:
      return ForestParams{j.at("trees").get<int>(), j.at("max_depth").get<int>(), j.at("min_leaf").get<int>(),
                          j.at("max_features").get<int>(), j.at("bootstrap").get<bool>()};
    case ModelKind::svm: {
      SvmParams p;
      p.C = j.at("C").get<double>();
      p.tolerance = j.at("tolerance").get<double>();
      p.max_passes = j.at("max_passes").get<int>();
      p.kernel = j.at("kernel").get<std::string>() == "rbf" ? SvmKernel::rbf : SvmKernel::linear;
      p.gamma = j.at("gamma").get<double>();
      p.epsilon = j.at("epsilon").get<double>();
      p.cache_mb = j.at("cache_mb").get<std::size_t>();
      return p;
    }
    case ModelKind::knn: return KnnParams{j.at("k").get<int>()};
  }
  throw DataError("model file: bad model kind");
}

inline Json fitted_to_json(const TrainedModel::Fitted& f) {
  return std::visit(
      [](const auto& m) -> Json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinearModel>) return {{"intercept", m.intercept}, {"coef", vec(m.coef)}};
        else if constexpr (std::is_same_v<M, LogitModel>)
          return {{"intercept", m.intercept}, {"coef", vec(m.coef)}, {"iterations", m.iterations},
                  {"converged", m.converged}};
        else if constexpr (std::is_same_v<M, ForestModel>) {
          Json trees = Json::array();
          for (const auto& t : m.trees) {
            std::vector<int> feature, left, right;
            std::vector<double> threshold, value;
            for (const auto& n : t.nodes) {
              feature.push_back(n.feature);
              left.push_back(n.left);
              right.push_back(n.right);
              threshold.push_back(n.threshold);
              value.push_back(n.value);
            }
            trees.push_back(
                {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
          }
          return {{"trees", trees}, {"importance", vec(m.importance)}};
        } else if constexpr (std::is_same_v<M, SvmModel>)
          return {{"kernel", std::string(to_string(m.kernel.kind))}, {"gamma", m.kernel.gamma},
                  {"support", mat(m.support)}, {"coef", vec(m.coef)}, {"rho", m.rho}, {"w", vec(m.w)},
                  {"kkt_gap", m.kkt_gap}, {"iterations", m.iterations}, {"converged", m.converged}};
        else return {{"k", m.k}, {"train", mat(m.train)}, {"y", vec(m.y)}};
      },
      f);
}

inline TrainedModel::Fitted fitted_from_json(ModelKind kind, const Json& j) {
  switch (kind) {
    case ModelKind::linear: return LinearModel{j.at("intercept").get<double>(), vec(j.at("coef"))};
    case ModelKind::logit: {
      LogitModel m;
      m.intercept = j.at("intercept").get<double>();
      m.coef = vec(j.at("coef"));
      m.iterations = j.at("iterations").get<int>();
      m.converged = j.at("converged").get<bool>();
      return m;
    }
    case ModelKind::random_forest: {
      ForestModel m;
      for (const auto& t : j.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto value = t.at("value").get<std::vector<double>>();
        const auto n = feature.size();
        if (left.size() != n || right.size() != n || threshold.size() != n || value.size() != n)
          throw DataError("model file: inconsistent tree arrays");
        DecisionTree tree;
        for (std::size_t k = 0; k < n; ++k) {
          const bool leaf = feature[k] < 0;
          const auto bad = [&](int c) { return c <= static_cast<int>(k) || c >= static_cast<int>(n); };
          if (!leaf && (bad(left[k]) || bad(right[k]))) throw DataError("model file: invalid tree link");
          tree.nodes.push_back({feature[k], threshold[k], left[k], right[k], value[k]});
        }
        if (tree.nodes.empty()) throw DataError("model file: empty tree");
        m.trees.push_back(std::move(tree));
      }
      if (m.trees.empty()) throw DataError("model file: forest without trees");
      m.importance = vec(j.at("importance"));
      return m;
    }
    case ModelKind::svm: {
      SvmModel m;
      m.kernel.kind = j.at("kernel").get<std::string>() == "rbf" ? SvmKernel::rbf : SvmKernel::linear;
      m.kernel.gamma = j.at("gamma").get<double>();
      m.support = mat(j.at("support"));
      m.coef = vec(j.at("coef"));
      m.rho = j.at("rho").get<double>();
      m.w = vec(j.at("w"));
      m.kkt_gap = j.at("kkt_gap").get<double>();
      m.iterations = j.at("iterations").get<long>();
      m.converged = j.at("converged").get<bool>();
      return m;
    }
    case ModelKind::knn: return KnnModel{j.at("k").get<int>(), mat(j.at("train")), vec(j.at("y"))};
  }
  throw DataError("model file: bad model kind");
}

}  // namespace io_detail

inline Json model_to_json(const TrainedModel& m) {
  using namespace io_detail;
  return {{"format", std::string(kModelFormat)},
          {"version", kModelFormatVersion},
          {"spec",
           {{"kind", std::string(to_string(m.kind()))},
            {"task", std::string(to_string(m.task()))},
            {"seed", m.spec().seed},
            {"params", params_to_json(m.spec().params)}}},
          {"feature_names", m.feature_names()},
          {"standardizer", {{"mean", vec(m.standardizer().mean)}, {"sd", vec(m.standardizer().sd)}}},
          {"n_train", m.n_train()},
          {"fitted", fitted_to_json(m.fitted())}};
}

inline TrainedModel model_from_json(const Json& j) {
  using namespace io_detail;
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw DataError("not a model file");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw DataError("unsupported model format version " + std::to_string(j.at("version").get<int>()));
    const auto& s = j.at("spec");
    ModelSpec spec;
    const ModelKind kind = parse_model_kind(s.at("kind").get<std::string>());
    spec.task = parse_task(s.at("task").get<std::string>());
    spec.seed = s.at("seed").get<std::uint64_t>();
    spec.params = params_from_json(kind, s.at("params"));
    spec.validate();
    auto names = j.at("feature_names").get<std::vector<std::string>>();
    Standardizer st{vec(j.at("standardizer").at("mean")), vec(j.at("standardizer").at("sd"))};
    if (static_cast<std::size_t>(st.mean.size()) != names.size() || st.sd.size() != st.mean.size())
      throw DataError("model file: standardizer width does not match feature list");
    return TrainedModel(std::move(spec), std::move(names), std::move(st), fitted_from_json(kind, j.at("fitted")),
                        j.at("n_train").get<std::size_t>());
  } catch (const Json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

inline void save_model(const TrainedModel& m, const std::string& path) { write_file(path, model_to_json(m).dump(1) + "\n"); }

inline TrainedModel load_model(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace p2pl
