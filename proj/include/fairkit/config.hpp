/*
 * Copyright 2026 The fairkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairkit/dataset.hpp"
#include "fairkit/error.hpp"
#include "fairkit/fairness.hpp"
#include "fairkit/model.hpp"

namespace fairkit {

struct RowFilter {
  std::string column;
  std::vector<std::string> keep;  // raw category labels to retain
};

enum class BalanceMethod { None, Smoten };
enum class ReweightMode { None, Intersectional };

/// Declarative run description. The seed is mandatory; nothing falls back
/// to the wall clock.
struct RunConfig {
  std::string input;
  std::vector<std::string> schema;
  TargetRule target_rule = TargetRule::Completed;
  std::vector<std::string> id_columns;
  std::vector<RowFilter> filters;
  std::string favorable_class;  // empty -> COMPLETE for the completed rule, else first class
  SensitiveSpec sensitive;

  BalanceMethod balance = BalanceMethod::Smoten;
  int k_neighbors = 5;

  ModelFamily family = ModelFamily::DecisionTree;
  SvmGridSpec svm_grid;
  TreeGridSpec tree_grid;
  ForestGridSpec forest_grid;
  MlpGridSpec mlp_grid;
  SmoOptions smo;

  ReweightMode reweight = ReweightMode::Intersectional;
  double alpha = 0.05;
  double vdm_exponent = 1.0;

  std::vector<double> threshold_grid = default_threshold_grid();
  double difference_threshold = 0.2;
  double ratio_threshold = 0.8;

  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";

  nlohmann::json raw;  // echoed into the report
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) throw Error(ErrorCode::ConfigError, "missing field: " + key);
  return j.at(key);
}

inline TargetRule parse_target_rule(const std::string& name) {
  if (name == "COMPLETED") return TargetRule::Completed;
  if (name == "NOPRIOR") return TargetRule::Noprior;
  if (name == "CONCAT") return TargetRule::Concat;
  throw Error(ErrorCode::ConfigError, "unknown target rule: " + name);
}

inline ModelFamily parse_family(const std::string& name) {
  if (name == "svm") return ModelFamily::Svm;
  if (name == "dt") return ModelFamily::DecisionTree;
  if (name == "rf") return ModelFamily::RandomForest;
  if (name == "mlp") return ModelFamily::Mlp;
  throw Error(ErrorCode::ConfigError, "unknown model family: " + name);
}

inline KernelKind parse_kernel(const std::string& name) {
  if (name == "linear") return KernelKind::Linear;
  if (name == "poly") return KernelKind::Polynomial;
  if (name == "rbf") return KernelKind::Rbf;
  if (name == "sigmoid") return KernelKind::Sigmoid;
  throw Error(ErrorCode::ConfigError, "unknown kernel: " + name);
}

inline Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  throw Error(ErrorCode::ConfigError, "unknown activation: " + name);
}

inline Optimizer parse_optimizer(const std::string& name) {
  if (name == "adam") return Optimizer::Adam;
  if (name == "sgd") return Optimizer::Sgd;
  throw Error(ErrorCode::ConfigError, "unknown optimizer: " + name);
}

inline LossKind parse_loss(const std::string& name) {
  if (name == "categorical_crossentropy") return LossKind::CategoricalCrossentropy;
  if (name == "mean_squared_error") return LossKind::MeanSquaredError;
  throw Error(ErrorCode::ConfigError, "unknown loss: " + name);
}

inline std::pair<std::string, MaxFeatures> parse_max_features(const std::string& name) {
  if (name == "auto") return {name, MaxFeatures::Sqrt};  // alias, recorded as given
  if (name == "sqrt") return {name, MaxFeatures::Sqrt};
  if (name == "log2") return {name, MaxFeatures::Log2};
  if (name == "all") return {name, MaxFeatures::All};
  throw Error(ErrorCode::ConfigError, "unknown max_features: " + name);
}

inline std::vector<std::optional<int>> parse_depth_list(const nlohmann::json& arr) {
  std::vector<std::optional<int>> out;
  for (const auto& v : arr) {
    if (v.is_null() || (v.is_string() && v.get<std::string>() == "None"))
      out.push_back(std::nullopt);
    else
      out.push_back(v.get<int>());
  }
  return out;
}

inline void parse_gamma(const nlohmann::json& v, GammaMode& mode, double& value) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "scale") mode = GammaMode::Scale;
    else if (s == "auto") mode = GammaMode::Auto;
    else throw Error(ErrorCode::ConfigError, "gamma must be scale, auto, or a number");
  } else {
    mode = GammaMode::Explicit;
    value = v.get<double>();
    if (value <= 0.0) throw Error(ErrorCode::ConfigError, "explicit gamma must be > 0");
  }
}

inline void parse_model_section(const nlohmann::json& j, RunConfig& cfg) {
  cfg.family = parse_family(require_field(j, "family").get<std::string>());
  if (j.contains("svm")) {
    const auto& s = j.at("svm");
    if (s.contains("kernels")) {
      cfg.svm_grid.kernels.clear();
      for (const auto& k : s.at("kernels"))
        cfg.svm_grid.kernels.push_back(parse_kernel(k.get<std::string>()));
    }
    if (s.contains("c_values"))
      cfg.svm_grid.c_values = s.at("c_values").get<std::vector<double>>();
    if (s.contains("gamma"))
      parse_gamma(s.at("gamma"), cfg.svm_grid.gamma_mode, cfg.svm_grid.gamma_value);
    if (s.contains("degree")) cfg.svm_grid.degree = s.at("degree").get<int>();
    if (s.contains("coef")) cfg.svm_grid.coef = s.at("coef").get<double>();
    if (s.contains("tol")) cfg.smo.tol = s.at("tol").get<double>();
    if (s.contains("max_iter")) cfg.smo.max_iter = s.at("max_iter").get<std::size_t>();
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    switch (cfg.family) {
      case ModelFamily::DecisionTree:
        if (g.contains("max_depth")) cfg.tree_grid.max_depth = parse_depth_list(g.at("max_depth"));
        if (g.contains("min_samples_split"))
          cfg.tree_grid.min_samples_split = g.at("min_samples_split").get<std::vector<int>>();
        if (g.contains("min_samples_leaf"))
          cfg.tree_grid.min_samples_leaf = g.at("min_samples_leaf").get<std::vector<int>>();
        break;
      case ModelFamily::RandomForest:
        if (g.contains("n_estimators"))
          cfg.forest_grid.n_estimators = g.at("n_estimators").get<std::vector<int>>();
        if (g.contains("max_features")) {
          cfg.forest_grid.max_features.clear();
          for (const auto& v : g.at("max_features"))
            cfg.forest_grid.max_features.push_back(parse_max_features(v.get<std::string>()));
        }
        if (g.contains("max_depth"))
          cfg.forest_grid.max_depth = parse_depth_list(g.at("max_depth"));
        if (g.contains("min_samples_split"))
          cfg.forest_grid.min_samples_split = g.at("min_samples_split").get<std::vector<int>>();
        if (g.contains("min_samples_leaf"))
          cfg.forest_grid.min_samples_leaf = g.at("min_samples_leaf").get<std::vector<int>>();
        break;
      case ModelFamily::Mlp:
        if (g.contains("units1")) cfg.mlp_grid.units1 = g.at("units1").get<std::vector<int>>();
        if (g.contains("units2")) cfg.mlp_grid.units2 = g.at("units2").get<std::vector<int>>();
        if (g.contains("activations")) {
          cfg.mlp_grid.activations.clear();
          for (const auto& v : g.at("activations"))
            cfg.mlp_grid.activations.push_back(parse_activation(v.get<std::string>()));
        }
        if (g.contains("optimizers")) {
          cfg.mlp_grid.optimizers.clear();
          for (const auto& v : g.at("optimizers"))
            cfg.mlp_grid.optimizers.push_back(parse_optimizer(v.get<std::string>()));
        }
        if (g.contains("losses")) {
          cfg.mlp_grid.losses.clear();
          for (const auto& v : g.at("losses"))
            cfg.mlp_grid.losses.push_back(parse_loss(v.get<std::string>()));
        }
        if (g.contains("epochs")) cfg.mlp_grid.epochs = g.at("epochs").get<int>();
        if (g.contains("batch_size")) cfg.mlp_grid.batch_size = g.at("batch_size").get<int>();
        if (g.contains("learning_rate"))
          cfg.mlp_grid.learning_rate = g.at("learning_rate").get<double>();
        break;
      case ModelFamily::Svm:
        break;  // svm grid lives in the "svm" section
    }
  }
}

}  // namespace detail

/// Parses and validates a config document. Referenced columns must exist in
/// the schema; the seed is required unless supplied on the command line.
inline RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.raw = j;
  cfg.input = detail::require_field(j, "input").get<std::string>();
  cfg.schema = detail::require_field(j, "schema").get<std::vector<std::string>>();
  cfg.target_rule =
      detail::parse_target_rule(detail::require_field(j, "target_rule").get<std::string>());

  auto in_schema = [&](const std::string& name) {
    return std::find(cfg.schema.begin(), cfg.schema.end(), name) != cfg.schema.end();
  };

  if (j.contains("id_columns")) {
    cfg.id_columns = j.at("id_columns").get<std::vector<std::string>>();
    for (const auto& c : cfg.id_columns)
      if (!in_schema(c))
        throw Error(ErrorCode::ConfigError, "id column not in schema: " + c);
  }
  if (j.contains("filters")) {
    for (const auto& f : j.at("filters")) {
      RowFilter filter;
      filter.column = detail::require_field(f, "column").get<std::string>();
      filter.keep = detail::require_field(f, "keep").get<std::vector<std::string>>();
      if (!in_schema(filter.column))
        throw Error(ErrorCode::ConfigError, "filter column not in schema: " + filter.column);
      cfg.filters.push_back(std::move(filter));
    }
  }
  if (j.contains("favorable_class"))
    cfg.favorable_class = j.at("favorable_class").get<std::string>();

  if (j.contains("sensitive")) {
    const auto& s = j.at("sensitive");
    for (const auto& a : detail::require_field(s, "attributes")) {
      SensitiveAttribute attr;
      attr.name = detail::require_field(a, "name").get<std::string>();
      if (!in_schema(attr.name))
        throw Error(ErrorCode::ConfigError, "sensitive column not in schema: " + attr.name);
      for (const auto& [category, bucket] : detail::require_field(a, "map").items())
        attr.mapping[category] = bucket.get<int>();
      attr.privileged_value = detail::require_field(a, "privileged").get<int>();
      if (attr.privileged_value != 0 && attr.privileged_value != 1)
        throw Error(ErrorCode::ConfigError, attr.name + ": privileged must be 0 or 1");
      if (a.contains("buckets")) {
        auto buckets = a.at("buckets").get<std::vector<std::string>>();
        if (buckets.size() != 2)
          throw Error(ErrorCode::ConfigError, attr.name + ": buckets needs 2 names");
        attr.bucket_names = {buckets[0], buckets[1]};
      }
      cfg.sensitive.attributes.push_back(std::move(attr));
    }
    if (s.contains("legitimate")) {
      LegitimateCondition cond;
      cond.column = detail::require_field(s.at("legitimate"), "column").get<std::string>();
      cond.value = detail::require_field(s.at("legitimate"), "value").get<std::string>();
      if (!in_schema(cond.column))
        throw Error(ErrorCode::ConfigError, "legitimate column not in schema: " + cond.column);
      cfg.sensitive.legitimate = std::move(cond);
    }
  }

  if (j.contains("balance")) {
    const auto& b = j.at("balance");
    std::string method = b.value("method", std::string("smoten"));
    if (method == "smoten") cfg.balance = BalanceMethod::Smoten;
    else if (method == "none") cfg.balance = BalanceMethod::None;
    else throw Error(ErrorCode::ConfigError, "unknown balance method: " + method);
    if (b.contains("k_neighbors")) cfg.k_neighbors = b.at("k_neighbors").get<int>();
    if (cfg.k_neighbors < 1)
      throw Error(ErrorCode::ConfigError, "k_neighbors must be >= 1");
    if (b.contains("vdm_exponent")) cfg.vdm_exponent = b.at("vdm_exponent").get<double>();
  }

  detail::parse_model_section(detail::require_field(j, "model"), cfg);

  if (j.contains("reweight")) {
    std::string mode = j.at("reweight").get<std::string>();
    if (mode == "none") cfg.reweight = ReweightMode::None;
    else if (mode == "intersectional") cfg.reweight = ReweightMode::Intersectional;
    else throw Error(ErrorCode::ConfigError, "unknown reweight mode: " + mode);
  }
  if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
  if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0)
    throw Error(ErrorCode::ConfigError, "alpha must be in (0,1)");

  if (j.contains("threshold_grid")) {
    cfg.threshold_grid = j.at("threshold_grid").get<std::vector<double>>();
    if (cfg.threshold_grid.empty() ||
        !std::is_sorted(cfg.threshold_grid.begin(), cfg.threshold_grid.end()))
      throw Error(ErrorCode::ConfigError, "threshold_grid must be non-empty ascending");
  }
  if (j.contains("difference_threshold"))
    cfg.difference_threshold = j.at("difference_threshold").get<double>();
  if (j.contains("ratio_threshold"))
    cfg.ratio_threshold = j.at("ratio_threshold").get<double>();

  if (j.contains("seed")) {
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.seed_set = true;
  }
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config parse: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace fairkit
