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

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairkit/error.hpp"
#include "fairkit/mlp.hpp"
#include "fairkit/parallel.hpp"
#include "fairkit/svm.hpp"
#include "fairkit/tree.hpp"

namespace fairkit {

enum class ModelFamily { Svm, DecisionTree, RandomForest, Mlp };

inline const char* model_family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::Svm: return "svm";
    case ModelFamily::DecisionTree: return "dt";
    case ModelFamily::RandomForest: return "rf";
    case ModelFamily::Mlp: return "mlp";
  }
  return "?";
}

/// Ordered parameter description, preserved verbatim in reports.
using ParamList = std::vector<std::pair<std::string, std::string>>;

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::vector<int> predict(const EncodedMatrix& x) const = 0;
  virtual bool converged() const { return true; }
};

namespace detail {

inline std::vector<std::vector<double>> to_double_rows(const EncodedMatrix& x) {
  std::vector<std::vector<double>> rows(x.n_rows);
  for (std::size_t r = 0; r < x.n_rows; ++r) rows[r] = x.row_as_double(r);
  return rows;
}

class SvmClassifier : public Classifier {
 public:
  SvmClassifier(MulticlassSvm model) : model_(std::move(model)) {}
  std::vector<int> predict(const EncodedMatrix& x) const override {
    std::vector<int> out(x.n_rows);
    for (std::size_t r = 0; r < x.n_rows; ++r) out[r] = model_.predict(x.row_as_double(r));
    return out;
  }
  bool converged() const override { return model_.converged(); }

 private:
  MulticlassSvm model_;
};

class TreeClassifier : public Classifier {
 public:
  TreeClassifier(DecisionTree tree) : tree_(std::move(tree)) {}
  std::vector<int> predict(const EncodedMatrix& x) const override { return tree_.predict(x); }

 private:
  DecisionTree tree_;
};

class ForestClassifier : public Classifier {
 public:
  ForestClassifier(RandomForest forest) : forest_(std::move(forest)) {}
  std::vector<int> predict(const EncodedMatrix& x) const override {
    return forest_.predict(x);
  }

 private:
  RandomForest forest_;
};

class MlpClassifier : public Classifier {
 public:
  MlpClassifier(MlpModel model) : model_(std::move(model)) {}
  std::vector<int> predict(const EncodedMatrix& x) const override {
    std::vector<int> out(x.n_rows);
    for (std::size_t r = 0; r < x.n_rows; ++r) out[r] = model_.predict_row(x.row_as_double(r));
    return out;
  }

 private:
  MlpModel model_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Grid definitions (defaults follow the reference parameter lists)
// ---------------------------------------------------------------------------

struct SvmGridSpec {
  std::vector<KernelKind> kernels = {KernelKind::Linear, KernelKind::Polynomial,
                                     KernelKind::Rbf, KernelKind::Sigmoid};
  std::vector<double> c_values = {0.1, 1.0, 10.0, 100.0};
  GammaMode gamma_mode = GammaMode::Scale;
  double gamma_value = 0.0;
  int degree = 3;
  double coef = 0.0;
};

struct TreeGridSpec {
  std::vector<std::optional<int>> max_depth = {std::nullopt, 2, 4, 6, 8, 10};
  std::vector<int> min_samples_split = {2, 5, 10};
  std::vector<int> min_samples_leaf = {1, 2, 4};
};

struct ForestGridSpec {
  std::vector<int> n_estimators = {10, 50, 100, 200};
  // "auto" is an alias resolved to sqrt; the report carries the name used.
  std::vector<std::pair<std::string, MaxFeatures>> max_features = {
      {"auto", MaxFeatures::Sqrt}, {"sqrt", MaxFeatures::Sqrt}, {"log2", MaxFeatures::Log2}};
  std::vector<std::optional<int>> max_depth = {std::nullopt, 5, 10, 20};
  std::vector<int> min_samples_split = {2, 5, 10};
  std::vector<int> min_samples_leaf = {1, 2, 4};
};

struct MlpGridSpec {
  std::vector<int> units1 = {8, 10, 20, 30};
  std::vector<int> units2 = {8, 10, 20, 30};
  std::vector<Activation> activations = {Activation::Relu, Activation::Tanh,
                                         Activation::Sigmoid};
  std::vector<Optimizer> optimizers = {Optimizer::Adam, Optimizer::Sgd};
  std::vector<LossKind> losses = {LossKind::CategoricalCrossentropy,
                                  LossKind::MeanSquaredError};
  int epochs = 20;
  int batch_size = 32;
  std::optional<double> learning_rate;
};

/// One grid cell: the ordered parameter description plus the concrete
/// payload for its family.
struct GridCell {
  ParamList params;
  KernelSpec kernel;
  double svm_c = 1.0;
  TreeParams tree;
  ForestParams forest;
  MlpParams mlp;
};

namespace detail {

inline std::string depth_str(const std::optional<int>& d) {
  return d ? std::to_string(*d) : "None";
}

inline std::string double_str(double v) {
  std::string s = std::to_string(v);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace detail

/// Cartesian expansion in declared field order; the cell sequence is the
/// tie-break order for grid search.
inline std::vector<GridCell> expand_grid(const SvmGridSpec& spec) {
  std::vector<GridCell> cells;
  for (KernelKind kernel : spec.kernels) {
    for (double c : spec.c_values) {
      GridCell cell;
      cell.kernel.kind = kernel;
      cell.kernel.degree = spec.degree;
      cell.kernel.coef = spec.coef;
      cell.kernel.gamma_mode = spec.gamma_mode;
      cell.kernel.gamma_value = spec.gamma_value;
      cell.svm_c = c;
      cell.params = {{"kernel", kernel_kind_name(kernel)},
                     {"C", detail::double_str(c)}};
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

inline std::vector<GridCell> expand_grid(const TreeGridSpec& spec) {
  std::vector<GridCell> cells;
  for (const auto& depth : spec.max_depth) {
    for (int split : spec.min_samples_split) {
      for (int leaf : spec.min_samples_leaf) {
        GridCell cell;
        cell.tree = TreeParams{depth, split, leaf};
        cell.params = {{"max_depth", detail::depth_str(depth)},
                       {"min_samples_split", std::to_string(split)},
                       {"min_samples_leaf", std::to_string(leaf)}};
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

inline std::vector<GridCell> expand_grid(const ForestGridSpec& spec) {
  std::vector<GridCell> cells;
  for (int estimators : spec.n_estimators) {
    for (const auto& [mf_name, mf] : spec.max_features) {
      for (const auto& depth : spec.max_depth) {
        for (int split : spec.min_samples_split) {
          for (int leaf : spec.min_samples_leaf) {
            GridCell cell;
            cell.forest.n_estimators = estimators;
            cell.forest.max_features = mf;
            cell.forest.max_depth = depth;
            cell.forest.min_samples_split = split;
            cell.forest.min_samples_leaf = leaf;
            cell.params = {{"n_estimators", std::to_string(estimators)},
                           {"max_features", mf_name},
                           {"max_depth", detail::depth_str(depth)},
                           {"min_samples_split", std::to_string(split)},
                           {"min_samples_leaf", std::to_string(leaf)}};
            cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  return cells;
}

inline std::vector<GridCell> expand_grid(const MlpGridSpec& spec) {
  std::vector<GridCell> cells;
  for (int u1 : spec.units1) {
    for (int u2 : spec.units2) {
      for (Activation act : spec.activations) {
        for (Optimizer opt : spec.optimizers) {
          for (LossKind loss : spec.losses) {
            GridCell cell;
            cell.mlp.units1 = u1;
            cell.mlp.units2 = u2;
            cell.mlp.activation = act;
            cell.mlp.optimizer = opt;
            cell.mlp.loss = loss;
            cell.mlp.epochs = spec.epochs;
            cell.mlp.batch_size = spec.batch_size;
            cell.mlp.learning_rate = spec.learning_rate;
            cell.params = {{"units1", std::to_string(u1)},
                           {"units2", std::to_string(u2)},
                           {"activation", activation_name(act)},
                           {"optimizer", optimizer_name(opt)},
                           {"loss", loss_name(loss)}};
            cells.push_back(std::move(cell));
          }
        }
      }
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Fitting and grid search
// ---------------------------------------------------------------------------

/// Trains one grid cell. The seed feeds the stochastic families (forest
/// bootstrap, MLP init/shuffle); trees and SVM are deterministic anyway.
inline std::unique_ptr<Classifier> fit_cell(ModelFamily family, const GridCell& cell,
                                            const EncodedMatrix& train_x,
                                            const std::vector<int>& y,
                                            const std::vector<double>& weights,
                                            int n_classes, std::uint64_t seed,
                                            const SmoOptions& smo_opts = {}) {
  switch (family) {
    case ModelFamily::Svm: {
      auto rows = detail::to_double_rows(train_x);
      double gamma = gamma_resolve(cell.kernel, train_x);
      MulticlassSvm model = multiclass_train(rows, y, n_classes, cell.svm_c, weights,
                                             cell.kernel, gamma, smo_opts);
      return std::make_unique<detail::SvmClassifier>(std::move(model));
    }
    case ModelFamily::DecisionTree: {
      DecisionTree tree;
      tree.fit(train_x, y, weights, cell.tree, n_classes);
      return std::make_unique<detail::TreeClassifier>(std::move(tree));
    }
    case ModelFamily::RandomForest: {
      ForestParams params = cell.forest;
      params.seed = seed;
      RandomForest forest;
      forest.fit(train_x, y, weights, params, n_classes);
      return std::make_unique<detail::ForestClassifier>(std::move(forest));
    }
    case ModelFamily::Mlp: {
      MlpParams params = cell.mlp;
      params.seed = seed;
      auto rows = detail::to_double_rows(train_x);
      MlpModel model = mlp_fit(rows, y, weights, params, n_classes);
      return std::make_unique<detail::MlpClassifier>(std::move(model));
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown model family");
}

struct GridCellResult {
  ParamList params;
  double score = 0.0;
  bool converged = true;
};

struct GridSearchResult {
  std::vector<GridCellResult> cells;
  std::size_t best_index = 0;
};

inline double accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i)
    if (y_true[i] == y_pred[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

/// Seed for a given grid cell, shared by grid_search and any later refit so
/// the winning cell reproduces bit-identically.
inline std::uint64_t grid_cell_seed(std::uint64_t seed, std::size_t cell_index) {
  return derive_seed(seed, 0x9f1dULL, cell_index);
}

/// Exhaustive sweep scored by held-out accuracy on the test split. Cells run
/// concurrently with per-cell derived seeds; best = highest score, ties to
/// the earliest cell in declared order.
inline GridSearchResult grid_search(ModelFamily family, const std::vector<GridCell>& cells,
                                    const EncodedMatrix& train_x, const std::vector<int>& train_y,
                                    const std::vector<double>& weights,
                                    const EncodedMatrix& test_x, const std::vector<int>& test_y,
                                    int n_classes, std::uint64_t seed,
                                    const SmoOptions& smo_opts = {}) {
  if (cells.empty()) throw Error(ErrorCode::ConfigError, "empty grid");
  GridSearchResult result;
  result.cells.assign(cells.size(), {});

  parallel_for(cells.size(), [&](std::size_t i) {
    auto model = fit_cell(family, cells[i], train_x, train_y, weights, n_classes,
                          grid_cell_seed(seed, i), smo_opts);
    GridCellResult r;
    r.params = cells[i].params;
    r.score = accuracy(test_y, model->predict(test_x));
    r.converged = model->converged();
    result.cells[i] = std::move(r);
  });

  for (std::size_t i = 1; i < result.cells.size(); ++i)
    if (result.cells[i].score > result.cells[result.best_index].score) result.best_index = i;
  return result;
}

}  // namespace fairkit
