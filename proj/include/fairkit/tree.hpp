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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "fairkit/dataset.hpp"
#include "fairkit/error.hpp"
#include "fairkit/parallel.hpp"
#include "fairkit/random.hpp"

namespace fairkit {

struct TreeParams {
  std::optional<int> max_depth;  // nullopt = unlimited
  int min_samples_split = 2;
  int min_samples_leaf = 1;
};

enum class MaxFeatures { All, Sqrt, Log2 };

inline const char* max_features_name(MaxFeatures mf) {
  switch (mf) {
    case MaxFeatures::All: return "all";
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::Log2: return "log2";
  }
  return "?";
}

struct ForestParams {
  int n_estimators = 100;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  std::optional<int> max_depth;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

/// Gini impurity of a weighted class distribution: 1 - sum (w_c / W)^2.
inline double gini(const std::vector<double>& weights_by_class) {
  double total = 0.0;
  for (double w : weights_by_class) {
    if (w < 0.0) throw Error(ErrorCode::ZeroWeight, "negative class weight");
    total += w;
  }
  if (total <= 0.0) throw Error(ErrorCode::ZeroWeight, "node has zero total weight");
  double sum_sq = 0.0;
  for (double w : weights_by_class) {
    double p = w / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

/// Greedy binary-feature CART with weighted Gini. Internal nodes split on a
/// {0,1} column (0 -> left, 1 -> right); leaves hold the weighted class
/// distribution. Split ties break to the lowest column index.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    int left = -1;
    int right = -1;
    std::vector<double> class_weights;
  };

  void fit(const EncodedMatrix& x, const std::vector<int>& y,
           const std::vector<double>& weights, const TreeParams& params,
           int n_classes) {
    fit_impl(x, y, weights, params, n_classes, 0, nullptr);
  }

  /// Forest variant: `mtry` candidate features drawn per split from `rng`.
  void fit(const EncodedMatrix& x, const std::vector<int>& y,
           const std::vector<double>& weights, const TreeParams& params,
           int n_classes, std::size_t mtry, Rng& rng) {
    fit_impl(x, y, weights, params, n_classes, mtry, &rng);
  }

  int predict(const EncodedMatrix& x, std::size_t row) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const Node& nd = nodes_[static_cast<std::size_t>(node)];
      node = x.at(row, static_cast<std::size_t>(nd.feature)) ? nd.right : nd.left;
    }
    return argmax_class(nodes_[static_cast<std::size_t>(node)].class_weights);
  }

  std::vector<int> predict(const EncodedMatrix& x) const {
    std::vector<int> out(x.n_rows);
    for (std::size_t r = 0; r < x.n_rows; ++r) out[r] = predict(x, r);
    return out;
  }

  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  static int argmax_class(const std::vector<double>& weights) {
    int best = 0;
    for (std::size_t c = 1; c < weights.size(); ++c)
      if (weights[c] > weights[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;
  }

  void fit_impl(const EncodedMatrix& x, const std::vector<int>& y,
                const std::vector<double>& weights, const TreeParams& params,
                int n_classes, std::size_t mtry, Rng* rng) {
    if (x.n_rows == 0) throw Error(ErrorCode::EmptyData, "no rows to fit");
    if (y.size() != x.n_rows || weights.size() != x.n_rows)
      throw Error(ErrorCode::LengthMismatch, "labels/weights do not match rows");
    nodes_.clear();
    std::vector<std::size_t> rows(x.n_rows);
    for (std::size_t r = 0; r < x.n_rows; ++r) rows[r] = r;
    grow(x, y, weights, params, n_classes, rows, 0, mtry, rng);
  }

  int grow(const EncodedMatrix& x, const std::vector<int>& y,
           const std::vector<double>& weights, const TreeParams& params,
           int n_classes, std::vector<std::size_t>& rows, int depth,
           std::size_t mtry, Rng* rng) {
    std::vector<double> dist(static_cast<std::size_t>(n_classes), 0.0);
    for (std::size_t r : rows) dist[static_cast<std::size_t>(y[r])] += weights[r];

    int self = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[static_cast<std::size_t>(self)].class_weights = dist;

    bool pure = std::count_if(dist.begin(), dist.end(),
                              [](double w) { return w > 0.0; }) <= 1;
    bool depth_stop = params.max_depth && depth >= *params.max_depth;
    if (pure || depth_stop ||
        rows.size() < static_cast<std::size_t>(params.min_samples_split)) {
      return self;
    }

    double total = 0.0;
    for (double w : dist) total += w;
    double parent_gini = gini(dist);

    std::vector<std::size_t> candidates;
    if (mtry == 0 || mtry >= x.n_cols) {
      candidates.resize(x.n_cols);
      for (std::size_t cidx = 0; cidx < x.n_cols; ++cidx) candidates[cidx] = cidx;
    } else {
      // Partial Fisher-Yates draw of mtry distinct columns, then sorted so
      // the tie rule (lowest column) is independent of draw order.
      std::vector<std::size_t> all(x.n_cols);
      for (std::size_t cidx = 0; cidx < x.n_cols; ++cidx) all[cidx] = cidx;
      for (std::size_t k = 0; k < mtry; ++k) {
        std::size_t pick = k + static_cast<std::size_t>(rng->next_below(x.n_cols - k));
        std::swap(all[k], all[pick]);
      }
      candidates.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(mtry));
      std::sort(candidates.begin(), candidates.end());
    }

    int best_col = -1;
    double best_gain = 1e-12;
    for (std::size_t col : candidates) {
      std::vector<double> left(static_cast<std::size_t>(n_classes), 0.0);
      std::size_t left_count = 0;
      for (std::size_t r : rows) {
        if (!x.at(r, col)) {
          left[static_cast<std::size_t>(y[r])] += weights[r];
          ++left_count;
        }
      }
      std::size_t right_count = rows.size() - left_count;
      if (left_count < static_cast<std::size_t>(params.min_samples_leaf) ||
          right_count < static_cast<std::size_t>(params.min_samples_leaf))
        continue;

      double left_total = 0.0;
      std::vector<double> right(static_cast<std::size_t>(n_classes), 0.0);
      for (std::size_t cidx = 0; cidx < left.size(); ++cidx) {
        left_total += left[cidx];
        right[cidx] = dist[cidx] - left[cidx];
      }
      double right_total = total - left_total;
      if (left_total <= 0.0 || right_total <= 0.0) continue;

      double gain = parent_gini -
                    (left_total * gini(left) + right_total * gini(right)) / total;
      if (gain > best_gain) {
        best_gain = gain;
        best_col = static_cast<int>(col);
      }
    }
    if (best_col < 0) return self;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (x.at(r, static_cast<std::size_t>(best_col))) right_rows.push_back(r);
      else left_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    int left_child = grow(x, y, weights, params, n_classes, left_rows, depth + 1, mtry, rng);
    int right_child = grow(x, y, weights, params, n_classes, right_rows, depth + 1, mtry, rng);
    nodes_[static_cast<std::size_t>(self)].feature = best_col;
    nodes_[static_cast<std::size_t>(self)].left = left_child;
    nodes_[static_cast<std::size_t>(self)].right = right_child;
    return self;
  }

  std::vector<Node> nodes_;
};

/// Bagged forest of weighted Gini trees. Trees train on seeded bootstrap
/// resamples (row weights carried along) with per-split feature subsampling;
/// prediction is a majority vote with ties to the lowest class index.
class RandomForest {
 public:
  void fit(const EncodedMatrix& x, const std::vector<int>& y,
           const std::vector<double>& weights, const ForestParams& params,
           int n_classes) {
    if (x.n_rows == 0) throw Error(ErrorCode::EmptyData, "no rows to fit");
    n_classes_ = n_classes;
    params_ = params;
    trees_.assign(static_cast<std::size_t>(params.n_estimators), {});

    std::size_t mtry = resolve_mtry(params.max_features, x.n_cols);
    TreeParams tree_params{params.max_depth, params.min_samples_split,
                           params.min_samples_leaf};

    std::vector<std::vector<std::size_t>> oob_rows(trees_.size());
    parallel_for(trees_.size(), [&](std::size_t t) {
      Rng rng(derive_seed(params.seed, t));
      EncodedMatrix sample;
      std::vector<int> sample_y;
      std::vector<double> sample_w;
      if (params.bootstrap) {
        std::vector<char> chosen(x.n_rows, 0);
        sample.n_rows = x.n_rows;
        sample.n_cols = x.n_cols;
        sample.data.resize(x.n_rows * x.n_cols);
        sample_y.resize(x.n_rows);
        sample_w.resize(x.n_rows);
        for (std::size_t r = 0; r < x.n_rows; ++r) {
          std::size_t src = static_cast<std::size_t>(rng.next_below(x.n_rows));
          chosen[src] = 1;
          std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(src * x.n_cols),
                      x.n_cols,
                      sample.data.begin() + static_cast<std::ptrdiff_t>(r * x.n_cols));
          sample_y[r] = y[src];
          sample_w[r] = weights[src];
        }
        for (std::size_t r = 0; r < x.n_rows; ++r)
          if (!chosen[r]) oob_rows[t].push_back(r);
        trees_[t].fit(sample, sample_y, sample_w, tree_params, n_classes, mtry, rng);
      } else {
        trees_[t].fit(x, y, weights, tree_params, n_classes, mtry, rng);
      }
    });

    // Out-of-bag error over rows with at least one vote.
    std::vector<std::vector<int>> votes(x.n_rows,
                                        std::vector<int>(static_cast<std::size_t>(n_classes), 0));
    for (std::size_t t = 0; t < trees_.size(); ++t)
      for (std::size_t r : oob_rows[t])
        ++votes[r][static_cast<std::size_t>(trees_[t].predict(x, r))];
    std::size_t scored = 0, wrong = 0;
    for (std::size_t r = 0; r < x.n_rows; ++r) {
      int total_votes = 0, best = 0;
      for (int c = 0; c < n_classes; ++c) {
        total_votes += votes[r][static_cast<std::size_t>(c)];
        if (votes[r][static_cast<std::size_t>(c)] > votes[r][static_cast<std::size_t>(best)])
          best = c;
      }
      if (total_votes == 0) continue;
      ++scored;
      if (best != y[r]) ++wrong;
    }
    oob_error_ = scored ? static_cast<double>(wrong) / static_cast<double>(scored)
                        : std::optional<double>{};
  }

  int predict(const EncodedMatrix& x, std::size_t row) const {
    std::vector<int> votes(static_cast<std::size_t>(n_classes_), 0);
    for (const auto& tree : trees_) ++votes[static_cast<std::size_t>(tree.predict(x, row))];
    int best = 0;
    for (int c = 1; c < n_classes_; ++c)
      if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    return best;
  }

  std::vector<int> predict(const EncodedMatrix& x) const {
    std::vector<int> out(x.n_rows);
    for (std::size_t r = 0; r < x.n_rows; ++r) out[r] = predict(x, r);
    return out;
  }

  static std::size_t resolve_mtry(MaxFeatures mf, std::size_t n_cols) {
    switch (mf) {
      case MaxFeatures::All: return n_cols;
      case MaxFeatures::Sqrt:
        return std::max<std::size_t>(1, static_cast<std::size_t>(
                                            std::sqrt(static_cast<double>(n_cols))));
      case MaxFeatures::Log2:
        return std::max<std::size_t>(1, static_cast<std::size_t>(
                                            std::log2(static_cast<double>(n_cols))));
    }
    return n_cols;
  }

  std::optional<double> oob_error() const { return oob_error_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  int n_classes_ = 0;
  ForestParams params_;
  std::vector<DecisionTree> trees_;
  std::optional<double> oob_error_;
};

}  // namespace fairkit
