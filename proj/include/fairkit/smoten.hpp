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
#include <map>
#include <string>
#include <vector>

#include "fairkit/dataset.hpp"
#include "fairkit/error.hpp"
#include "fairkit/random.hpp"

namespace fairkit {

/// Per-feature, per-category class-conditional counts backing the modified
/// Value Difference Metric: delta(v1, v2) = sum_i |C1i/C1 - C2i/C2|^k.
/// Counts come from the original training rows only; synthetic rows never
/// feed back into the table.
class VdmTable {
 public:
  static VdmTable build(const std::vector<std::vector<int>>& rows,
                        const std::vector<int>& labels, int n_classes,
                        double k_exponent = 1.0) {
    VdmTable t;
    t.k_ = k_exponent;
    t.n_classes_ = n_classes;
    if (rows.empty()) return t;

    const std::size_t n_features = rows.front().size();
    t.class_counts_.resize(n_features);
    t.totals_.resize(n_features);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != n_features)
        throw Error(ErrorCode::LengthMismatch, "ragged code matrix");
      for (std::size_t f = 0; f < n_features; ++f) {
        int v = rows[r][f];
        if (v < 0) throw Error(ErrorCode::UnknownValue, "negative category code");
        auto needed = static_cast<std::size_t>(v) + 1;
        if (t.totals_[f].size() < needed) {
          t.totals_[f].resize(needed, 0);
          t.class_counts_[f].resize(needed,
                                    std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
        }
        ++t.totals_[f][static_cast<std::size_t>(v)];
        ++t.class_counts_[f][static_cast<std::size_t>(v)][static_cast<std::size_t>(labels[r])];
      }
    }
    return t;
  }

  std::size_t n_features() const { return totals_.size(); }
  double k_exponent() const { return k_; }

  /// Value difference between two categories of one feature.
  double delta(std::size_t feature, int v1, int v2) const {
    const auto& c1 = counts_or_throw(feature, v1);
    const auto& c2 = counts_or_throw(feature, v2);
    double total1 = static_cast<double>(totals_[feature][static_cast<std::size_t>(v1)]);
    double total2 = static_cast<double>(totals_[feature][static_cast<std::size_t>(v2)]);
    double sum = 0.0;
    for (int i = 0; i < n_classes_; ++i) {
      double diff = std::abs(static_cast<double>(c1[static_cast<std::size_t>(i)]) / total1 -
                             static_cast<double>(c2[static_cast<std::size_t>(i)]) / total2);
      sum += (k_ == 1.0) ? diff : std::pow(diff, k_);
    }
    return sum;
  }

  /// Row distance: sum of per-feature deltas.
  double distance(const std::vector<int>& a, const std::vector<int>& b) const {
    if (a.size() != b.size() || a.size() != n_features())
      throw Error(ErrorCode::LengthMismatch, "row length does not match table");
    double sum = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) sum += delta(f, a[f], b[f]);
    return sum;
  }

 private:
  const std::vector<long long>& counts_or_throw(std::size_t feature, int v) const {
    if (feature >= totals_.size())
      throw Error(ErrorCode::UnknownValue, "feature out of range");
    if (v < 0 || static_cast<std::size_t>(v) >= totals_[feature].size() ||
        totals_[feature][static_cast<std::size_t>(v)] == 0)
      throw Error(ErrorCode::UnknownValue,
                  "category " + std::to_string(v) + " absent from feature " +
                      std::to_string(feature));
    return class_counts_[feature][static_cast<std::size_t>(v)];
  }

  double k_ = 1.0;
  int n_classes_ = 0;
  std::vector<std::vector<long long>> totals_;                    // [feature][value]
  std::vector<std::vector<std::vector<long long>>> class_counts_; // [feature][value][class]
};

struct ResamplePlan {
  std::map<int, std::size_t> synthetic_per_class;
  int k_neighbors = 5;
  double vdm_exponent = 1.0;
  std::uint64_t seed = 0;
};

/// Plan that levels every class up to the majority count. Classes absent
/// from the labels cannot be synthesized and are left out.
inline ResamplePlan plan_balance(const std::vector<int>& labels, int n_classes,
                                 int k_neighbors, std::uint64_t seed) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  std::size_t majority = *std::max_element(counts.begin(), counts.end());

  ResamplePlan plan;
  plan.k_neighbors = k_neighbors;
  plan.seed = seed;
  for (int c = 0; c < n_classes; ++c) {
    std::size_t count = counts[static_cast<std::size_t>(c)];
    if (count > 0 && count < majority) plan.synthetic_per_class[c] = majority - count;
  }
  return plan;
}

struct SmotenResult {
  std::vector<std::vector<int>> rows;   // originals first, synthetics appended
  std::vector<int> labels;
  std::size_t n_original = 0;
  std::vector<std::string> warnings;
  // provenance per synthetic row (parallel to rows[n_original:])
  std::vector<std::size_t> seed_rows;
  std::vector<std::vector<std::size_t>> neighbor_rows;
};

/// Synthesizes minority rows: seed rows cycle round-robin through a
/// seed-shuffled order; each feature takes the majority vote among the seed
/// row's k nearest same-class neighbors under the VDM distance, with voting
/// ties resolved by a seeded uniform choice. k is clamped to class size - 1;
/// a singleton class is duplicated with a warning.
inline SmotenResult smoten_resample(const std::vector<std::vector<int>>& rows,
                                    const std::vector<int>& labels, int n_classes,
                                    const ResamplePlan& plan) {
  SmotenResult result;
  result.rows = rows;
  result.labels = labels;
  result.n_original = rows.size();
  if (plan.synthetic_per_class.empty()) return result;

  const VdmTable table = VdmTable::build(rows, labels, n_classes, plan.vdm_exponent);
  const std::size_t n_features = rows.empty() ? 0 : rows.front().size();

  for (const auto& [cls, wanted] : plan.synthetic_per_class) {
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (labels[r] == cls) members.push_back(r);
    if (members.empty()) {
      result.warnings.push_back("class " + std::to_string(cls) + " has no rows; skipped");
      continue;
    }

    if (members.size() == 1) {
      result.warnings.push_back("class " + std::to_string(cls) +
                                " is a singleton; duplicating its row");
      for (std::size_t i = 0; i < wanted; ++i) {
        result.rows.push_back(rows[members.front()]);
        result.labels.push_back(cls);
        result.seed_rows.push_back(members.front());
        result.neighbor_rows.push_back({members.front()});
      }
      continue;
    }

    int k = std::min<int>(plan.k_neighbors, static_cast<int>(members.size()) - 1);
    if (k < plan.k_neighbors)
      result.warnings.push_back("class " + std::to_string(cls) + ": k clamped to " +
                                std::to_string(k));

    std::vector<std::size_t> order = members;
    Rng order_rng(derive_seed(plan.seed, 0x5eedULL, static_cast<std::uint64_t>(cls)));
    order_rng.shuffle(order);

    // Pairwise distances within the class; ties later break by row index.
    const std::size_t m = members.size();
    std::vector<double> dist(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        double d = table.distance(rows[members[i]], rows[members[j]]);
        dist[i * m + j] = d;
        dist[j * m + i] = d;
      }
    std::vector<std::size_t> index_of(rows.size(), 0);
    for (std::size_t i = 0; i < m; ++i) index_of[members[i]] = i;

    for (std::size_t s = 0; s < wanted; ++s) {
      std::size_t seed_row = order[s % order.size()];
      std::size_t si = index_of[seed_row];

      std::vector<std::size_t> candidates;
      candidates.reserve(m - 1);
      for (std::size_t j = 0; j < m; ++j)
        if (j != si) candidates.push_back(j);
      std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        double da = dist[si * m + a], db = dist[si * m + b];
        if (da != db) return da < db;
        return members[a] < members[b];
      });
      candidates.resize(static_cast<std::size_t>(k));

      Rng row_rng(derive_seed(plan.seed, static_cast<std::uint64_t>(cls) + 1,
                              static_cast<std::uint64_t>(s)));
      std::vector<int> synthetic(n_features);
      for (std::size_t f = 0; f < n_features; ++f) {
        std::map<int, int> votes;
        for (std::size_t nb : candidates) ++votes[rows[members[nb]][f]];
        int best_votes = 0;
        for (const auto& [value, count] : votes) best_votes = std::max(best_votes, count);
        std::vector<int> tied;
        for (const auto& [value, count] : votes)
          if (count == best_votes) tied.push_back(value);
        synthetic[f] = tied.size() == 1
                           ? tied.front()
                           : tied[row_rng.next_below(tied.size())];
      }
      result.rows.push_back(std::move(synthetic));
      result.labels.push_back(cls);
      result.seed_rows.push_back(seed_row);
      std::vector<std::size_t> neighbor_ids;
      for (std::size_t nb : candidates) neighbor_ids.push_back(members[nb]);
      result.neighbor_rows.push_back(std::move(neighbor_ids));
    }
  }
  return result;
}

/// Convenience overload over a coded dataset; appends synthetic rows to
/// every feature column and the target.
inline CategoricalDataset smoten_resample(const CategoricalDataset& ds,
                                          const ResamplePlan& plan,
                                          std::vector<std::string>* warnings = nullptr) {
  std::vector<std::vector<int>> rows(ds.n_rows());
  for (std::size_t r = 0; r < ds.n_rows(); ++r) rows[r] = ds.row_codes(r);
  SmotenResult res = smoten_resample(rows, ds.target,
                                     static_cast<int>(ds.target_labels.size()), plan);
  CategoricalDataset out = ds;
  for (std::size_t r = res.n_original; r < res.rows.size(); ++r) {
    for (std::size_t f = 0; f < out.n_features(); ++f)
      out.columns[f].push_back(res.rows[r][f]);
    out.target.push_back(res.labels[r]);
  }
  if (warnings) *warnings = res.warnings;
  return out;
}

}  // namespace fairkit
