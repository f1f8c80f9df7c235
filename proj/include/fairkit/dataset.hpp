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
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairkit/csv.hpp"
#include "fairkit/error.hpp"
#include "fairkit/random.hpp"

namespace fairkit {

/// Nominal table: every column holds dense category codes in
/// [0, cardinality); kMissing marks an empty/NA cell until imputation.
/// The target column is empty until a target rule derives it.
struct CategoricalDataset {
  static constexpr int kMissing = -1;

  std::vector<std::string> feature_names;
  std::vector<std::vector<int>> columns;            // [feature][row]
  std::vector<std::vector<std::string>> categories; // [feature][code] -> label
  std::vector<int> target;
  std::vector<std::string> target_labels;

  std::size_t n_rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t n_features() const { return feature_names.size(); }
  int cardinality(std::size_t f) const { return static_cast<int>(categories[f].size()); }

  std::optional<std::size_t> feature_index(const std::string& name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i)
      if (feature_names[i] == name) return i;
    return std::nullopt;
  }

  std::vector<int> row_codes(std::size_t r) const {
    std::vector<int> codes(n_features());
    for (std::size_t f = 0; f < n_features(); ++f) codes[f] = columns[f][r];
    return codes;
  }

  bool has_missing() const {
    for (const auto& col : columns)
      for (int code : col)
        if (code == kMissing) return true;
    return false;
  }

  CategoricalDataset select_rows(const std::vector<std::size_t>& rows) const {
    CategoricalDataset out;
    out.feature_names = feature_names;
    out.categories = categories;
    out.target_labels = target_labels;
    out.columns.resize(columns.size());
    for (std::size_t f = 0; f < columns.size(); ++f) {
      out.columns[f].reserve(rows.size());
      for (std::size_t r : rows) out.columns[f].push_back(columns[f][r]);
    }
    if (!target.empty()) {
      out.target.reserve(rows.size());
      for (std::size_t r : rows) out.target.push_back(target[r]);
    }
    return out;
  }

  /// Category label -> row count for one feature, in code order.
  std::vector<std::pair<std::string, std::size_t>> value_counts(std::size_t f) const {
    std::vector<std::size_t> counts(categories[f].size(), 0);
    for (int code : columns[f])
      if (code != kMissing) ++counts[static_cast<std::size_t>(code)];
    std::vector<std::pair<std::string, std::size_t>> out;
    for (std::size_t c = 0; c < counts.size(); ++c)
      out.emplace_back(categories[f][c], counts[c]);
    return out;
  }
};

/// One-hot design matrix with a manifest mapping each column back to its
/// (feature, category) source.
struct EncodedColumn {
  std::string feature;
  std::string category;
  std::size_t source_feature = 0;
  int source_code = 0;

  std::string name() const { return feature + "_" + category; }
};

struct EncodedMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<std::uint8_t> data;  // row-major {0,1}
  std::vector<EncodedColumn> manifest;
  std::vector<int> target;
  std::vector<std::string> target_labels;

  std::uint8_t at(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }

  std::vector<double> row_as_double(std::size_t r) const {
    std::vector<double> out(n_cols);
    for (std::size_t c = 0; c < n_cols; ++c) out[c] = static_cast<double>(at(r, c));
    return out;
  }

  /// Inverts the encoding of one row back to per-feature codes.
  std::vector<int> decode_row(std::size_t r) const {
    std::size_t n_features = 0;
    for (const auto& col : manifest) n_features = std::max(n_features, col.source_feature + 1);
    std::vector<int> codes(n_features, CategoricalDataset::kMissing);
    for (std::size_t c = 0; c < n_cols; ++c)
      if (at(r, c)) codes[manifest[c].source_feature] = manifest[c].source_code;
    return codes;
  }
};

/// Dichotomization rules for the sensitive attributes: a total map from raw
/// category label to bucket {0,1} plus which bucket counts as privileged.
struct SensitiveAttribute {
  std::string name;
  std::map<std::string, int> mapping;       // category label -> bucket
  int privileged_value = 1;
  std::array<std::string, 2> bucket_names = {"0", "1"};
};

struct LegitimateCondition {
  std::string column;
  std::string value;  // raw category label defining L=1
};

struct SensitiveSpec {
  std::vector<SensitiveAttribute> attributes;
  std::optional<LegitimateCondition> legitimate;
};

/// Per-row {0,1} bucket values for each sensitive attribute.
struct DichotomizedAttributes {
  std::vector<std::string> names;
  std::vector<int> privileged;               // per attribute
  std::vector<std::array<std::string, 2>> bucket_names;
  std::vector<std::vector<std::uint8_t>> values;  // [attr][row]

  std::size_t n_attributes() const { return names.size(); }
  std::size_t n_rows() const { return values.empty() ? 0 : values.front().size(); }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

enum class TargetRule { Completed, Noprior, Concat };

inline const char* target_rule_name(TargetRule rule) {
  switch (rule) {
    case TargetRule::Completed: return "COMPLETED";
    case TargetRule::Noprior: return "NOPRIOR";
    case TargetRule::Concat: return "CONCAT";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Loads the schema's columns from a headered CSV. Every distinct string per
/// column gets a dense code in first-appearance order; empty and "NA" cells
/// become kMissing.
inline CategoricalDataset load_csv(const std::string& path,
                                   const std::vector<std::string>& schema) {
  CsvTable table = read_csv(path);

  std::vector<std::size_t> col_of_feature;
  for (const auto& name : schema) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end())
      throw Error(ErrorCode::MissingColumn, name + " not in header of " + path);
    col_of_feature.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }

  CategoricalDataset ds;
  ds.feature_names = schema;
  ds.columns.assign(schema.size(), {});
  ds.categories.assign(schema.size(), {});

  std::vector<std::unordered_map<std::string, int>> code_of(schema.size());
  for (const auto& row : table.rows) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const std::string& cell = row[col_of_feature[f]];
      if (cell.empty() || cell == "NA") {
        ds.columns[f].push_back(CategoricalDataset::kMissing);
        continue;
      }
      auto [it, inserted] = code_of[f].emplace(cell, static_cast<int>(ds.categories[f].size()));
      if (inserted) ds.categories[f].push_back(cell);
      ds.columns[f].push_back(it->second);
    }
  }
  return ds;
}

namespace detail {

/// Modal non-missing code; ties break to the smallest code.
inline int modal_code(const std::vector<int>& column, int cardinality) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(cardinality), 0);
  for (int code : column)
    if (code != CategoricalDataset::kMissing) ++counts[static_cast<std::size_t>(code)];
  int best = -1;
  std::size_t best_count = 0;
  for (int c = 0; c < cardinality; ++c) {
    if (counts[static_cast<std::size_t>(c)] > best_count) {
      best = c;
      best_count = counts[static_cast<std::size_t>(c)];
    }
  }
  return best;  // -1 when the column is entirely missing
}

inline int capped_noprior(const std::string& label) {
  int value = 0;
  try {
    value = std::stoi(label);
  } catch (...) {
    throw Error(ErrorCode::UnmappedCategory, "NOPRIOR value not numeric: " + label);
  }
  if (value < 0) value = 0;
  return std::min(value, 3);
}

inline CategoricalDataset without_features(const CategoricalDataset& ds,
                                           const std::set<std::size_t>& drop) {
  CategoricalDataset out;
  out.target = ds.target;
  out.target_labels = ds.target_labels;
  for (std::size_t f = 0; f < ds.n_features(); ++f) {
    if (drop.count(f)) continue;
    out.feature_names.push_back(ds.feature_names[f]);
    out.columns.push_back(ds.columns[f]);
    out.categories.push_back(ds.categories[f]);
  }
  return out;
}

}  // namespace detail

/// Derives the target column and removes the consumed feature columns.
///  - Completed: REASON label "1" -> COMPLETE, anything else -> INCOMPLETE.
///  - Noprior:   NOPRIOR numeric value capped at 3; classes sorted ascending.
///  - Concat:    cross "<COMPLETE|INCOMPLETE>_<capped noprior>".
/// Missing cells in a rule column are filled with the column's modal code
/// first (same rule as impute_missing).
inline CategoricalDataset derive_target(const CategoricalDataset& ds, TargetRule rule) {
  auto column_or_throw = [&](const char* name) {
    auto idx = ds.feature_index(name);
    if (!idx) throw Error(ErrorCode::MissingRuleColumn, std::string(name) + " required by rule");
    return *idx;
  };

  auto filled = [&](std::size_t f) {
    std::vector<int> col = ds.columns[f];
    if (std::find(col.begin(), col.end(), CategoricalDataset::kMissing) != col.end()) {
      int mode = detail::modal_code(col, ds.cardinality(f));
      if (mode < 0) throw Error(ErrorCode::AllMissingColumn, ds.feature_names[f]);
      for (int& code : col)
        if (code == CategoricalDataset::kMissing) code = mode;
    }
    return col;
  };

  std::set<std::size_t> consumed;
  std::vector<std::string> labels;   // per row
  const std::size_t n = ds.n_rows();

  if (rule == TargetRule::Completed || rule == TargetRule::Concat) {
    std::size_t reason = column_or_throw("REASON");
    consumed.insert(reason);
    std::vector<int> col = filled(reason);
    labels.resize(n);
    for (std::size_t r = 0; r < n; ++r)
      labels[r] = ds.categories[reason][static_cast<std::size_t>(col[r])] == "1"
                      ? "COMPLETE"
                      : "INCOMPLETE";
  }
  if (rule == TargetRule::Noprior || rule == TargetRule::Concat) {
    std::size_t noprior = column_or_throw("NOPRIOR");
    consumed.insert(noprior);
    std::vector<int> col = filled(noprior);
    if (labels.empty()) labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      int capped = detail::capped_noprior(ds.categories[noprior][static_cast<std::size_t>(col[r])]);
      std::string part = std::to_string(capped);
      labels[r] = labels[r].empty() ? part : labels[r] + "_" + part;
    }
  }

  // Dense class codes in sorted label order; COMPLETE_* sorts before
  // INCOMPLETE_* and noprior codes ascend, matching the reported class order.
  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2)
    throw Error(ErrorCode::DegenerateTarget, "target needs >= 2 classes");

  CategoricalDataset out = detail::without_features(ds, consumed);
  out.target_labels.assign(distinct.begin(), distinct.end());
  std::unordered_map<std::string, int> code_of;
  for (std::size_t i = 0; i < out.target_labels.size(); ++i)
    code_of[out.target_labels[i]] = static_cast<int>(i);
  out.target.resize(n);
  for (std::size_t r = 0; r < n; ++r) out.target[r] = code_of[labels[r]];
  return out;
}

/// Removes constant-valued columns and the configured identifier columns.
inline CategoricalDataset drop_uninformative(const CategoricalDataset& ds,
                                             const std::vector<std::string>& id_columns) {
  std::set<std::size_t> drop;
  for (const auto& name : id_columns) {
    auto idx = ds.feature_index(name);
    if (idx) drop.insert(*idx);
  }
  for (std::size_t f = 0; f < ds.n_features(); ++f) {
    std::set<int> distinct;
    for (int code : ds.columns[f])
      if (code != CategoricalDataset::kMissing) distinct.insert(code);
    if (distinct.size() <= 1) drop.insert(f);
  }
  if (drop.size() == ds.n_features())
    throw Error(ErrorCode::EmptyFeatureSet, "all columns dropped");
  return detail::without_features(ds, drop);
}

/// Replaces every missing cell with its column's modal code.
inline CategoricalDataset impute_missing(const CategoricalDataset& ds) {
  CategoricalDataset out = ds;
  for (std::size_t f = 0; f < out.n_features(); ++f) {
    auto& col = out.columns[f];
    if (std::find(col.begin(), col.end(), CategoricalDataset::kMissing) == col.end()) continue;
    int mode = detail::modal_code(col, out.cardinality(f));
    if (mode < 0) throw Error(ErrorCode::AllMissingColumn, out.feature_names[f]);
    for (int& code : col)
      if (code == CategoricalDataset::kMissing) code = mode;
  }
  return out;
}

/// Applies the sensitive-attribute dichotomization maps. Maps must be total
/// over the observed categories; missing cells must be imputed first.
inline DichotomizedAttributes dichotomize(const CategoricalDataset& ds,
                                          const SensitiveSpec& spec) {
  DichotomizedAttributes out;
  for (const auto& attr : spec.attributes) {
    auto idx = ds.feature_index(attr.name);
    if (!idx) throw Error(ErrorCode::MissingColumn, attr.name + " not in dataset");
    std::size_t f = *idx;

    std::vector<int> bucket_of_code(ds.categories[f].size(), -1);
    for (std::size_t c = 0; c < ds.categories[f].size(); ++c) {
      auto it = attr.mapping.find(ds.categories[f][c]);
      if (it == attr.mapping.end())
        throw Error(ErrorCode::UnmappedCategory,
                    attr.name + " category '" + ds.categories[f][c] + "' has no bucket");
      if (it->second != 0 && it->second != 1)
        throw Error(ErrorCode::UnmappedCategory,
                    attr.name + " bucket must be 0 or 1");
      bucket_of_code[c] = it->second;
    }

    std::vector<std::uint8_t> values(ds.n_rows());
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      int code = ds.columns[f][r];
      if (code == CategoricalDataset::kMissing)
        throw Error(ErrorCode::UnmappedCategory, attr.name + " has missing cells");
      values[r] = static_cast<std::uint8_t>(bucket_of_code[static_cast<std::size_t>(code)]);
    }

    out.names.push_back(attr.name);
    out.privileged.push_back(attr.privileged_value);
    out.bucket_names.push_back(attr.bucket_names);
    out.values.push_back(std::move(values));
  }
  return out;
}

/// One-hot encodes every feature column: one {0,1} column per category,
/// exactly one 1 per feature group per row.
inline EncodedMatrix one_hot_encode(const CategoricalDataset& ds) {
  if (ds.has_missing())
    throw Error(ErrorCode::ResidualMissing, "impute before encoding");

  EncodedMatrix m;
  m.n_rows = ds.n_rows();
  m.target = ds.target;
  m.target_labels = ds.target_labels;

  std::vector<std::size_t> offset(ds.n_features());
  for (std::size_t f = 0; f < ds.n_features(); ++f) {
    offset[f] = m.n_cols;
    for (int c = 0; c < ds.cardinality(f); ++c)
      m.manifest.push_back({ds.feature_names[f], ds.categories[f][static_cast<std::size_t>(c)],
                            f, c});
    m.n_cols += static_cast<std::size_t>(ds.cardinality(f));
  }

  m.data.assign(m.n_rows * m.n_cols, 0);
  for (std::size_t r = 0; r < m.n_rows; ++r)
    for (std::size_t f = 0; f < ds.n_features(); ++f)
      m.data[r * m.n_cols + offset[f] + static_cast<std::size_t>(ds.columns[f][r])] = 1;
  return m;
}

/// Shuffled 70/30 split; |test| = floor(0.3 n), remainder rows go to train.
inline SplitIndices train_test_split(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw Error(ErrorCode::TooFewRows, "need at least 10 rows");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::size_t test_size = (n * 3) / 10;
  SplitIndices split;
  split.seed = seed;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_size));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(test_size), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

}  // namespace fairkit
