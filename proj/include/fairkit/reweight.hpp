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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fairkit/dataset.hpp"
#include "fairkit/error.hpp"
#include "fairkit/parallel.hpp"

namespace fairkit {

// ---------------------------------------------------------------------------
// Chi-squared machinery
// ---------------------------------------------------------------------------

/// Upper critical values at significance 0.05 for df = 1..30.
inline double chi2_critical_05(int df) {
  static constexpr double table[30] = {
      3.841,  5.991,  7.815,  9.488,  11.070, 12.592, 14.067, 15.507, 16.919, 18.307,
      19.675, 21.026, 22.362, 23.685, 24.996, 26.296, 27.587, 28.869, 30.144, 31.410,
      32.671, 33.924, 35.172, 36.415, 37.652, 38.885, 40.113, 41.337, 42.557, 43.773};
  if (df < 1 || df > 30)
    throw Error(ErrorCode::DegenerateTable, "critical table covers df 1..30");
  return table[df - 1];
}

/// Regularized lower incomplete gamma P(a, x); series for x < a+1, Lentz
/// continued fraction otherwise.
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (x == 0.0) return 0.0;
  double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 1000; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(log_prefactor);
  }
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(log_prefactor) * h;
}

inline double chi2_p_value(double statistic, int df) {
  return 1.0 - gamma_p(static_cast<double>(df) / 2.0, statistic / 2.0);
}

/// Observed counts over attribute-value cells (rows) crossed with target
/// classes (columns). Expected counts come from the margins.
struct ContingencyTable {
  std::vector<std::vector<long long>> observed;  // [cell][class]

  std::size_t n_rows() const { return observed.size(); }
  std::size_t n_cols() const { return observed.empty() ? 0 : observed.front().size(); }

  long long row_margin(std::size_t i) const {
    long long sum = 0;
    for (long long v : observed[i]) sum += v;
    return sum;
  }
  long long col_margin(std::size_t j) const {
    long long sum = 0;
    for (const auto& row : observed) sum += row[j];
    return sum;
  }
  long long grand_total() const {
    long long sum = 0;
    for (std::size_t i = 0; i < n_rows(); ++i) sum += row_margin(i);
    return sum;
  }
  double expected(std::size_t i, std::size_t j) const {
    return static_cast<double>(row_margin(i)) * static_cast<double>(col_margin(j)) /
           static_cast<double>(grand_total());
  }
  int degrees_of_freedom() const {
    return static_cast<int>((n_rows() - 1) * (n_cols() - 1));
  }

  /// Drops all-zero rows and columns (their expected counts would be zero).
  ContingencyTable collapsed() const {
    ContingencyTable out;
    std::vector<std::size_t> keep_cols;
    for (std::size_t j = 0; j < n_cols(); ++j)
      if (col_margin(j) > 0) keep_cols.push_back(j);
    for (std::size_t i = 0; i < n_rows(); ++i) {
      if (row_margin(i) == 0) continue;
      std::vector<long long> row;
      for (std::size_t j : keep_cols) row.push_back(observed[i][j]);
      out.observed.push_back(std::move(row));
    }
    return out;
  }

  /// Merges target-class columns until every expected count reaches 5 or
  /// only two columns remain. The offending column joins its adjacent
  /// neighbour with the smaller margin (left on ties).
  ContingencyTable merged_small_expected(double min_expected = 5.0) const {
    ContingencyTable t = *this;
    while (t.n_cols() > 2) {
      double worst = min_expected;
      std::size_t worst_col = t.n_cols();
      for (std::size_t i = 0; i < t.n_rows(); ++i) {
        for (std::size_t j = 0; j < t.n_cols(); ++j) {
          double e = t.expected(i, j);
          if (e < worst) {
            worst = e;
            worst_col = j;
          }
        }
      }
      if (worst_col == t.n_cols()) break;
      std::size_t into;
      if (worst_col == 0) into = 1;
      else if (worst_col == t.n_cols() - 1) into = worst_col - 1;
      else
        into = t.col_margin(worst_col - 1) <= t.col_margin(worst_col + 1) ? worst_col - 1
                                                                          : worst_col + 1;
      for (std::size_t i = 0; i < t.n_rows(); ++i) {
        t.observed[i][into] += t.observed[i][worst_col];
        t.observed[i].erase(t.observed[i].begin() + static_cast<std::ptrdiff_t>(worst_col));
      }
    }
    return t;
  }
};

struct Chi2Result {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  double critical = 0.0;  // 0 when taken from the p-value route
  bool significant = false;
  double alpha = 0.05;
};

/// Pearson statistic sum (O - E)^2 / E with significance at `alpha`. The
/// built-in critical table serves alpha = 0.05 up to df 30; other settings
/// go through the incomplete-gamma p-value. A table with an all-zero row or
/// column, or fewer than 2x2 cells, is DegenerateTable.
inline Chi2Result chi2_statistic(const ContingencyTable& table, double alpha = 0.05) {
  if (table.n_rows() < 2 || table.n_cols() < 2)
    throw Error(ErrorCode::DegenerateTable, "table smaller than 2x2");
  for (std::size_t i = 0; i < table.n_rows(); ++i)
    if (table.row_margin(i) == 0)
      throw Error(ErrorCode::DegenerateTable, "all-zero row");
  for (std::size_t j = 0; j < table.n_cols(); ++j)
    if (table.col_margin(j) == 0)
      throw Error(ErrorCode::DegenerateTable, "all-zero column");

  Chi2Result r;
  r.alpha = alpha;
  r.df = table.degrees_of_freedom();
  for (std::size_t i = 0; i < table.n_rows(); ++i) {
    for (std::size_t j = 0; j < table.n_cols(); ++j) {
      double e = table.expected(i, j);
      double d = static_cast<double>(table.observed[i][j]) - e;
      r.statistic += d * d / e;
    }
  }
  r.p_value = chi2_p_value(r.statistic, r.df);
  if (alpha == 0.05 && r.df >= 1 && r.df <= 30) {
    r.critical = chi2_critical_05(r.df);
    r.significant = r.statistic > r.critical;
  } else {
    r.significant = r.p_value < alpha;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Interactions and intersectional weights
// ---------------------------------------------------------------------------

/// One tested attribute tuple. Cell keys pack the dichotomized values in
/// tuple order (bit k = value of attrs[k]).
struct Interaction {
  std::vector<std::size_t> attrs;
  Chi2Result chi2;
  bool degenerate = false;
  std::vector<std::optional<double>> cell_probability;  // [cell]; nullopt = empty cell
  std::vector<long long> cell_total;
  std::vector<long long> cell_target;

  std::size_t n_cells() const { return std::size_t{1} << attrs.size(); }

  std::size_t cell_of_row(const DichotomizedAttributes& attrs_view, std::size_t row) const {
    std::size_t cell = 0;
    for (std::size_t k = 0; k < attrs.size(); ++k)
      cell |= static_cast<std::size_t>(attrs_view.values[attrs[k]][row]) << k;
    return cell;
  }
};

/// P(target = target_class | cell): rows matching the cell and carrying the
/// target class over rows matching the cell. EmptyCell when no row matches.
inline double interaction_probability(const DichotomizedAttributes& attrs_view,
                                      const std::vector<int>& target,
                                      const std::vector<std::size_t>& attr_indices,
                                      int target_class,
                                      const std::vector<int>& cell_values) {
  if (attr_indices.size() != cell_values.size())
    throw Error(ErrorCode::LengthMismatch, "cell values do not match attributes");
  long long total = 0, hits = 0;
  for (std::size_t r = 0; r < target.size(); ++r) {
    bool match = true;
    for (std::size_t k = 0; k < attr_indices.size(); ++k) {
      if (attrs_view.values[attr_indices[k]][r] != cell_values[k]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    ++total;
    if (target[r] == target_class) ++hits;
  }
  if (total == 0) throw Error(ErrorCode::EmptyCell, "no rows in cell");
  return static_cast<double>(hits) / static_cast<double>(total);
}

/// Union weight 1 - prod(1 - p_i) over the significant interactions whose
/// cell the row falls in. Zero-probability matches contribute nothing, and a
/// row matching no interaction keeps weight 1, so weights stay in (0, 1].
inline double intersectional_weight(const DichotomizedAttributes& attrs_view,
                                    std::size_t row,
                                    const std::vector<Interaction>& interactions,
                                    std::vector<int>* provenance = nullptr) {
  double survival = 1.0;
  bool matched = false;
  for (std::size_t i = 0; i < interactions.size(); ++i) {
    const Interaction& inter = interactions[i];
    if (!inter.chi2.significant || inter.degenerate) continue;
    std::size_t cell = inter.cell_of_row(attrs_view, row);
    const auto& p = inter.cell_probability[cell];
    if (!p || *p <= 0.0) continue;
    matched = true;
    survival *= 1.0 - *p;
    if (provenance) provenance->push_back(static_cast<int>(i));
  }
  return matched ? 1.0 - survival : 1.0;
}

struct SampleWeights {
  std::vector<double> weights;
  std::vector<std::vector<int>> provenance;  // per row: contributing interaction ids
  std::vector<Interaction> interactions;     // every tested tuple
  double alpha = 0.05;
  int target_class = 0;
  std::size_t n_significant = 0;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> attribute_tuples(std::size_t n) {
  std::vector<std::vector<std::size_t>> tuples;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) tuples.push_back({a, b});
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c) tuples.push_back({a, b, c});
  return tuples;
}

}  // namespace detail

/// Tests every dual and three-way sensitive-attribute tuple for dependence
/// with the target (empty cells collapsed, small expected counts merged
/// along the target margin), converts significant tuples to per-cell
/// target-class probabilities, and folds them into per-row union weights.
inline SampleWeights assign_weights(const DichotomizedAttributes& attrs_view,
                                    const std::vector<int>& target, int n_classes,
                                    int target_class, double alpha = 0.05) {
  const std::size_t n_rows = target.size();
  SampleWeights out;
  out.alpha = alpha;
  out.target_class = target_class;

  auto tuples = detail::attribute_tuples(attrs_view.n_attributes());
  out.interactions.assign(tuples.size(), {});

  parallel_for(tuples.size(), [&](std::size_t t) {
    Interaction inter;
    inter.attrs = tuples[t];
    const std::size_t cells = inter.n_cells();
    inter.cell_total.assign(cells, 0);
    inter.cell_target.assign(cells, 0);
    inter.cell_probability.assign(cells, std::nullopt);

    ContingencyTable table;
    table.observed.assign(cells, std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
    for (std::size_t r = 0; r < n_rows; ++r) {
      std::size_t cell = inter.cell_of_row(attrs_view, r);
      ++table.observed[cell][static_cast<std::size_t>(target[r])];
      ++inter.cell_total[cell];
      if (target[r] == target_class) ++inter.cell_target[cell];
    }

    try {
      inter.chi2 = chi2_statistic(table.collapsed().merged_small_expected(), alpha);
    } catch (const Error&) {
      inter.degenerate = true;
    }
    if (inter.chi2.significant) {
      for (std::size_t cell = 0; cell < cells; ++cell)
        if (inter.cell_total[cell] > 0)
          inter.cell_probability[cell] = static_cast<double>(inter.cell_target[cell]) /
                                         static_cast<double>(inter.cell_total[cell]);
    }
    out.interactions[t] = std::move(inter);
  });

  for (const auto& inter : out.interactions)
    if (inter.chi2.significant && !inter.degenerate) ++out.n_significant;

  out.weights.resize(n_rows);
  out.provenance.resize(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r)
    out.weights[r] = intersectional_weight(attrs_view, r, out.interactions, &out.provenance[r]);
  return out;
}

}  // namespace fairkit
