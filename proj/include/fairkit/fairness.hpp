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
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fairkit/error.hpp"

namespace fairkit {

/// Exact small rational. Metric values are kept as integer ratios and only
/// divided once at the end, so independent counting oracles reproduce them
/// bit for bit.
struct Rational {
  long long num = 0;
  long long den = 1;

  static Rational make(long long n, long long d) {
    Rational r{n, d};
    r.normalize();
    return r;
  }

  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  static int compare(const Rational& a, const Rational& b) {
    __int128 lhs = static_cast<__int128>(a.num) * b.den;
    __int128 rhs = static_cast<__int128>(b.num) * a.den;
    if (lhs < rhs) return -1;
    if (lhs > rhs) return 1;
    return 0;
  }

  static Rational sub(const Rational& a, const Rational& b) {
    return make(a.num * b.den - b.num * a.den, a.den * b.den);
  }

  static Rational div(const Rational& a, const Rational& b) {
    return make(a.num * b.den, a.den * b.num);
  }

  Rational abs() const { return Rational{num < 0 ? -num : num, den}; }
};

/// Per-subgroup prediction/label counts. For subgroup s and class c:
///   TP = correct[s][c], FN = actual[s][c] - TP,
///   FP = pred[s][c] - TP, TN = total[s] - TP - FN - FP.
struct GroupedOutcomes {
  int n_classes = 0;
  std::vector<std::string> subgroup_names;
  std::vector<long long> total;                 // [sg]
  std::vector<std::vector<long long>> pred;     // [sg][class] predicted as c
  std::vector<std::vector<long long>> actual;   // [sg][class] labelled c
  std::vector<std::vector<long long>> correct;  // [sg][class] predicted c and labelled c

  std::size_t n_subgroups() const { return total.size(); }

  long long tp(std::size_t s, int c) const { return correct[s][static_cast<std::size_t>(c)]; }
  long long fn(std::size_t s, int c) const {
    return actual[s][static_cast<std::size_t>(c)] - tp(s, c);
  }
  long long fp(std::size_t s, int c) const {
    return pred[s][static_cast<std::size_t>(c)] - tp(s, c);
  }
  long long tn(std::size_t s, int c) const {
    return total[s] - tp(s, c) - fn(s, c) - fp(s, c);
  }

  static GroupedOutcomes from_rows(const std::vector<int>& y_true,
                                   const std::vector<int>& y_pred,
                                   const std::vector<int>& subgroup,
                                   std::size_t n_subgroups, int n_classes,
                                   std::vector<std::string> names = {}) {
    if (y_true.size() != y_pred.size() || y_true.size() != subgroup.size())
      throw Error(ErrorCode::LengthMismatch, "rows of unequal length");
    GroupedOutcomes g;
    g.n_classes = n_classes;
    g.total.assign(n_subgroups, 0);
    g.pred.assign(n_subgroups, std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
    g.actual.assign(n_subgroups, std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
    g.correct.assign(n_subgroups, std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
    if (names.empty()) {
      for (std::size_t s = 0; s < n_subgroups; ++s)
        names.push_back("sg" + std::to_string(s));
    }
    g.subgroup_names = std::move(names);

    for (std::size_t r = 0; r < y_true.size(); ++r) {
      std::size_t s = static_cast<std::size_t>(subgroup[r]);
      ++g.total[s];
      ++g.pred[s][static_cast<std::size_t>(y_pred[r])];
      ++g.actual[s][static_cast<std::size_t>(y_true[r])];
      if (y_pred[r] == y_true[r]) ++g.correct[s][static_cast<std::size_t>(y_true[r])];
    }
    return g;
  }
};

enum class Verdict { Fair, Unfair };

inline const char* verdict_name(Verdict v) { return v == Verdict::Fair ? "FAIR" : "UNFAIR"; }

struct MetricResult {
  std::string metric;
  std::string scope;  // "binary" | "multiclass" | "worst_case"
  double value = 0.0;
  Rational exact{0, 1};
  bool has_exact = false;
  bool infinite = false;  // zero-denominator sentinel
  double threshold = 0.0;
  Verdict verdict = Verdict::Unfair;
  std::optional<double> max_fair_threshold;
  std::optional<int> class_index;
  std::vector<std::string> notes;
};

// ---------------------------------------------------------------------------
// Threshold machinery
// ---------------------------------------------------------------------------

/// Default sweep grid 0.01, 0.06, ..., 0.96. Points are built as integer
/// hundredths so table-reported two-decimal values compare cleanly.
inline std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int k = 0; k < 20; ++k) grid.push_back(static_cast<double>(1 + 5 * k) / 100.0);
  return grid;
}

/// Difference metrics: FAIR at threshold t means |value| < t.
inline Verdict difference_verdict(double value, double threshold) {
  return std::abs(value) < threshold ? Verdict::Fair : Verdict::Unfair;
}

/// Ratio metrics: FAIR at bound b means value >= b.
inline Verdict ratio_verdict(double value, double threshold) {
  return value >= threshold ? Verdict::Fair : Verdict::Unfair;
}

/// Sweep result for a difference metric: the grid point one below the
/// smallest threshold whose verdict is FAIR. By convention a value below the
/// whole grid reports 0.0; a value at or above the top of the grid reports
/// nothing.
inline std::optional<double> max_fair_threshold(double value,
                                                const std::vector<double>& grid) {
  double v = std::abs(value);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (v < grid[i]) return i == 0 ? 0.0 : grid[i - 1];
  }
  return std::nullopt;
}

/// Sweep result for a ratio metric: the tightest grid bound the value meets.
inline std::optional<double> ratio_bound_met(double value,
                                             const std::vector<double>& grid) {
  std::optional<double> best;
  for (double b : grid)
    if (value >= b) best = b;
  return best;
}

/// Combination arithmetic used by the difference metrics, exposed so
/// reported intermediate values can be fed straight through.
inline double opportunity_diff_combine(double max_tpr, double min_tpr) {
  return std::abs(max_tpr - min_tpr);
}

inline double equalized_odds_combine(double tpr_diff, double fpr_diff) {
  return std::abs(tpr_diff - fpr_diff);
}

inline double spd_combine(double rate_unprivileged, double rate_privileged) {
  return rate_unprivileged - rate_privileged;
}

// ---------------------------------------------------------------------------
// Binary metrics (two designated subgroups)
// ---------------------------------------------------------------------------

namespace detail {

inline MetricResult make_result(std::string metric, std::string scope, Rational exact,
                                double threshold, Verdict verdict,
                                std::optional<double> sweep) {
  MetricResult r;
  r.metric = std::move(metric);
  r.scope = std::move(scope);
  r.exact = exact;
  r.has_exact = true;
  r.value = exact.value();
  r.threshold = threshold;
  r.verdict = verdict;
  r.max_fair_threshold = sweep;
  return r;
}

inline void require_group(const GroupedOutcomes& g, std::size_t s) {
  if (s >= g.n_subgroups() || g.total[s] == 0)
    throw Error(ErrorCode::EmptyGroup, "subgroup " + std::to_string(s) + " is empty");
}

}  // namespace detail

/// DI = P(pred=positive | unprivileged) / P(pred=positive | privileged);
/// FAIR iff >= threshold (four-fifths rule, boundary inclusive). A privileged
/// group with zero positives reports an infinite sentinel, UNFAIR.
inline MetricResult disparate_impact(const GroupedOutcomes& g, std::size_t unprivileged,
                                     std::size_t privileged, int positive_class,
                                     double threshold = 0.8,
                                     const std::vector<double>& grid =
                                         default_threshold_grid()) {
  detail::require_group(g, unprivileged);
  detail::require_group(g, privileged);
  long long u_pos = g.pred[unprivileged][static_cast<std::size_t>(positive_class)];
  long long p_pos = g.pred[privileged][static_cast<std::size_t>(positive_class)];

  MetricResult r;
  r.metric = "disparate_impact";
  r.scope = "binary";
  r.threshold = threshold;
  if (p_pos == 0) {
    r.infinite = true;
    r.value = std::numeric_limits<double>::infinity();
    r.verdict = Verdict::Unfair;
    r.notes.push_back("privileged group has zero positive predictions");
    return r;
  }
  Rational di = Rational::make(u_pos * g.total[privileged], g.total[unprivileged] * p_pos);
  r.exact = di;
  r.has_exact = true;
  r.value = di.value();
  r.verdict = ratio_verdict(r.value, threshold);
  r.max_fair_threshold = ratio_bound_met(r.value, grid);
  return r;
}

/// Per-class min/max ratio of subgroup-conditional correct-prediction rates
/// P(pred=c and truth=c | subgroup); FAIR per class iff >= threshold.
inline std::vector<MetricResult> disparate_impact_multiclass(const GroupedOutcomes& g,
                                                             double threshold = 0.8,
                                                             const std::vector<double>& grid =
                                                                 default_threshold_grid()) {
  if (g.n_subgroups() < 2)
    throw Error(ErrorCode::EmptyGroup, "need at least 2 subgroups");
  std::vector<MetricResult> out;
  for (int c = 0; c < g.n_classes; ++c) {
    MetricResult r;
    r.metric = "disparate_impact";
    r.scope = "multiclass";
    r.class_index = c;
    r.threshold = threshold;

    std::optional<Rational> lo, hi;
    for (std::size_t s = 0; s < g.n_subgroups(); ++s) {
      if (g.total[s] == 0) continue;
      Rational rate = Rational::make(g.correct[s][static_cast<std::size_t>(c)], g.total[s]);
      if (!lo || Rational::compare(rate, *lo) < 0) lo = rate;
      if (!hi || Rational::compare(rate, *hi) > 0) hi = rate;
    }
    if (!hi || hi->num == 0) {
      r.infinite = true;
      r.value = std::numeric_limits<double>::infinity();
      r.verdict = Verdict::Unfair;
      r.notes.push_back("all subgroup rates are zero for this class");
      out.push_back(std::move(r));
      continue;
    }
    Rational di = Rational::div(*lo, *hi);
    r.exact = di;
    r.has_exact = true;
    r.value = di.value();
    r.verdict = ratio_verdict(r.value, threshold);
    r.max_fair_threshold = ratio_bound_met(r.value, grid);
    out.push_back(std::move(r));
  }
  return out;
}

/// SPD = P(pred=positive | unprivileged) - P(pred=positive | privileged),
/// signed; the verdict and sweep use |SPD|.
inline MetricResult statistical_parity_difference(const GroupedOutcomes& g,
                                                  std::size_t unprivileged,
                                                  std::size_t privileged,
                                                  int positive_class,
                                                  double threshold = 0.2,
                                                  const std::vector<double>& grid =
                                                      default_threshold_grid()) {
  detail::require_group(g, unprivileged);
  detail::require_group(g, privileged);
  Rational rate_u = Rational::make(
      g.pred[unprivileged][static_cast<std::size_t>(positive_class)], g.total[unprivileged]);
  Rational rate_p = Rational::make(
      g.pred[privileged][static_cast<std::size_t>(positive_class)], g.total[privileged]);
  Rational spd = Rational::sub(rate_u, rate_p);
  return detail::make_result("statistical_parity_difference", "binary", spd, threshold,
                             difference_verdict(spd.value(), threshold),
                             max_fair_threshold(spd.value(), grid));
}

struct SpdMulticlassResult {
  std::vector<MetricResult> per_class;
  bool satisfied = false;  // some class has |SPD| = 0.00 at two decimals
};

/// Per-class |SPD| between the two subgroups; the attribute-level flag is
/// satisfied when at least one class rounds to 0.00.
inline SpdMulticlassResult spd_multiclass(const GroupedOutcomes& g, std::size_t unprivileged,
                                          std::size_t privileged, double threshold = 0.2,
                                          const std::vector<double>& grid =
                                              default_threshold_grid()) {
  if (g.n_classes < 2)
    throw Error(ErrorCode::DegenerateTarget, "multiclass SPD needs >= 2 classes");
  detail::require_group(g, unprivileged);
  detail::require_group(g, privileged);

  SpdMulticlassResult out;
  for (int c = 0; c < g.n_classes; ++c) {
    Rational rate_u =
        Rational::make(g.pred[unprivileged][static_cast<std::size_t>(c)], g.total[unprivileged]);
    Rational rate_p =
        Rational::make(g.pred[privileged][static_cast<std::size_t>(c)], g.total[privileged]);
    Rational spd = Rational::sub(rate_u, rate_p).abs();
    MetricResult r = detail::make_result("statistical_parity_difference", "multiclass", spd,
                                         threshold, difference_verdict(spd.value(), threshold),
                                         max_fair_threshold(spd.value(), grid));
    r.class_index = c;
    if (std::llround(std::abs(r.value) * 100.0) == 0) out.satisfied = true;
    out.per_class.push_back(std::move(r));
  }
  return out;
}

namespace detail {

inline std::optional<Rational> tpr(const GroupedOutcomes& g, std::size_t s, int c) {
  long long positives = g.actual[s][static_cast<std::size_t>(c)];
  if (positives == 0) return std::nullopt;
  return Rational::make(g.tp(s, c), positives);
}

inline std::optional<Rational> fpr(const GroupedOutcomes& g, std::size_t s, int c) {
  long long negatives = g.total[s] - g.actual[s][static_cast<std::size_t>(c)];
  if (negatives == 0) return std::nullopt;
  return Rational::make(g.fp(s, c), negatives);
}

struct Extrema {
  std::optional<Rational> lo, hi;
  void feed(const Rational& r) {
    if (!lo || Rational::compare(r, *lo) < 0) lo = r;
    if (!hi || Rational::compare(r, *hi) > 0) hi = r;
  }
  Rational spread() const { return Rational::sub(*hi, *lo).abs(); }
};

}  // namespace detail

/// EqOpp_diff = max TPR - min TPR over all subgroups with actual positives;
/// subgroups without positives are skipped with a note.
inline MetricResult equal_opportunity_diff(const GroupedOutcomes& g, int positive_class,
                                           double threshold = 0.2,
                                           const std::vector<double>& grid =
                                               default_threshold_grid()) {
  detail::Extrema ext;
  std::vector<std::string> notes;
  for (std::size_t s = 0; s < g.n_subgroups(); ++s) {
    if (g.total[s] == 0) continue;
    auto rate = detail::tpr(g, s, positive_class);
    if (!rate) {
      notes.push_back("subgroup " + g.subgroup_names[s] + " skipped: no actual positives");
      continue;
    }
    ext.feed(*rate);
  }
  if (!ext.lo) throw Error(ErrorCode::NoPositives, "no subgroup has actual positives");
  Rational diff = ext.spread();
  MetricResult r = detail::make_result("equal_opportunity", "binary", diff, threshold,
                                       difference_verdict(diff.value(), threshold),
                                       max_fair_threshold(diff.value(), grid));
  r.notes = std::move(notes);
  return r;
}

/// |max - min| of TPR over every (subgroup, class) cell with positives.
inline MetricResult equal_opportunity_multiclass(const GroupedOutcomes& g,
                                                 double threshold = 0.2,
                                                 const std::vector<double>& grid =
                                                     default_threshold_grid()) {
  detail::Extrema ext;
  std::vector<std::string> notes;
  for (std::size_t s = 0; s < g.n_subgroups(); ++s) {
    if (g.total[s] == 0) continue;
    for (int c = 0; c < g.n_classes; ++c) {
      auto rate = detail::tpr(g, s, c);
      if (!rate) {
        notes.push_back("cell (" + g.subgroup_names[s] + ", class " + std::to_string(c) +
                        ") skipped: no actual positives");
        continue;
      }
      ext.feed(*rate);
    }
  }
  if (!ext.lo) throw Error(ErrorCode::NoPositives, "no cell has actual positives");
  Rational diff = ext.spread();
  MetricResult r = detail::make_result("equal_opportunity", "multiclass", diff, threshold,
                                       difference_verdict(diff.value(), threshold),
                                       max_fair_threshold(diff.value(), grid));
  r.notes = std::move(notes);
  return r;
}

/// EqOdds_diff = | |TPR_u - TPR_p| - |FPR_u - FPR_p| | between the two
/// designated subgroups.
inline MetricResult equalized_odds_diff(const GroupedOutcomes& g, std::size_t unprivileged,
                                        std::size_t privileged, int positive_class,
                                        double threshold = 0.2,
                                        const std::vector<double>& grid =
                                            default_threshold_grid()) {
  detail::require_group(g, unprivileged);
  detail::require_group(g, privileged);
  auto tpr_u = detail::tpr(g, unprivileged, positive_class);
  auto tpr_p = detail::tpr(g, privileged, positive_class);
  if (!tpr_u || !tpr_p)
    throw Error(ErrorCode::NoPositives, "a group has no actual positives");
  auto fpr_u = detail::fpr(g, unprivileged, positive_class);
  auto fpr_p = detail::fpr(g, privileged, positive_class);
  if (!fpr_u || !fpr_p)
    throw Error(ErrorCode::NoNegatives, "a group has no actual negatives");

  Rational tpr_diff = Rational::sub(*tpr_u, *tpr_p).abs();
  Rational fpr_diff = Rational::sub(*fpr_u, *fpr_p).abs();
  Rational combined = Rational::sub(tpr_diff, fpr_diff).abs();
  return detail::make_result("equalized_odds", "binary", combined, threshold,
                             difference_verdict(combined.value(), threshold),
                             max_fair_threshold(combined.value(), grid));
}

/// Multiclass form over all (subgroup, class) cells:
/// | |max TPR - min TPR| - |max FPR - min FPR| |.
inline MetricResult equalized_odds_multiclass(const GroupedOutcomes& g,
                                              double threshold = 0.2,
                                              const std::vector<double>& grid =
                                                  default_threshold_grid()) {
  detail::Extrema tpr_ext, fpr_ext;
  std::vector<std::string> notes;
  for (std::size_t s = 0; s < g.n_subgroups(); ++s) {
    if (g.total[s] == 0) continue;
    for (int c = 0; c < g.n_classes; ++c) {
      auto t = detail::tpr(g, s, c);
      if (t) tpr_ext.feed(*t);
      else
        notes.push_back("TPR cell (" + g.subgroup_names[s] + ", class " + std::to_string(c) +
                        ") skipped");
      auto f = detail::fpr(g, s, c);
      if (f) fpr_ext.feed(*f);
      else
        notes.push_back("FPR cell (" + g.subgroup_names[s] + ", class " + std::to_string(c) +
                        ") skipped");
    }
  }
  if (!tpr_ext.lo) throw Error(ErrorCode::NoPositives, "no TPR cell has positives");
  if (!fpr_ext.lo) throw Error(ErrorCode::NoNegatives, "no FPR cell has negatives");
  Rational combined = Rational::sub(tpr_ext.spread(), fpr_ext.spread()).abs();
  MetricResult r = detail::make_result("equalized_odds", "multiclass", combined, threshold,
                                       difference_verdict(combined.value(), threshold),
                                       max_fair_threshold(combined.value(), grid));
  r.notes = std::move(notes);
  return r;
}

// ---------------------------------------------------------------------------
// Worst-case ratio metrics (any number of subgroups)
// ---------------------------------------------------------------------------

/// Ratio of the smallest to the largest subgroup pass rate for the positive
/// class. ZeroMaxRate when every rate is zero.
inline MetricResult demographic_parity_ratio(const GroupedOutcomes& g, int positive_class,
                                             double threshold = 0.8,
                                             const std::vector<double>& grid =
                                                 default_threshold_grid()) {
  detail::Extrema ext;
  for (std::size_t s = 0; s < g.n_subgroups(); ++s) {
    if (g.total[s] == 0) continue;
    ext.feed(Rational::make(g.pred[s][static_cast<std::size_t>(positive_class)], g.total[s]));
  }
  if (!ext.lo) throw Error(ErrorCode::EmptyGroup, "no populated subgroup");
  if (ext.hi->num == 0) throw Error(ErrorCode::ZeroMaxRate, "all pass rates are zero");
  Rational dpr = Rational::div(*ext.lo, *ext.hi);
  MetricResult r = detail::make_result("demographic_parity_ratio", "worst_case", dpr,
                                       threshold, ratio_verdict(dpr.value(), threshold),
                                       std::nullopt);
  r.max_fair_threshold = ratio_bound_met(dpr.value(), grid);
  return r;
}

struct MulticlassRatioResult {
  MetricResult overall;
  std::vector<MetricResult> per_class;  // skipped classes carry a note
};

namespace detail {

inline MulticlassRatioResult per_class_min_ratio(
    const GroupedOutcomes& g, const char* metric_name,
    const std::vector<std::vector<long long>>& numerators, double threshold,
    const std::vector<double>& grid) {
  MulticlassRatioResult out;
  std::optional<Rational> worst;
  std::optional<int> worst_class;
  for (int c = 0; c < g.n_classes; ++c) {
    detail::Extrema ext;
    for (std::size_t s = 0; s < g.n_subgroups(); ++s) {
      if (g.total[s] == 0) continue;
      ext.feed(Rational::make(numerators[s][static_cast<std::size_t>(c)], g.total[s]));
    }
    MetricResult r;
    r.metric = metric_name;
    r.scope = "worst_case";
    r.class_index = c;
    r.threshold = threshold;
    if (!ext.lo || ext.hi->num == 0) {
      r.notes.push_back("class skipped: max rate is zero");
      r.verdict = Verdict::Unfair;
      out.per_class.push_back(std::move(r));
      continue;
    }
    Rational ratio = Rational::div(*ext.lo, *ext.hi);
    r.exact = ratio;
    r.has_exact = true;
    r.value = ratio.value();
    r.verdict = ratio_verdict(r.value, threshold);
    r.max_fair_threshold = ratio_bound_met(r.value, grid);
    out.per_class.push_back(std::move(r));
    if (!worst || Rational::compare(ratio, *worst) < 0) {
      worst = ratio;
      worst_class = c;
    }
  }
  if (!worst) throw Error(ErrorCode::ZeroMaxRate, "every class has zero max rate");
  out.overall = detail::make_result(metric_name, "worst_case", *worst, threshold,
                                    ratio_verdict(worst->value(), threshold), std::nullopt);
  out.overall.max_fair_threshold = ratio_bound_met(worst->value(), grid);
  out.overall.notes.push_back("minimum over classes attained at class " +
                              std::to_string(*worst_class));
  return out;
}

}  // namespace detail

/// Per-class DPR on prediction rates, then the minimum over classes.
inline MulticlassRatioResult demographic_parity_ratio_multiclass(
    const GroupedOutcomes& g, double threshold = 0.8,
    const std::vector<double>& grid = default_threshold_grid()) {
  return detail::per_class_min_ratio(g, "demographic_parity_ratio", g.pred, threshold, grid);
}

struct WorstCaseDiResult {
  MetricResult overall;
  std::map<int, MetricResult> by_order;  // interaction order -> aggregate
};

/// Pairwise four-fifths check: for every unordered pair of subgroups within
/// one interaction-order group, the smaller directional pass-rate ratio;
/// aggregates are minima per order group and overall. Pairs touching a
/// zero-rate subgroup are skipped with a note.
inline WorstCaseDiResult worst_case_disparate_impact(const GroupedOutcomes& g,
                                                     const std::vector<int>& subgroup_order,
                                                     int positive_class,
                                                     double threshold = 0.8) {
  if (subgroup_order.size() != g.n_subgroups())
    throw Error(ErrorCode::LengthMismatch, "order tags do not match subgroups");

  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t s = 0; s < g.n_subgroups(); ++s)
    if (g.total[s] > 0) groups[subgroup_order[s]].push_back(s);

  WorstCaseDiResult out;
  std::optional<Rational> overall;
  std::vector<std::string> overall_notes;
  for (const auto& [order, members] : groups) {
    if (members.size() < 2) {
      overall_notes.push_back("order " + std::to_string(order) +
                              " skipped: fewer than 2 subgroups");
      continue;
    }
    std::optional<Rational> worst;
    std::vector<std::string> notes;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        std::size_t sa = members[a], sb = members[b];
        Rational ra = Rational::make(g.pred[sa][static_cast<std::size_t>(positive_class)],
                                     g.total[sa]);
        Rational rb = Rational::make(g.pred[sb][static_cast<std::size_t>(positive_class)],
                                     g.total[sb]);
        if (ra.num == 0 || rb.num == 0) {
          notes.push_back("pair (" + g.subgroup_names[sa] + ", " + g.subgroup_names[sb] +
                          ") skipped: zero pass rate");
          continue;
        }
        Rational forward = Rational::div(ra, rb);
        Rational backward = Rational::div(rb, ra);
        Rational lesser = Rational::compare(forward, backward) <= 0 ? forward : backward;
        if (!worst || Rational::compare(lesser, *worst) < 0) worst = lesser;
      }
    }
    if (!worst) {
      overall_notes.push_back("order " + std::to_string(order) + ": all pairs skipped");
      continue;
    }
    MetricResult r = detail::make_result("worst_case_disparate_impact", "worst_case", *worst,
                                         threshold, ratio_verdict(worst->value(), threshold),
                                         std::nullopt);
    r.notes = notes;
    out.by_order[order] = std::move(r);
    if (!overall || Rational::compare(*worst, *overall) < 0) overall = *worst;
  }
  if (!overall) throw Error(ErrorCode::ZeroMaxRate, "no scorable subgroup pair");
  out.overall = detail::make_result("worst_case_disparate_impact", "worst_case", *overall,
                                    threshold, ratio_verdict(overall->value(), threshold),
                                    std::nullopt);
  out.overall.notes = std::move(overall_notes);
  return out;
}

/// DPR restricted to rows with L=1. Subgroups with no conditioned rows are
/// skipped with a note; fewer than two conditioned subgroups is an error.
inline MetricResult conditional_statistical_parity_ratio(
    const std::vector<int>& y_true, const std::vector<int>& y_pred,
    const std::vector<int>& subgroup, const std::vector<std::uint8_t>& l_mask,
    std::size_t n_subgroups, int n_classes, int positive_class, bool multiclass,
    double threshold = 0.8, const std::vector<double>& grid = default_threshold_grid(),
    std::vector<std::string> subgroup_names = {}) {
  if (l_mask.size() != y_true.size())
    throw Error(ErrorCode::LengthMismatch, "condition mask does not match rows");

  std::vector<int> ct, cp, cs;
  for (std::size_t r = 0; r < y_true.size(); ++r) {
    if (!l_mask[r]) continue;
    ct.push_back(y_true[r]);
    cp.push_back(y_pred[r]);
    cs.push_back(subgroup[r]);
  }
  if (ct.empty()) throw Error(ErrorCode::NoConditionedRows, "condition selects no rows");

  GroupedOutcomes g = GroupedOutcomes::from_rows(ct, cp, cs, n_subgroups, n_classes,
                                                 std::move(subgroup_names));
  std::vector<std::string> notes;
  std::size_t populated = 0;
  for (std::size_t s = 0; s < g.n_subgroups(); ++s) {
    if (g.total[s] == 0)
      notes.push_back("subgroup " + g.subgroup_names[s] + " skipped: no conditioned rows");
    else
      ++populated;
  }
  if (populated < 2)
    throw Error(ErrorCode::NoConditionedRows, "fewer than 2 conditioned subgroups");

  MetricResult r;
  if (multiclass) {
    r = demographic_parity_ratio_multiclass(g, threshold, grid).overall;
  } else {
    r = demographic_parity_ratio(g, positive_class, threshold, grid);
  }
  r.metric = "conditional_statistical_parity_ratio";
  for (auto& note : notes) r.notes.push_back(std::move(note));
  return r;
}

/// min TPR / max TPR; binary over subgroups, multiclass over all
/// (subgroup, class) cells. Cells without positives are skipped with a note.
inline MetricResult equal_opportunity_ratio(const GroupedOutcomes& g, int positive_class,
                                            bool multiclass, double threshold = 0.8,
                                            const std::vector<double>& grid =
                                                default_threshold_grid()) {
  detail::Extrema ext;
  std::vector<std::string> notes;
  for (std::size_t s = 0; s < g.n_subgroups(); ++s) {
    if (g.total[s] == 0) continue;
    if (multiclass) {
      for (int c = 0; c < g.n_classes; ++c) {
        auto rate = detail::tpr(g, s, c);
        if (rate) ext.feed(*rate);
        else
          notes.push_back("cell (" + g.subgroup_names[s] + ", class " + std::to_string(c) +
                          ") skipped: no positives");
      }
    } else {
      auto rate = detail::tpr(g, s, positive_class);
      if (rate) ext.feed(*rate);
      else
        notes.push_back("subgroup " + g.subgroup_names[s] + " skipped: no positives");
    }
  }
  if (!ext.lo) throw Error(ErrorCode::NoPositives, "no scorable TPR");
  if (ext.hi->num == 0) throw Error(ErrorCode::ZeroMaxRate, "all TPRs are zero");
  Rational ratio = Rational::div(*ext.lo, *ext.hi);
  MetricResult r = detail::make_result("equal_opportunity_ratio",
                                       multiclass ? "worst_case" : "binary", ratio, threshold,
                                       ratio_verdict(ratio.value(), threshold), std::nullopt);
  r.max_fair_threshold = ratio_bound_met(ratio.value(), grid);
  r.notes = std::move(notes);
  return r;
}

/// Per output class, the min/max ratio over subgroups of P(pred = class);
/// the overall value is the minimum over classes.
inline MulticlassRatioResult equalized_odds_ratio_multiclass(
    const GroupedOutcomes& g, double threshold = 0.8,
    const std::vector<double>& grid = default_threshold_grid()) {
  if (g.n_subgroups() < 2)
    throw Error(ErrorCode::EmptyGroup, "need at least 2 subgroups");
  if (g.n_classes < 2)
    throw Error(ErrorCode::DegenerateTarget, "need at least 2 classes");
  MulticlassRatioResult out =
      detail::per_class_min_ratio(g, "equalized_odds_ratio", g.pred, threshold, grid);
  return out;
}

}  // namespace fairkit
