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

#include <chrono>
#include <string>
#include <vector>

#include "fairkit/config.hpp"
#include "fairkit/report.hpp"
#include "fairkit/reweight.hpp"
#include "fairkit/smoten.hpp"

namespace fairkit {

/// Stage-tagged failure carrying the partial report for emission.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, ErrorCode code, const std::string& message,
                Json partial_report, Json timings)
      : Error(code, "stage " + stage + ": " + message),
        stage_(std::move(stage)),
        report_(std::move(partial_report)),
        timings_(std::move(timings)) {}

  const std::string& stage() const { return stage_; }
  const Json& report() const { return report_; }
  const Json& timings() const { return timings_; }

 private:
  std::string stage_;
  Json report_;
  Json timings_;
};

struct RunOutcome {
  Json report;
  Json timings;
  bool nonconvergence = false;
};

namespace detail {

struct PreparedData {
  CategoricalDataset ds;
  DichotomizedAttributes attrs;
  std::vector<std::uint8_t> l_mask;  // empty when no legitimate attribute
  int n_classes = 0;
  int favorable = 0;
  std::vector<std::string> notes;
};

inline PreparedData prepare_dataset(const RunConfig& cfg) {
  PreparedData pd;
  CategoricalDataset raw = load_csv(cfg.input, cfg.schema);

  // Config-driven row filters come first, mirroring the slice the study ran on.
  if (!cfg.filters.empty()) {
    std::vector<std::size_t> keep_rows;
    for (std::size_t r = 0; r < raw.n_rows(); ++r) {
      bool keep = true;
      for (const auto& filter : cfg.filters) {
        auto f = raw.feature_index(filter.column);
        if (!f) throw Error(ErrorCode::MissingColumn, filter.column);
        int code = raw.columns[*f][r];
        std::string label =
            code == CategoricalDataset::kMissing ? "" : raw.categories[*f][static_cast<std::size_t>(code)];
        if (std::find(filter.keep.begin(), filter.keep.end(), label) == filter.keep.end()) {
          keep = false;
          break;
        }
      }
      if (keep) keep_rows.push_back(r);
    }
    raw = raw.select_rows(keep_rows);
  }

  CategoricalDataset with_target = derive_target(raw, cfg.target_rule);
  CategoricalDataset cleaned = drop_uninformative(with_target, cfg.id_columns);
  pd.ds = impute_missing(cleaned);
  pd.attrs = dichotomize(pd.ds, cfg.sensitive);
  pd.n_classes = static_cast<int>(pd.ds.target_labels.size());

  std::string favorable_label = cfg.favorable_class;
  if (favorable_label.empty())
    favorable_label =
        cfg.target_rule == TargetRule::Completed ? "COMPLETE" : pd.ds.target_labels.front();
  auto it = std::find(pd.ds.target_labels.begin(), pd.ds.target_labels.end(), favorable_label);
  if (it == pd.ds.target_labels.end())
    throw Error(ErrorCode::ConfigError, "favorable class not a target label: " + favorable_label);
  pd.favorable = static_cast<int>(it - pd.ds.target_labels.begin());

  if (cfg.sensitive.legitimate) {
    auto f = pd.ds.feature_index(cfg.sensitive.legitimate->column);
    if (!f) {
      pd.notes.push_back("legitimate attribute " + cfg.sensitive.legitimate->column +
                         " missing after cleanup; conditional metrics skipped");
    } else {
      pd.l_mask.resize(pd.ds.n_rows(), 0);
      for (std::size_t r = 0; r < pd.ds.n_rows(); ++r) {
        int code = pd.ds.columns[*f][r];
        pd.l_mask[r] =
            pd.ds.categories[*f][static_cast<std::size_t>(code)] == cfg.sensitive.legitimate->value
                ? 1
                : 0;
      }
    }
  }
  return pd;
}

inline DichotomizedAttributes select_attr_rows(const DichotomizedAttributes& attrs,
                                               const std::vector<std::size_t>& rows) {
  DichotomizedAttributes out;
  out.names = attrs.names;
  out.privileged = attrs.privileged;
  out.bucket_names = attrs.bucket_names;
  out.values.resize(attrs.values.size());
  for (std::size_t a = 0; a < attrs.values.size(); ++a) {
    out.values[a].reserve(rows.size());
    for (std::size_t r : rows) out.values[a].push_back(attrs.values[a][r]);
  }
  return out;
}

/// Grouped counts where one row may belong to several subgroups (the
/// intersectional case).
inline GroupedOutcomes grouped_from_memberships(
    const std::vector<int>& y_true, const std::vector<int>& y_pred,
    const std::vector<std::vector<std::size_t>>& members, int n_classes,
    std::vector<std::string> names) {
  GroupedOutcomes g;
  g.n_classes = n_classes;
  g.subgroup_names = std::move(names);
  std::size_t n = members.size();
  g.total.assign(n, 0);
  g.pred.assign(n, std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
  g.actual.assign(n, std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
  g.correct.assign(n, std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t r : members[s]) {
      ++g.total[s];
      ++g.pred[s][static_cast<std::size_t>(y_pred[r])];
      ++g.actual[s][static_cast<std::size_t>(y_true[r])];
      if (y_pred[r] == y_true[r]) ++g.correct[s][static_cast<std::size_t>(y_true[r])];
    }
  }
  return g;
}

struct IntersectionalSubgroups {
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::string> names;
  std::vector<int> orders;
  bool fallback = false;  // single attributes used because nothing was significant
};

inline IntersectionalSubgroups intersectional_subgroups(
    const DichotomizedAttributes& attrs, const std::vector<Interaction>& interactions) {
  IntersectionalSubgroups out;
  const std::size_t n_rows = attrs.n_rows();
  for (const auto& inter : interactions) {
    if (!inter.chi2.significant || inter.degenerate) continue;
    for (std::size_t cell = 0; cell < inter.n_cells(); ++cell) {
      std::vector<std::size_t> rows;
      for (std::size_t r = 0; r < n_rows; ++r)
        if (inter.cell_of_row(attrs, r) == cell) rows.push_back(r);
      if (rows.empty()) continue;
      std::string name;
      for (std::size_t k = 0; k < inter.attrs.size(); ++k) {
        if (k) name += "&";
        name += attrs.names[inter.attrs[k]] + "=" +
                std::to_string((cell >> k) & 1);
      }
      out.members.push_back(std::move(rows));
      out.names.push_back(std::move(name));
      out.orders.push_back(static_cast<int>(inter.attrs.size()));
    }
  }
  if (out.members.empty()) {
    out.fallback = true;
    for (std::size_t a = 0; a < attrs.n_attributes(); ++a) {
      for (int v = 0; v < 2; ++v) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < n_rows; ++r)
          if (attrs.values[a][r] == v) rows.push_back(r);
        if (rows.empty()) continue;
        out.members.push_back(std::move(rows));
        out.names.push_back(attrs.names[a] + "=" + std::to_string(v));
        out.orders.push_back(1);
      }
    }
  }
  return out;
}

inline Json try_metric(const std::function<MetricResult()>& fn) {
  try {
    return metric_to_json(fn());
  } catch (const Error& e) {
    Json j;
    j["error"] = e.what();
    return j;
  }
}

}  // namespace detail

/// Full fairness audit of one prediction set: per-attribute binary or
/// multiclass metrics plus worst-case ratio metrics over the intersectional
/// subgroups induced by the significant interactions.
inline Json fairness_audit(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                           const DichotomizedAttributes& attrs,
                           const std::vector<std::uint8_t>& l_mask,
                           const std::vector<Interaction>& interactions, int n_classes,
                           int favorable, double diff_threshold, double ratio_threshold,
                           const std::vector<double>& grid) {
  Json out;
  Json attributes = Json::object();
  const bool multiclass = n_classes > 2;

  for (std::size_t a = 0; a < attrs.n_attributes(); ++a) {
    Json aj = Json::object();
    std::vector<int> sg(y_true.size());
    for (std::size_t r = 0; r < y_true.size(); ++r) sg[r] = attrs.values[a][r];
    std::vector<std::string> names = {attrs.names[a] + "=" + attrs.bucket_names[a][0],
                                      attrs.names[a] + "=" + attrs.bucket_names[a][1]};
    GroupedOutcomes g = GroupedOutcomes::from_rows(y_true, y_pred, sg, 2, n_classes, names);
    std::size_t priv = static_cast<std::size_t>(attrs.privileged[a]);
    std::size_t unpriv = 1 - priv;

    if (!multiclass) {
      aj["disparate_impact"] =
          detail::try_metric([&] { return disparate_impact(g, unpriv, priv, favorable,
                                                           ratio_threshold); });
      aj["statistical_parity_difference"] = detail::try_metric([&] {
        return statistical_parity_difference(g, unpriv, priv, favorable, diff_threshold, grid);
      });
      aj["equal_opportunity"] = detail::try_metric(
          [&] { return equal_opportunity_diff(g, favorable, diff_threshold, grid); });
      aj["equalized_odds"] = detail::try_metric([&] {
        return equalized_odds_diff(g, unpriv, priv, favorable, diff_threshold, grid);
      });
      aj["demographic_parity_ratio"] = detail::try_metric(
          [&] { return demographic_parity_ratio(g, favorable, ratio_threshold, grid); });
      aj["equal_opportunity_ratio"] = detail::try_metric([&] {
        return equal_opportunity_ratio(g, favorable, false, ratio_threshold, grid);
      });
    } else {
      try {
        Json arr = Json::array();
        for (const auto& r : disparate_impact_multiclass(g, ratio_threshold))
          arr.push_back(metric_to_json(r));
        aj["disparate_impact"] = std::move(arr);
      } catch (const Error& e) {
        aj["disparate_impact"] = Json{{"error", e.what()}};
      }
      try {
        SpdMulticlassResult spd = spd_multiclass(g, unpriv, priv, diff_threshold, grid);
        Json arr = Json::array();
        for (const auto& r : spd.per_class) arr.push_back(metric_to_json(r));
        aj["statistical_parity_difference"] =
            Json{{"per_class", std::move(arr)},
                 {"satisfied", spd.satisfied},
                 {"satisfied_text", spd.satisfied ? "Satisfied for At Least One Class"
                                                  : "Not Satisfied for All Classes"}};
      } catch (const Error& e) {
        aj["statistical_parity_difference"] = Json{{"error", e.what()}};
      }
      aj["equal_opportunity"] = detail::try_metric(
          [&] { return equal_opportunity_multiclass(g, diff_threshold, grid); });
      aj["equalized_odds"] = detail::try_metric(
          [&] { return equalized_odds_multiclass(g, diff_threshold, grid); });
      try {
        auto dpr = demographic_parity_ratio_multiclass(g, ratio_threshold, grid);
        Json arr = Json::array();
        for (const auto& r : dpr.per_class) arr.push_back(metric_to_json(r));
        aj["demographic_parity_ratio"] =
            Json{{"overall", metric_to_json(dpr.overall)}, {"per_class", std::move(arr)}};
      } catch (const Error& e) {
        aj["demographic_parity_ratio"] = Json{{"error", e.what()}};
      }
      aj["equal_opportunity_ratio"] = detail::try_metric([&] {
        return equal_opportunity_ratio(g, favorable, true, ratio_threshold, grid);
      });
    }
    aj["equalized_odds_ratio"] = detail::try_metric([&] {
      return equalized_odds_ratio_multiclass(g, ratio_threshold, grid).overall;
    });
    if (!l_mask.empty()) {
      aj["conditional_statistical_parity_ratio"] = detail::try_metric([&] {
        return conditional_statistical_parity_ratio(y_true, y_pred, sg, l_mask, 2, n_classes,
                                                    favorable, multiclass, ratio_threshold,
                                                    grid, names);
      });
    }
    attributes[attrs.names[a]] = std::move(aj);
  }
  out["attributes"] = std::move(attributes);

  // Worst-case section over intersectional subgroups.
  detail::IntersectionalSubgroups subs = detail::intersectional_subgroups(attrs, interactions);
  Json wj = Json::object();
  wj["subgroups"] = subs.names;
  wj["orders"] = subs.orders;
  if (subs.fallback)
    wj["note"] = "no significant interactions; single-attribute subgroups used";
  GroupedOutcomes g =
      detail::grouped_from_memberships(y_true, y_pred, subs.members, n_classes, subs.names);

  try {
    WorstCaseDiResult wc = worst_case_disparate_impact(g, subs.orders, favorable,
                                                       ratio_threshold);
    Json by_order = Json::object();
    for (const auto& [order, r] : wc.by_order)
      by_order[std::to_string(order)] = metric_to_json(r);
    wj["worst_case_disparate_impact"] =
        Json{{"overall", metric_to_json(wc.overall)}, {"by_order", std::move(by_order)}};
  } catch (const Error& e) {
    wj["worst_case_disparate_impact"] = Json{{"error", e.what()}};
  }
  if (!multiclass) {
    wj["demographic_parity_ratio"] = detail::try_metric(
        [&] { return demographic_parity_ratio(g, favorable, ratio_threshold, grid); });
  } else {
    try {
      auto dpr = demographic_parity_ratio_multiclass(g, ratio_threshold, grid);
      Json arr = Json::array();
      for (const auto& r : dpr.per_class) arr.push_back(metric_to_json(r));
      wj["demographic_parity_ratio"] =
          Json{{"overall", metric_to_json(dpr.overall)}, {"per_class", std::move(arr)}};
    } catch (const Error& e) {
      wj["demographic_parity_ratio"] = Json{{"error", e.what()}};
    }
  }
  wj["equal_opportunity_ratio"] = detail::try_metric([&] {
    return equal_opportunity_ratio(g, favorable, multiclass, ratio_threshold, grid);
  });
  wj["equalized_odds_ratio"] = detail::try_metric([&] {
    return equalized_odds_ratio_multiclass(g, ratio_threshold, grid).overall;
  });
  if (!l_mask.empty()) {
    try {
      std::vector<std::vector<std::size_t>> conditioned(subs.members.size());
      for (std::size_t s = 0; s < subs.members.size(); ++s)
        for (std::size_t r : subs.members[s])
          if (l_mask[r]) conditioned[s].push_back(r);
      GroupedOutcomes cg = detail::grouped_from_memberships(y_true, y_pred, conditioned,
                                                            n_classes, subs.names);
      std::size_t populated = 0;
      for (std::size_t s = 0; s < cg.n_subgroups(); ++s)
        if (cg.total[s] > 0) ++populated;
      if (populated < 2)
        throw Error(ErrorCode::NoConditionedRows, "fewer than 2 conditioned subgroups");
      MetricResult r = multiclass
                           ? demographic_parity_ratio_multiclass(cg, ratio_threshold, grid).overall
                           : demographic_parity_ratio(cg, favorable, ratio_threshold, grid);
      r.metric = "conditional_statistical_parity_ratio";
      wj["conditional_statistical_parity_ratio"] = metric_to_json(r);
    } catch (const Error& e) {
      wj["conditional_statistical_parity_ratio"] = Json{{"error", e.what()}};
    }
  }
  out["intersectional"] = std::move(wj);
  return out;
}

namespace detail {

inline Json interactions_to_json(const SampleWeights& sw,
                                 const DichotomizedAttributes& attrs) {
  Json out;
  out["alpha"] = sw.alpha;
  out["tested"] = sw.interactions.size();
  out["significant"] = sw.n_significant;
  out["weight_rule"] = "1 - prod(1 - p_i): probability that at least one "
                       "matching interaction applies";
  Json list = Json::array();
  for (const auto& inter : sw.interactions) {
    if (!inter.chi2.significant || inter.degenerate) continue;
    Json ij;
    Json names = Json::array();
    for (std::size_t a : inter.attrs) names.push_back(attrs.names[a]);
    ij["attributes"] = std::move(names);
    ij["chi2"] = inter.chi2.statistic;
    ij["df"] = inter.chi2.df;
    ij["p_value"] = inter.chi2.p_value;
    if (inter.chi2.critical > 0.0) ij["critical"] = inter.chi2.critical;
    Json cells = Json::array();
    for (std::size_t cell = 0; cell < inter.n_cells(); ++cell) {
      if (inter.cell_total[cell] == 0) continue;
      Json cj;
      Json values = Json::array();
      for (std::size_t k = 0; k < inter.attrs.size(); ++k)
        values.push_back(static_cast<int>((cell >> k) & 1));
      cj["values"] = std::move(values);
      cj["rows"] = inter.cell_total[cell];
      cj["target_rows"] = inter.cell_target[cell];
      cj["probability"] = *inter.cell_probability[cell];
      cells.push_back(std::move(cj));
    }
    ij["cells"] = std::move(cells);
    list.push_back(std::move(ij));
  }
  out["interactions"] = std::move(list);

  double min_w = 1.0, max_w = 0.0, sum_w = 0.0;
  for (double w : sw.weights) {
    min_w = std::min(min_w, w);
    max_w = std::max(max_w, w);
    sum_w += w;
  }
  if (sw.weights.empty()) min_w = max_w = 0.0;
  out["weights"] = Json{{"min", min_w},
                        {"max", max_w},
                        {"mean", sw.weights.empty() ? 0.0 : sum_w / static_cast<double>(
                                                                sw.weights.size())}};
  return out;
}

class StageClock {
 public:
  explicit StageClock(Json& sink) : sink_(sink) {}
  template <typename Fn>
  auto run(const std::string& name, Fn&& fn) -> decltype(fn()) {
    auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(name, start);
    } else {
      auto result = fn();
      record(name, start);
      return result;
    }
  }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point start) {
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                        start)
                  .count();
    sink_[name] = ms;
  }
  Json& sink_;
};

}  // namespace detail

/// Executes the whole pipeline: prepare -> split -> balance -> grid ->
/// evaluate -> interactions -> audit -> reweighted retrain -> audit again.
/// Deterministic given (config, seed); a stage failure surfaces as
/// PipelineError carrying the partial report tagged failed_at_<stage>.
inline RunOutcome run_pipeline(const RunConfig& cfg) {
  if (!cfg.seed_set)
    throw Error(ErrorCode::ConfigError, "seed is required (config or --seed)");

  Json report = Json::object();
  Json timings = Json::object();
  detail::StageClock clock(timings);
  report["config"] = cfg.raw;
  report["config"]["seed"] = cfg.seed;
  // where the files land is environment detail, not part of the run
  report["config"].erase("out_dir");
  report["status"] = "ok";

  std::string stage = "prepare";
  try {
    detail::PreparedData pd = clock.run(stage, [&] { return detail::prepare_dataset(cfg); });
    {
      Json dj;
      dj["rows"] = pd.ds.n_rows();
      dj["features"] = pd.ds.feature_names;
      dj["classes"] = pd.ds.target_labels;
      dj["favorable_class"] = pd.ds.target_labels[static_cast<std::size_t>(pd.favorable)];
      Json freq = Json::object();
      for (std::size_t f = 0; f < pd.ds.n_features(); ++f) {
        Json entries = Json::array();
        for (const auto& [category, count] : pd.ds.value_counts(f))
          entries.push_back(Json{{"category", category},
                                 {"count", count},
                                 {"share", static_cast<double>(count) /
                                               static_cast<double>(pd.ds.n_rows())}});
        freq[pd.ds.feature_names[f]] = std::move(entries);
      }
      dj["frequencies"] = std::move(freq);
      std::vector<long long> class_counts(pd.ds.target_labels.size(), 0);
      for (int y : pd.ds.target) ++class_counts[static_cast<std::size_t>(y)];
      dj["class_counts"] = class_counts;
      if (!pd.notes.empty()) dj["notes"] = pd.notes;
      report["dataset"] = std::move(dj);
    }

    stage = "split";
    SplitIndices split =
        clock.run(stage, [&] { return train_test_split(pd.ds.n_rows(), cfg.seed); });
    report["dataset"]["split"] = Json{{"train", split.train.size()},
                                      {"test", split.test.size()},
                                      {"seed", split.seed},
                                      {"test_indices", split.test}};

    stage = "balance";
    CategoricalDataset train_ds = pd.ds.select_rows(split.train);
    std::vector<std::string> balance_warnings;
    Json balance_json = Json::object();
    clock.run(stage, [&] {
      std::vector<long long> before(pd.ds.target_labels.size(), 0);
      for (int y : train_ds.target) ++before[static_cast<std::size_t>(y)];
      balance_json["before"] = before;
      if (cfg.balance == BalanceMethod::Smoten) {
        ResamplePlan plan =
            plan_balance(train_ds.target, pd.n_classes, cfg.k_neighbors,
                         derive_seed(cfg.seed, 0x50e7ULL));
        plan.vdm_exponent = cfg.vdm_exponent;
        train_ds = smoten_resample(train_ds, plan, &balance_warnings);
        balance_json["method"] = "smoten";
        balance_json["k_neighbors"] = cfg.k_neighbors;
      } else {
        balance_json["method"] = "none";
      }
      std::vector<long long> after(pd.ds.target_labels.size(), 0);
      for (int y : train_ds.target) ++after[static_cast<std::size_t>(y)];
      balance_json["after"] = after;
      if (!balance_warnings.empty()) balance_json["warnings"] = balance_warnings;
    });
    report["balance"] = balance_json;

    stage = "encode";
    EncodedMatrix train_x, test_x;
    DichotomizedAttributes train_attrs, test_attrs;
    std::vector<std::uint8_t> test_l_mask;
    clock.run(stage, [&] {
      train_x = one_hot_encode(train_ds);
      test_x = one_hot_encode(pd.ds.select_rows(split.test));
      train_attrs = dichotomize(train_ds, cfg.sensitive);
      test_attrs = detail::select_attr_rows(pd.attrs, split.test);
      if (!pd.l_mask.empty())
        for (std::size_t r : split.test) test_l_mask.push_back(pd.l_mask[r]);
    });

    stage = "grid";
    std::vector<GridCell> cells;
    switch (cfg.family) {
      case ModelFamily::Svm: cells = expand_grid(cfg.svm_grid); break;
      case ModelFamily::DecisionTree: cells = expand_grid(cfg.tree_grid); break;
      case ModelFamily::RandomForest: cells = expand_grid(cfg.forest_grid); break;
      case ModelFamily::Mlp: cells = expand_grid(cfg.mlp_grid); break;
    }
    std::vector<double> unit_weights(train_x.n_rows, 1.0);
    GridSearchResult grid = clock.run(stage, [&] {
      return grid_search(cfg.family, cells, train_x, train_ds.target, unit_weights, test_x,
                         test_x.target, pd.n_classes, cfg.seed, cfg.smo);
    });
    report["grid"] = grid_to_json(grid);
    report["grid"]["family"] = model_family_name(cfg.family);

    stage = "evaluate";
    bool nonconvergence = false;
    for (const auto& cell : grid.cells)
      if (!cell.converged) nonconvergence = true;
    std::vector<int> pred_test;
    clock.run(stage, [&] {
      auto best = fit_cell(cfg.family, cells[grid.best_index], train_x, train_ds.target,
                           unit_weights, pd.n_classes, grid_cell_seed(cfg.seed, grid.best_index),
                           cfg.smo);
      pred_test = best->predict(test_x);
      ConfusionMatrix cm = confusion_matrix(test_x.target, pred_test, pd.n_classes);
      ClassificationReport rep = classification_report(cm);
      Json mj;
      mj["confusion"] = confusion_to_json(cm);
      mj["class_labels"] = pd.ds.target_labels;
      mj["classification_report"] = classification_report_to_json(rep, pd.ds.target_labels);
      mj["accuracy"] = rep.accuracy;
      mj["converged"] = best->converged();
      report["model"] = std::move(mj);
      if (!best->converged()) nonconvergence = true;
    });

    stage = "interactions";
    SampleWeights sw = clock.run(stage, [&] {
      return assign_weights(train_attrs, train_ds.target, pd.n_classes, pd.favorable,
                            cfg.alpha);
    });
    report["interactions"] = detail::interactions_to_json(sw, train_attrs);

    stage = "audit_pre";
    report["fairness_pre"] = clock.run(stage, [&] {
      return fairness_audit(test_x.target, pred_test, test_attrs, test_l_mask, sw.interactions,
                            pd.n_classes, pd.favorable, cfg.difference_threshold,
                            cfg.ratio_threshold, cfg.threshold_grid);
    });

    stage = "retrain";
    if (cfg.reweight == ReweightMode::Intersectional) {
      std::vector<int> pred_post;
      clock.run(stage, [&] {
        auto weighted = fit_cell(cfg.family, cells[grid.best_index], train_x, train_ds.target,
                                 sw.weights, pd.n_classes,
                                 grid_cell_seed(cfg.seed, grid.best_index), cfg.smo);
        pred_post = weighted->predict(test_x);
        ConfusionMatrix cm = confusion_matrix(test_x.target, pred_post, pd.n_classes);
        ClassificationReport rep = classification_report(cm);
        Json mj;
        mj["confusion"] = confusion_to_json(cm);
        mj["class_labels"] = pd.ds.target_labels;
        mj["classification_report"] = classification_report_to_json(rep, pd.ds.target_labels);
        mj["accuracy"] = rep.accuracy;
        mj["converged"] = weighted->converged();
        mj["reweighted"] = true;
        report["model_post"] = std::move(mj);
        if (!weighted->converged()) nonconvergence = true;
      });
      stage = "audit_post";
      report["fairness_post"] = clock.run(stage, [&] {
        return fairness_audit(test_x.target, pred_post, test_attrs, test_l_mask,
                              sw.interactions, pd.n_classes, pd.favorable,
                              cfg.difference_threshold, cfg.ratio_threshold,
                              cfg.threshold_grid);
      });
    } else {
      report["model_post"] = report["model"];
      report["model_post"]["reweighted"] = false;
      report["fairness_post"] = report["fairness_pre"];
      report["reweight_note"] = "reweight disabled; post sections mirror pre";
    }

    RunOutcome outcome;
    outcome.report = std::move(report);
    outcome.timings = std::move(timings);
    outcome.nonconvergence = nonconvergence;
    outcome.report["nonconvergence"] = outcome.nonconvergence;
    return outcome;
  } catch (const Error& e) {
    report["status"] = "failed_at_" + stage;
    report["error"] = Json{{"code", error_code_name(e.code())}, {"message", e.what()}};
    throw PipelineError(stage, e.code(), e.what(), std::move(report), std::move(timings));
  }
}

/// Metrics-only path: audits an externally supplied prediction file against
/// the config's dataset. The CSV needs columns row, y_true, y_pred with
/// class labels; row indexes the config input after filtering.
inline Json audit_predictions(const RunConfig& cfg, const std::string& predictions_path) {
  detail::PreparedData pd = detail::prepare_dataset(cfg);
  CsvTable table = read_csv(predictions_path);

  auto col = [&](const char* name) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end())
      throw Error(ErrorCode::MissingColumn, std::string(name) + " in " + predictions_path);
    return static_cast<std::size_t>(it - table.header.begin());
  };
  std::size_t row_col = col("row"), true_col = col("y_true"), pred_col = col("y_pred");

  auto label_code = [&](const std::string& label) {
    auto it = std::find(pd.ds.target_labels.begin(), pd.ds.target_labels.end(), label);
    if (it == pd.ds.target_labels.end())
      throw Error(ErrorCode::UnmappedCategory, "unknown class label: " + label);
    return static_cast<int>(it - pd.ds.target_labels.begin());
  };

  std::vector<std::size_t> rows;
  std::vector<int> y_true, y_pred;
  for (const auto& record : table.rows) {
    std::size_t r = static_cast<std::size_t>(std::stoull(record[row_col]));
    if (r >= pd.ds.n_rows())
      throw Error(ErrorCode::RaggedRow, "row index out of range: " + record[row_col]);
    int truth = label_code(record[true_col]);
    if (truth != pd.ds.target[r])
      throw Error(ErrorCode::UnmappedCategory,
                  "y_true mismatch at row " + record[row_col] +
                      " (predictions misaligned with input?)");
    rows.push_back(r);
    y_true.push_back(truth);
    y_pred.push_back(label_code(record[pred_col]));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyFile, "no prediction rows");

  DichotomizedAttributes attrs = detail::select_attr_rows(pd.attrs, rows);
  std::vector<std::uint8_t> l_mask;
  if (!pd.l_mask.empty())
    for (std::size_t r : rows) l_mask.push_back(pd.l_mask[r]);

  // Interactions for the worst-case subgroups are fit on the audited rows
  // themselves; there is no training split on this path.
  SampleWeights sw = assign_weights(attrs, y_true, pd.n_classes, pd.favorable, cfg.alpha);

  Json out;
  out["rows_audited"] = rows.size();
  out["classes"] = pd.ds.target_labels;
  out["interactions"] = detail::interactions_to_json(sw, attrs);
  out["fairness"] = fairness_audit(y_true, y_pred, attrs, l_mask, sw.interactions,
                                   pd.n_classes, pd.favorable, cfg.difference_threshold,
                                   cfg.ratio_threshold, cfg.threshold_grid);
  return out;
}

}  // namespace fairkit
