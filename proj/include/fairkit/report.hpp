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

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairkit/csv.hpp"
#include "fairkit/error.hpp"
#include "fairkit/fairness.hpp"
#include "fairkit/model.hpp"

namespace fairkit {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Confusion matrix and classification report
// ---------------------------------------------------------------------------

using ConfusionMatrix = std::vector<std::vector<long long>>;  // [true][pred]

inline ConfusionMatrix confusion_matrix(const std::vector<int>& y_true,
                                        const std::vector<int>& y_pred, int n_classes) {
  ConfusionMatrix m(static_cast<std::size_t>(n_classes),
                    std::vector<long long>(static_cast<std::size_t>(n_classes), 0));
  for (std::size_t i = 0; i < y_true.size(); ++i)
    ++m[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
  return m;
}

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long long support = 0;
  std::vector<std::string> notes;
};

struct ClassificationReport {
  std::vector<ClassScores> per_class;
  double accuracy = 0.0;
  long long total = 0;
};

/// Standard per-class precision/recall/F1/support plus overall accuracy.
/// Zero-denominator cells report 0.00 with a note.
inline ClassificationReport classification_report(const ConfusionMatrix& m) {
  const std::size_t k = m.size();
  for (const auto& row : m) {
    if (row.size() != k) throw Error(ErrorCode::NonSquare, "confusion matrix must be square");
    for (long long v : row)
      if (v < 0) throw Error(ErrorCode::NonSquare, "negative count");
  }

  ClassificationReport rep;
  long long trace = 0;
  for (std::size_t c = 0; c < k; ++c) trace += m[c][c];
  for (const auto& row : m)
    for (long long v : row) rep.total += v;
  rep.accuracy = rep.total ? static_cast<double>(trace) / static_cast<double>(rep.total) : 0.0;

  for (std::size_t c = 0; c < k; ++c) {
    ClassScores s;
    long long tp = m[c][c];
    long long pred = 0, actual = 0;
    for (std::size_t r = 0; r < k; ++r) {
      pred += m[r][c];
      actual += m[c][r];
    }
    s.support = actual;
    if (pred == 0) {
      s.notes.push_back("zero predictions for this class");
    } else {
      s.precision = static_cast<double>(tp) / static_cast<double>(pred);
    }
    if (actual == 0) {
      s.notes.push_back("zero actual rows for this class");
    } else {
      s.recall = static_cast<double>(tp) / static_cast<double>(actual);
    }
    if (s.precision + s.recall > 0.0)
      s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    rep.per_class.push_back(std::move(s));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON conversion
// ---------------------------------------------------------------------------

inline Json metric_to_json(const MetricResult& r) {
  Json j;
  j["metric"] = r.metric;
  j["scope"] = r.scope;
  if (r.infinite) j["value"] = "inf";
  else j["value"] = r.value;
  j["threshold"] = r.threshold;
  j["verdict"] = verdict_name(r.verdict);
  if (r.max_fair_threshold) j["max_fair_threshold"] = *r.max_fair_threshold;
  else j["max_fair_threshold"] = nullptr;
  if (r.class_index) j["class"] = *r.class_index;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

inline Json classification_report_to_json(const ClassificationReport& rep,
                                          const std::vector<std::string>& labels) {
  Json per_class = Json::object();
  for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
    const auto& s = rep.per_class[c];
    Json j;
    j["precision"] = s.precision;
    j["recall"] = s.recall;
    j["f1"] = s.f1;
    j["support"] = s.support;
    if (!s.notes.empty()) j["notes"] = s.notes;
    per_class[c < labels.size() ? labels[c] : std::to_string(c)] = std::move(j);
  }
  Json out;
  out["accuracy"] = rep.accuracy;
  out["per_class"] = std::move(per_class);
  out["total"] = rep.total;
  return out;
}

inline Json confusion_to_json(const ConfusionMatrix& m) {
  Json rows = Json::array();
  for (const auto& row : m) rows.push_back(row);
  return rows;
}

inline Json params_to_json(const ParamList& params) {
  Json j = Json::object();
  for (const auto& [key, value] : params) j[key] = value;
  return j;
}

inline Json grid_to_json(const GridSearchResult& grid) {
  Json cells = Json::array();
  for (const auto& cell : grid.cells) {
    Json j;
    j["params"] = params_to_json(cell.params);
    j["score"] = cell.score;
    j["converged"] = cell.converged;
    cells.push_back(std::move(j));
  }
  Json out;
  out["cells"] = std::move(cells);
  out["best_index"] = grid.best_index;
  out["best_params"] = params_to_json(grid.cells[grid.best_index].params);
  out["best_score"] = grid.cells[grid.best_index].score;
  return out;
}

// ---------------------------------------------------------------------------
// File emission
// ---------------------------------------------------------------------------

namespace detail {

inline std::string json_scalar_to_csv(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline void flatten_fairness_section(const Json& section, const std::string& section_name,
                                     std::ostream& out) {
  if (!section.is_object()) return;
  auto write_metric = [&](const std::string& path, const Json& m) {
    // path looks like "attributes/GENDER/metric_key" or "intersectional/..."
    std::string attribute = path;
    if (path.rfind("attributes/", 0) == 0) {
      std::string rest = path.substr(11);
      attribute = rest.substr(0, rest.find('/'));
    } else if (!path.empty()) {
      attribute = path.substr(0, path.find('/'));
    }
    std::vector<std::string> fields;
    fields.push_back(section_name);
    fields.push_back(attribute);
    fields.push_back(m.value("metric", std::string{}));
    fields.push_back(m.value("scope", std::string{}));
    fields.push_back(m.contains("class") ? m["class"].dump() : "");
    fields.push_back(json_scalar_to_csv(m.contains("value") ? m["value"] : Json{}));
    fields.push_back(m.contains("threshold") ? m["threshold"].dump() : "");
    fields.push_back(m.value("verdict", std::string{}));
    fields.push_back(
        json_scalar_to_csv(m.contains("max_fair_threshold") ? m["max_fair_threshold"] : Json{}));
    std::string notes;
    if (m.contains("notes"))
      for (const auto& n : m["notes"]) {
        if (!notes.empty()) notes += " | ";
        notes += n.get<std::string>();
      }
    fields.push_back(notes);
    write_csv_row(out, fields);
  };

  // Walk the section: metric objects are recognized by their "metric" key.
  std::function<void(const std::string&, const Json&)> walk =
      [&](const std::string& attribute, const Json& node) {
        if (node.is_object()) {
          if (node.contains("metric")) {
            write_metric(attribute, node);
            return;
          }
          for (const auto& [key, child] : node.items())
            walk(attribute.empty() ? key : attribute + "/" + key, child);
        } else if (node.is_array()) {
          for (const auto& child : node) walk(attribute, child);
        }
      };
  walk("", section);
}

}  // namespace detail

/// Writes fairness.csv from the report's pre/post fairness sections.
inline void write_fairness_csv(const Json& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_csv_row(out, {"section", "attribute", "metric", "scope", "class", "value", "threshold",
                      "verdict", "max_fair_threshold", "notes"});
  if (report.contains("fairness_pre"))
    detail::flatten_fairness_section(report["fairness_pre"], "pre", out);
  if (report.contains("fairness_post"))
    detail::flatten_fairness_section(report["fairness_post"], "post", out);
}

inline void write_grid_csv(const Json& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_csv_row(out, {"index", "params", "score", "converged"});
  if (!report.contains("grid")) return;
  const Json& cells = report["grid"]["cells"];
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Json& cell = cells[i];
    write_csv_row(out, {std::to_string(i), cell["params"].dump(),
                        cell["score"].dump(), cell["converged"].dump()});
  }
}

inline void write_confusion_csv(const Json& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  if (!report.contains("model") || !report["model"].contains("confusion")) return;
  const Json& labels = report["model"]["class_labels"];
  std::vector<std::string> header = {"true\\pred"};
  for (const auto& l : labels) header.push_back(l.get<std::string>());
  write_csv_row(out, header);
  const Json& m = report["model"]["confusion"];
  for (std::size_t r = 0; r < m.size(); ++r) {
    std::vector<std::string> fields = {labels[r].get<std::string>()};
    for (const auto& v : m[r]) fields.push_back(v.dump());
    write_csv_row(out, fields);
  }
}

inline void write_frequencies_csv(const Json& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_csv_row(out, {"feature", "category", "count", "share"});
  if (!report.contains("dataset") || !report["dataset"].contains("frequencies")) return;
  for (const auto& [feature, counts] : report["dataset"]["frequencies"].items())
    for (const auto& entry : counts)
      write_csv_row(out, {feature, entry["category"].get<std::string>(),
                          entry["count"].dump(), entry["share"].dump()});
}

/// Writes report.json plus its CSV flattenings. report.json is canonical
/// (sorted keys, fixed float formatting) and contains no volatile fields;
/// stage timings go to timings.json on the side.
inline void emit_report(const Json& report, const Json& timings, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir);

  auto write_file = [&](const std::string& name, const std::string& content) {
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + dir + "/" + name);
    out << content;
  };
  write_file("report.json", report.dump(2) + "\n");
  write_file("timings.json", timings.dump(2) + "\n");
  write_fairness_csv(report, dir + "/fairness.csv");
  write_grid_csv(report, dir + "/grid.csv");
  write_confusion_csv(report, dir + "/confusion.csv");
  write_frequencies_csv(report, dir + "/frequencies.csv");
}

}  // namespace fairkit
