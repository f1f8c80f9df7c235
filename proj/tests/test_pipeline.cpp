#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "fairkit/config.hpp"
#include "fairkit/pipeline.hpp"
#include "fairkit/report.hpp"

using namespace fairkit;

namespace {

Json fixture_config_json() {
  std::ifstream in(std::string(FAIRKIT_SOURCE_DIR) + "/fixtures/fixture_config.json");
  REQUIRE(in.good());
  Json j;
  in >> j;
  j["input"] = std::string(FAIRKIT_SOURCE_DIR) + "/fixtures/fixture.csv";
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("classification report on a diagonal matrix is perfect") {
  ConfusionMatrix m = {{12, 0}, {0, 8}};
  ClassificationReport rep = classification_report(m);
  CHECK(rep.accuracy == 1.0);
  for (const auto& c : rep.per_class) {
    CHECK(c.precision == 1.0);
    CHECK(c.recall == 1.0);
    CHECK(c.f1 == 1.0);
  }
}

TEST_CASE("classification report hand arithmetic") {
  ConfusionMatrix m = {{90, 10}, {20, 80}};
  ClassificationReport rep = classification_report(m);
  CHECK(rep.accuracy == Catch::Approx(0.85));
  CHECK(rep.per_class[0].precision == Catch::Approx(90.0 / 110.0));
  CHECK(rep.per_class[0].recall == Catch::Approx(0.9));
  CHECK(rep.per_class[0].support == 100);

  SECTION("accuracy equals trace over total, recomputed") {
    long long trace = m[0][0] + m[1][1];
    long long total = m[0][0] + m[0][1] + m[1][0] + m[1][1];
    CHECK(rep.accuracy == static_cast<double>(trace) / static_cast<double>(total));
  }
}

TEST_CASE("zero-prediction classes report 0.00 with a note") {
  ConfusionMatrix m = {{5, 0, 0}, {1, 4, 0}, {2, 1, 0}};
  // class 2 never predicted... and the third row has 3 actual rows
  ClassificationReport rep = classification_report(m);
  CHECK(rep.per_class[2].precision == 0.0);
  CHECK(rep.per_class[2].f1 == 0.0);
  REQUIRE_FALSE(rep.per_class[2].notes.empty());
  CHECK(rep.per_class[2].support == 3);
}

TEST_CASE("classification report rejects non-square input") {
  ConfusionMatrix m = {{1, 2, 3}, {4, 5, 6}};
  CHECK_THROWS_AS(classification_report(m), Error);
}

TEST_CASE("confusion matrix row sums equal class supports") {
  std::vector<int> y_true = {0, 0, 1, 2, 1, 2, 2, 0};
  std::vector<int> y_pred = {0, 1, 1, 2, 0, 2, 1, 0};
  ConfusionMatrix m = confusion_matrix(y_true, y_pred, 3);
  for (int c = 0; c < 3; ++c) {
    long long row_sum = 0;
    for (long long v : m[static_cast<std::size_t>(c)]) row_sum += v;
    long long support = std::count(y_true.begin(), y_true.end(), c);
    CHECK(row_sum == support);
  }
}

TEST_CASE("config validation") {
  Json j = fixture_config_json();

  SECTION("valid fixture config parses") {
    RunConfig cfg = parse_config(j);
    CHECK(cfg.family == ModelFamily::DecisionTree);
    CHECK(cfg.seed_set);
    CHECK(cfg.sensitive.attributes.size() == 9);
  }
  SECTION("missing required field") {
    j.erase("input");
    CHECK_THROWS_AS(parse_config(j), Error);
  }
  SECTION("unknown family") {
    j["model"]["family"] = "boosted";
    CHECK_THROWS_AS(parse_config(j), Error);
  }
  SECTION("sensitive column must be in schema") {
    j["sensitive"]["attributes"][0]["name"] = "NOT_A_COLUMN";
    CHECK_THROWS_AS(parse_config(j), Error);
  }
  SECTION("missing seed is rejected at run time") {
    j.erase("seed");
    RunConfig cfg = parse_config(j);
    CHECK_FALSE(cfg.seed_set);
    CHECK_THROWS_AS(run_pipeline(cfg), Error);
  }
}

TEST_CASE("fixture pipeline end to end with the decision-tree grid") {
  Json j = fixture_config_json();
  j["out_dir"] = "/tmp/fairkit_test_out";
  RunConfig cfg = parse_config(j);
  RunOutcome outcome = run_pipeline(cfg);
  const Json& rep = outcome.report;

  CHECK(rep["status"] == "ok");
  CHECK(rep["dataset"]["rows"] == 200);
  CHECK(rep["grid"]["cells"].size() == 54);
  CHECK(rep["dataset"]["split"]["test"] == 60);

  // balanced training classes
  const auto& after = rep["balance"]["after"];
  CHECK(after[0] == after[1]);

  // confusion matrix invariants
  const auto& confusion = rep["model"]["confusion"];
  long long trace = 0, total = 0;
  for (std::size_t r = 0; r < confusion.size(); ++r)
    for (std::size_t c = 0; c < confusion[r].size(); ++c) {
      total += confusion[r][c].get<long long>();
      if (r == c) trace += confusion[r][c].get<long long>();
    }
  CHECK(total == 60);
  CHECK(rep["model"]["accuracy"].get<double>() ==
        Catch::Approx(static_cast<double>(trace) / 60.0));

  // fairness sections exist for all nine attributes
  CHECK(rep["fairness_pre"]["attributes"].size() == 9);
  CHECK(rep["fairness_post"]["attributes"].size() == 9);
  // planted dependence: reweighting found something significant
  CHECK(rep["interactions"]["significant"].get<int>() > 0);

  SECTION("emitted files are byte-stable for an identical report") {
    emit_report(outcome.report, outcome.timings, "/tmp/fairkit_emit_a");
    emit_report(outcome.report, outcome.timings, "/tmp/fairkit_emit_b");
    CHECK(read_file("/tmp/fairkit_emit_a/report.json") ==
          read_file("/tmp/fairkit_emit_b/report.json"));
    CHECK(read_file("/tmp/fairkit_emit_a/fairness.csv") ==
          read_file("/tmp/fairkit_emit_b/fairness.csv"));

    // grid.csv row count equals grid cardinality (+ header)
    std::string grid_csv = read_file("/tmp/fairkit_emit_a/grid.csv");
    std::size_t lines = std::count(grid_csv.begin(), grid_csv.end(), '\n');
    CHECK(lines == 55);
  }
}

TEST_CASE("reweight none produces identical pre and post sections") {
  Json j = fixture_config_json();
  j["reweight"] = "none";
  j["out_dir"] = "/tmp/fairkit_test_none";
  RunConfig cfg = parse_config(j);
  RunOutcome outcome = run_pipeline(cfg);
  CHECK(outcome.report["fairness_pre"] == outcome.report["fairness_post"]);
  CHECK(outcome.report["model_post"]["confusion"] == outcome.report["model"]["confusion"]);
}

TEST_CASE("NOPRIOR rule yields a four-class multiclass report") {
  Json j = fixture_config_json();
  j["target_rule"] = "NOPRIOR";
  j["favorable_class"] = "0";
  j["out_dir"] = "/tmp/fairkit_test_noprior";
  RunConfig cfg = parse_config(j);
  RunOutcome outcome = run_pipeline(cfg);
  CHECK(outcome.report["dataset"]["classes"].size() == 4);
  // multiclass metrics present per attribute
  const Json& gender = outcome.report["fairness_pre"]["attributes"]["GENDER"];
  CHECK(gender["disparate_impact"].is_array());
  CHECK(gender["disparate_impact"].size() == 4);
  CHECK(gender["statistical_parity_difference"].contains("satisfied"));
}

TEST_CASE("pipeline failure is stage-tagged") {
  Json j = fixture_config_json();
  j["input"] = "/nonexistent/path.csv";
  RunConfig cfg = parse_config(j);
  try {
    run_pipeline(cfg);
    FAIL("expected PipelineError");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "prepare");
    CHECK(e.report()["status"].get<std::string>().rfind("failed_at_", 0) == 0);
  }
}

TEST_CASE("audit path reproduces the run's fairness numbers") {
  Json j = fixture_config_json();
  j["out_dir"] = "/tmp/fairkit_test_audit_src";
  RunConfig cfg = parse_config(j);
  RunOutcome outcome = run_pipeline(cfg);

  // Rebuild a predictions CSV from the run's test split using the report.
  // Re-derive the split deterministically.
  detail::PreparedData pd = detail::prepare_dataset(cfg);
  SplitIndices split = train_test_split(pd.ds.n_rows(), cfg.seed);

  // retrain best model the same way to get predictions
  CategoricalDataset train_ds = pd.ds.select_rows(split.train);
  ResamplePlan plan = plan_balance(train_ds.target, pd.n_classes, cfg.k_neighbors,
                                   derive_seed(cfg.seed, 0x50e7ULL));
  train_ds = smoten_resample(train_ds, plan);
  EncodedMatrix train_x = one_hot_encode(train_ds);
  EncodedMatrix test_x = one_hot_encode(pd.ds.select_rows(split.test));
  auto cells = expand_grid(cfg.tree_grid);
  std::vector<double> w(train_x.n_rows, 1.0);
  std::size_t best = outcome.report["grid"]["best_index"].get<std::size_t>();
  auto model = fit_cell(cfg.family, cells[best], train_x, train_ds.target, w, pd.n_classes,
                        grid_cell_seed(cfg.seed, best), cfg.smo);
  std::vector<int> pred = model->predict(test_x);

  std::string pred_path = "/tmp/fairkit_predictions_valid.csv";
  {
    std::ofstream out(pred_path);
    out << "row,y_true,y_pred\n";
    for (std::size_t i = 0; i < split.test.size(); ++i)
      out << split.test[i] << "," << pd.ds.target_labels[static_cast<std::size_t>(
                                          test_x.target[i])]
          << "," << pd.ds.target_labels[static_cast<std::size_t>(pred[i])] << "\n";
  }
  Json audit = audit_predictions(cfg, pred_path);
  CHECK(audit["rows_audited"] == 60);
  CHECK(audit["fairness"]["attributes"].size() == 9);

  // Binary DI for GENDER must match between run audit and prediction audit.
  const Json& from_run =
      outcome.report["fairness_pre"]["attributes"]["GENDER"]["disparate_impact"];
  const Json& from_audit = audit["fairness"]["attributes"]["GENDER"]["disparate_impact"];
  CHECK(from_run["value"] == from_audit["value"]);

  SECTION("misaligned truth labels are rejected") {
    std::string bad_path = "/tmp/fairkit_predictions_misaligned.csv";
    std::ofstream out(bad_path);
    out << "row,y_true,y_pred\n0,COMPLETE,COMPLETE\n1,COMPLETE,COMPLETE\n";
    out.close();
    // row 0 of the fixture is INCOMPLETE, so y_true mismatches
    CHECK_THROWS_AS(audit_predictions(cfg, bad_path), Error);
  }
}

TEST_CASE("empty fairness section still writes the csv header") {
  Json report;
  report["status"] = "ok";
  Json timings = Json::object();
  emit_report(report, timings, "/tmp/fairkit_empty_report");
  std::string csv = read_file("/tmp/fairkit_empty_report/fairness.csv");
  CHECK(csv.rfind("section,attribute,metric", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
}
