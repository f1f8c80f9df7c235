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

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fairkit/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConvergence = 4;

int exit_code_for(fairkit::ErrorCode code) {
  return code == fairkit::ErrorCode::ConfigError ? kExitConfig : kExitData;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) out.push_back(std::stod(token));
  return out;
}

fairkit::Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fairkit::Error(fairkit::ErrorCode::ConfigError, "cannot open " + path);
  fairkit::Json j;
  in >> j;
  return j;
}

struct RunFlags {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  bool seed_given = false;
  std::string balance, model, kernel, gamma, reweight, grid_path, c_grid;
  int k_neighbors = -1;
  int degree = -1;
  double coef = 0.0;
  bool coef_given = false;
};

/// Applies command-line overrides onto the raw config document so the
/// report echoes the effective settings.
fairkit::Json effective_config(const RunFlags& flags) {
  fairkit::Json j = load_json_file(flags.config_path);
  if (flags.seed_given) j["seed"] = static_cast<std::uint64_t>(flags.seed);
  if (!flags.out_dir.empty()) j["out_dir"] = flags.out_dir;
  if (!flags.balance.empty()) j["balance"]["method"] = flags.balance;
  if (flags.k_neighbors > 0) j["balance"]["k_neighbors"] = flags.k_neighbors;
  if (!flags.model.empty()) j["model"]["family"] = flags.model;
  if (!flags.kernel.empty()) j["model"]["svm"]["kernels"] = {flags.kernel};
  if (!flags.c_grid.empty()) j["model"]["svm"]["c_values"] = parse_double_list(flags.c_grid);
  if (!flags.gamma.empty()) {
    if (flags.gamma == "scale" || flags.gamma == "auto")
      j["model"]["svm"]["gamma"] = flags.gamma;
    else
      j["model"]["svm"]["gamma"] = std::stod(flags.gamma);
  }
  if (flags.degree > 0) j["model"]["svm"]["degree"] = flags.degree;
  if (flags.coef_given) j["model"]["svm"]["coef"] = flags.coef;
  if (!flags.reweight.empty()) j["reweight"] = flags.reweight;
  if (!flags.grid_path.empty()) j["model"]["grid"] = load_json_file(flags.grid_path);
  return j;
}

int run_command(const RunFlags& flags) {
  fairkit::RunConfig cfg = fairkit::parse_config(effective_config(flags));
  try {
    fairkit::RunOutcome outcome = fairkit::run_pipeline(cfg);
    fairkit::emit_report(outcome.report, outcome.timings, cfg.out_dir);
    std::cout << "status: " << outcome.report["status"].get<std::string>() << "\n"
              << "accuracy: " << outcome.report["model"]["accuracy"].dump() << "\n"
              << "reports: " << cfg.out_dir << "/report.json\n";
    if (outcome.nonconvergence) {
      std::cerr << "warning: at least one model did not converge\n";
      return kExitNoConvergence;
    }
    return kExitOk;
  } catch (const fairkit::PipelineError& e) {
    fairkit::emit_report(e.report(), e.timings(), cfg.out_dir);
    std::cerr << "error: " << e.what() << "\n"
              << "partial report: " << cfg.out_dir << "/report.json\n";
    return exit_code_for(e.code());
  }
}

int audit_command(const std::string& config_path, const std::string& predictions_path,
                  const std::string& out_dir) {
  fairkit::Json raw = load_json_file(config_path);
  if (!out_dir.empty()) raw["out_dir"] = out_dir;
  fairkit::RunConfig cfg = fairkit::parse_config(raw);

  fairkit::Json audit = fairkit::audit_predictions(cfg, predictions_path);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw fairkit::Error(fairkit::ErrorCode::IoError, "cannot create " + cfg.out_dir);
  std::ofstream out(cfg.out_dir + "/audit_report.json", std::ios::binary);
  if (!out)
    throw fairkit::Error(fairkit::ErrorCode::IoError, "cannot write audit_report.json");
  out << audit.dump(2) << "\n";
  out.close();

  fairkit::Json wrapper;
  wrapper["fairness_pre"] = audit["fairness"];
  fairkit::write_fairness_csv(wrapper, cfg.out_dir + "/fairness.csv");
  std::cout << "rows audited: " << audit["rows_audited"].dump() << "\n"
            << "reports: " << cfg.out_dir << "/audit_report.json\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairkit: categorical classification with fairness auditing"};
  app.require_subcommand(1);

  RunFlags flags;
  CLI::App* run = app.add_subcommand("run", "execute the full pipeline from a config");
  run->add_option("--config", flags.config_path, "config JSON file")->required();
  run->add_option("--out", flags.out_dir, "output directory (overrides config)");
  auto* seed_opt = run->add_option("--seed", flags.seed, "RNG seed (overrides config)");
  run->add_option("--balance", flags.balance, "smoten|none")
      ->check(CLI::IsMember({"smoten", "none"}));
  run->add_option("--k-neighbors", flags.k_neighbors, "SMOTEN neighbor count");
  run->add_option("--model", flags.model, "svm|dt|rf|mlp")
      ->check(CLI::IsMember({"svm", "dt", "rf", "mlp"}));
  run->add_option("--kernel", flags.kernel, "restrict SVM sweep to one kernel")
      ->check(CLI::IsMember({"linear", "poly", "rbf", "sigmoid"}));
  run->add_option("--c-grid", flags.c_grid, "comma-separated SVM C values");
  run->add_option("--gamma", flags.gamma, "scale|auto|<float>");
  run->add_option("--degree", flags.degree, "polynomial degree");
  auto* coef_opt = run->add_option("--coef", flags.coef, "poly/sigmoid offset");
  run->add_option("--grid", flags.grid_path, "JSON file with the family's parameter grid");
  run->add_option("--reweight", flags.reweight, "none|intersectional")
      ->check(CLI::IsMember({"none", "intersectional"}));

  std::string audit_config, audit_predictions_path, audit_out;
  CLI::App* audit = app.add_subcommand("audit", "metrics-only audit of a prediction file");
  audit->add_option("--config", audit_config, "config JSON file")->required();
  audit->add_option("--predictions", audit_predictions_path,
                    "CSV with columns row,y_true,y_pred")
      ->required();
  audit->add_option("--out", audit_out, "output directory (overrides config)");

  CLI11_PARSE(app, argc, argv);
  flags.seed_given = seed_opt->count() > 0;
  flags.coef_given = coef_opt->count() > 0;

  try {
    if (run->parsed()) return run_command(flags);
    return audit_command(audit_config, audit_predictions_path, audit_out);
  } catch (const fairkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
