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

#include <stdexcept>
#include <string>

namespace fairkit {

enum class ErrorCode {
  // ingestion / dataset
  MissingColumn,
  RaggedRow,
  EmptyFile,
  MissingRuleColumn,
  EmptyFeatureSet,
  AllMissingColumn,
  UnmappedCategory,
  ResidualMissing,
  TooFewRows,
  DegenerateTarget,
  // smoten
  UnknownValue,
  LengthMismatch,
  // svm
  SingleClass,
  NoConvergence,
  ZeroVariance,
  // trees
  ZeroWeight,
  EmptyData,
  // mlp
  DivergedLoss,
  // fairness
  EmptyGroup,
  ZeroDenominator,
  NoPositives,
  NoNegatives,
  ZeroMaxRate,
  NoConditionedRows,
  NonSquare,
  // reweight
  DegenerateTable,
  EmptyCell,
  // cli / io
  ConfigError,
  IoError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::MissingRuleColumn: return "MissingRuleColumn";
    case ErrorCode::EmptyFeatureSet: return "EmptyFeatureSet";
    case ErrorCode::AllMissingColumn: return "AllMissingColumn";
    case ErrorCode::UnmappedCategory: return "UnmappedCategory";
    case ErrorCode::ResidualMissing: return "ResidualMissing";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::UnknownValue: return "UnknownValue";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::ZeroWeight: return "ZeroWeight";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::NoNegatives: return "NoNegatives";
    case ErrorCode::ZeroMaxRate: return "ZeroMaxRate";
    case ErrorCode::NoConditionedRows: return "NoConditionedRows";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::DegenerateTable: return "DegenerateTable";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fairkit
