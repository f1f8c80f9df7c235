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

#include <cmath>
#include <string>
#include <vector>

#include "fairkit/dataset.hpp"
#include "fairkit/error.hpp"

namespace fairkit {

enum class KernelKind { Linear, Polynomial, Rbf, Sigmoid };

inline const char* kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Polynomial: return "poly";
    case KernelKind::Rbf: return "rbf";
    case KernelKind::Sigmoid: return "sigmoid";
  }
  return "?";
}

enum class GammaMode { Scale, Auto, Explicit };

/// Kernel family and its parameters. `coef` is the additive offset inside
/// the polynomial and sigmoid kernels; gamma enters rbf and sigmoid only.
struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  int degree = 3;
  double coef = 0.0;
  GammaMode gamma_mode = GammaMode::Scale;
  double gamma_value = 0.0;
};

/// Resolves gamma: auto = 1/n_cols, scale = 1/(n_cols * Var(X)) with the
/// population variance taken over every matrix entry.
inline double gamma_resolve(const KernelSpec& spec, std::size_t n_cols,
                            double variance) {
  switch (spec.gamma_mode) {
    case GammaMode::Explicit:
      if (spec.gamma_value <= 0.0)
        throw Error(ErrorCode::ConfigError, "explicit gamma must be positive");
      return spec.gamma_value;
    case GammaMode::Auto:
      return 1.0 / static_cast<double>(n_cols);
    case GammaMode::Scale:
      if (variance <= 0.0)
        throw Error(ErrorCode::ZeroVariance, "scale gamma on constant matrix");
      return 1.0 / (static_cast<double>(n_cols) * variance);
  }
  return 0.0;
}

inline double matrix_variance(const EncodedMatrix& data) {
  if (data.data.empty()) return 0.0;
  double n = static_cast<double>(data.data.size());
  double mean = 0.0;
  for (std::uint8_t v : data.data) mean += static_cast<double>(v);
  mean /= n;
  double var = 0.0;
  for (std::uint8_t v : data.data) {
    double d = static_cast<double>(v) - mean;
    var += d * d;
  }
  return var / n;
}

inline double gamma_resolve(const KernelSpec& spec, const EncodedMatrix& data) {
  return gamma_resolve(spec, data.n_cols, matrix_variance(data));
}

/// Evaluates the selected kernel at (x, y) with an already-resolved gamma.
inline double kernel_eval(const KernelSpec& spec, double gamma,
                          const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::LengthMismatch, "kernel arguments differ in length");
  switch (spec.kind) {
    case KernelKind::Linear: {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
      return dot;
    }
    case KernelKind::Polynomial: {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
      return std::pow(dot + spec.coef, spec.degree);
    }
    case KernelKind::Rbf: {
      double sq = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        sq += d * d;
      }
      return std::exp(-gamma * sq);
    }
    case KernelKind::Sigmoid: {
      double dot = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
      return std::tanh(gamma * dot + spec.coef);
    }
  }
  return 0.0;
}

}  // namespace fairkit
