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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairkit/error.hpp"
#include "fairkit/random.hpp"

namespace fairkit {

enum class Activation { Relu, Tanh, Sigmoid };
enum class Optimizer { Adam, Sgd };
enum class LossKind { CategoricalCrossentropy, MeanSquaredError };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

inline const char* optimizer_name(Optimizer o) {
  return o == Optimizer::Adam ? "adam" : "sgd";
}

inline const char* loss_name(LossKind l) {
  return l == LossKind::CategoricalCrossentropy ? "categorical_crossentropy"
                                                : "mean_squared_error";
}

inline double activate(Activation kind, double x) {
  switch (kind) {
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Tanh: return std::tanh(x);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
  }
  return 0.0;
}

/// Derivative in terms of pre-activation z and activation a = f(z).
inline double activate_grad(Activation kind, double z, double a) {
  switch (kind) {
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: return 1.0 - a * a;
    case Activation::Sigmoid: return a * (1.0 - a);
  }
  return 0.0;
}

struct MlpParams {
  int units1 = 8;
  int units2 = 8;
  Activation activation = Activation::Relu;
  Optimizer optimizer = Optimizer::Adam;
  LossKind loss = LossKind::CategoricalCrossentropy;
  int epochs = 20;
  std::optional<double> learning_rate;  // default 1e-3 for adam, 1e-2 for sgd
  int batch_size = 32;
  std::uint64_t seed = 0;

  double resolved_learning_rate() const {
    if (learning_rate) return *learning_rate;
    return optimizer == Optimizer::Adam ? 1e-3 : 1e-2;
  }
};

/// Two hidden layers with a softmax output head. Weight matrices are
/// row-major [out][in].
struct MlpModel {
  int n_in = 0, u1 = 0, u2 = 0, n_out = 0;
  Activation activation = Activation::Relu;
  std::vector<double> w1, b1, w2, b2, w3, b3;

  struct ForwardState {
    std::vector<double> z1, a1, z2, a2, z3, p;
  };

  void forward(const std::vector<double>& x, ForwardState& s) const {
    affine(w1, b1, x, u1, n_in, s.z1);
    apply_activation(s.z1, s.a1);
    affine(w2, b2, s.a1, u2, u1, s.z2);
    apply_activation(s.z2, s.a2);
    affine(w3, b3, s.a2, n_out, u2, s.z3);
    softmax(s.z3, s.p);
  }

  std::vector<double> predict_proba(const std::vector<double>& x) const {
    ForwardState s;
    forward(x, s);
    return s.p;
  }

  int predict_row(const std::vector<double>& x) const {
    std::vector<double> p = predict_proba(x);
    int best = 0;
    for (std::size_t k = 1; k < p.size(); ++k)
      if (p[k] > p[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
    return best;
  }

  static void softmax(const std::vector<double>& z, std::vector<double>& p) {
    p.resize(z.size());
    double zmax = z.front();
    for (double v : z) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      p[k] = std::exp(z[k] - zmax);
      sum += p[k];
    }
    for (double& v : p) v /= sum;
  }

 private:
  static void affine(const std::vector<double>& w, const std::vector<double>& b,
                     const std::vector<double>& in, int n_out_dim, int n_in_dim,
                     std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(n_out_dim), 0.0);
    for (int o = 0; o < n_out_dim; ++o) {
      double sum = b[static_cast<std::size_t>(o)];
      const double* row = &w[static_cast<std::size_t>(o) * static_cast<std::size_t>(n_in_dim)];
      for (int i = 0; i < n_in_dim; ++i) sum += row[i] * in[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(o)] = sum;
    }
  }

  void apply_activation(const std::vector<double>& z, std::vector<double>& a) const {
    a.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = activate(activation, z[i]);
  }
};

struct MlpGradients {
  std::vector<double> w1, b1, w2, b2, w3, b3;
  double loss = 0.0;
};

namespace detail {

inline double sample_loss(LossKind loss, const std::vector<double>& p, int label) {
  if (loss == LossKind::CategoricalCrossentropy) {
    double py = std::max(p[static_cast<std::size_t>(label)], 1e-12);
    return -std::log(py);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    double target = (static_cast<int>(k) == label) ? 1.0 : 0.0;
    double d = p[k] - target;
    sum += d * d;
  }
  return sum / static_cast<double>(p.size());
}

/// dL/dz at the softmax head for one sample.
inline void output_delta(LossKind loss, const std::vector<double>& p, int label,
                         std::vector<double>& delta) {
  const std::size_t k_count = p.size();
  delta.resize(k_count);
  if (loss == LossKind::CategoricalCrossentropy) {
    for (std::size_t k = 0; k < k_count; ++k)
      delta[k] = p[k] - ((static_cast<int>(k) == label) ? 1.0 : 0.0);
    return;
  }
  // MSE through the softmax Jacobian: dz_k = p_k (g_k - g.p).
  std::vector<double> g(k_count);
  double gp = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    double target = (static_cast<int>(k) == label) ? 1.0 : 0.0;
    g[k] = 2.0 * (p[k] - target) / static_cast<double>(k_count);
    gp += g[k] * p[k];
  }
  for (std::size_t k = 0; k < k_count; ++k) delta[k] = p[k] * (g[k] - gp);
}

}  // namespace detail

/// Weighted batch loss (mean over the batch of w_i * loss_i) and its
/// analytic gradients.
inline MlpGradients mlp_gradient(const MlpModel& model,
                                 const std::vector<std::vector<double>>& xs,
                                 const std::vector<int>& ys,
                                 const std::vector<double>& ws, LossKind loss) {
  MlpGradients g;
  g.w1.assign(model.w1.size(), 0.0);
  g.b1.assign(model.b1.size(), 0.0);
  g.w2.assign(model.w2.size(), 0.0);
  g.b2.assign(model.b2.size(), 0.0);
  g.w3.assign(model.w3.size(), 0.0);
  g.b3.assign(model.b3.size(), 0.0);

  const double inv_batch = 1.0 / static_cast<double>(xs.size());
  MlpModel::ForwardState s;
  std::vector<double> d3, d2, d1;

  for (std::size_t i = 0; i < xs.size(); ++i) {
    model.forward(xs[i], s);
    g.loss += ws[i] * detail::sample_loss(loss, s.p, ys[i]) * inv_batch;

    detail::output_delta(loss, s.p, ys[i], d3);
    double scale = ws[i] * inv_batch;

    d2.assign(static_cast<std::size_t>(model.u2), 0.0);
    for (int o = 0; o < model.n_out; ++o) {
      double dz = d3[static_cast<std::size_t>(o)] * scale;
      g.b3[static_cast<std::size_t>(o)] += dz;
      for (int j = 0; j < model.u2; ++j) {
        g.w3[static_cast<std::size_t>(o) * static_cast<std::size_t>(model.u2) +
             static_cast<std::size_t>(j)] += dz * s.a2[static_cast<std::size_t>(j)];
        d2[static_cast<std::size_t>(j)] +=
            d3[static_cast<std::size_t>(o)] *
            model.w3[static_cast<std::size_t>(o) * static_cast<std::size_t>(model.u2) +
                     static_cast<std::size_t>(j)];
      }
    }
    for (int j = 0; j < model.u2; ++j)
      d2[static_cast<std::size_t>(j)] *=
          activate_grad(model.activation, s.z2[static_cast<std::size_t>(j)],
                        s.a2[static_cast<std::size_t>(j)]);

    d1.assign(static_cast<std::size_t>(model.u1), 0.0);
    for (int o = 0; o < model.u2; ++o) {
      double dz = d2[static_cast<std::size_t>(o)] * scale;
      g.b2[static_cast<std::size_t>(o)] += dz;
      for (int j = 0; j < model.u1; ++j) {
        g.w2[static_cast<std::size_t>(o) * static_cast<std::size_t>(model.u1) +
             static_cast<std::size_t>(j)] += dz * s.a1[static_cast<std::size_t>(j)];
        d1[static_cast<std::size_t>(j)] +=
            d2[static_cast<std::size_t>(o)] *
            model.w2[static_cast<std::size_t>(o) * static_cast<std::size_t>(model.u1) +
                     static_cast<std::size_t>(j)];
      }
    }
    for (int j = 0; j < model.u1; ++j)
      d1[static_cast<std::size_t>(j)] *=
          activate_grad(model.activation, s.z1[static_cast<std::size_t>(j)],
                        s.a1[static_cast<std::size_t>(j)]);

    for (int o = 0; o < model.u1; ++o) {
      double dz = d1[static_cast<std::size_t>(o)] * scale;
      g.b1[static_cast<std::size_t>(o)] += dz;
      for (int j = 0; j < model.n_in; ++j)
        g.w1[static_cast<std::size_t>(o) * static_cast<std::size_t>(model.n_in) +
             static_cast<std::size_t>(j)] += dz * xs[i][static_cast<std::size_t>(j)];
    }
  }
  return g;
}

/// Glorot-uniform initial weights from the seed; biases start at zero.
inline MlpModel mlp_init(int n_in, int n_classes, const MlpParams& params) {
  MlpModel model;
  model.n_in = n_in;
  model.u1 = params.units1;
  model.u2 = params.units2;
  model.n_out = n_classes;
  model.activation = params.activation;

  Rng rng(derive_seed(params.seed, 0x1217ULL));
  auto init_layer = [&](std::vector<double>& w, std::vector<double>& b, int fan_out,
                        int fan_in) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    w.resize(static_cast<std::size_t>(fan_out) * static_cast<std::size_t>(fan_in));
    for (double& v : w) v = rng.next_real(-limit, limit);
    b.assign(static_cast<std::size_t>(fan_out), 0.0);
  };
  init_layer(model.w1, model.b1, model.u1, model.n_in);
  init_layer(model.w2, model.b2, model.u2, model.u1);
  init_layer(model.w3, model.b3, model.n_out, model.u2);
  return model;
}

/// Mini-batch training with per-sample loss weights; deterministic given
/// the seed (fixed init, fixed per-epoch shuffle). A non-finite batch loss
/// aborts with DivergedLoss.
inline MlpModel mlp_fit(const std::vector<std::vector<double>>& x,
                        const std::vector<int>& y, const std::vector<double>& weights,
                        const MlpParams& params, int n_classes) {
  if (x.empty()) throw Error(ErrorCode::EmptyData, "no training rows");
  if (n_classes < 2) throw Error(ErrorCode::DegenerateTarget, "need >= 2 classes");

  MlpModel model = mlp_init(static_cast<int>(x.front().size()), n_classes, params);
  const double lr = params.resolved_learning_rate();

  struct AdamState {
    std::vector<double> m, v;
  };
  auto adam_for = [](const std::vector<double>& p) {
    return AdamState{std::vector<double>(p.size(), 0.0), std::vector<double>(p.size(), 0.0)};
  };
  AdamState s_w1 = adam_for(model.w1), s_b1 = adam_for(model.b1);
  AdamState s_w2 = adam_for(model.w2), s_b2 = adam_for(model.b2);
  AdamState s_w3 = adam_for(model.w3), s_b3 = adam_for(model.b3);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long step = 0;

  auto apply = [&](std::vector<double>& p, const std::vector<double>& g, AdamState& st) {
    if (params.optimizer == Optimizer::Sgd) {
      for (std::size_t k = 0; k < p.size(); ++k) p[k] -= lr * g[k];
      return;
    }
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t k = 0; k < p.size(); ++k) {
      st.m[k] = beta1 * st.m[k] + (1.0 - beta1) * g[k];
      st.v[k] = beta2 * st.v[k] + (1.0 - beta2) * g[k] * g[k];
      p[k] -= lr * (st.m[k] / bc1) / (std::sqrt(st.v[k] / bc2) + eps);
    }
  };

  Rng shuffle_rng(derive_seed(params.seed, 0x5117ULL));
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t batch = static_cast<std::size_t>(std::max(1, params.batch_size));
  std::vector<std::vector<double>> bx;
  std::vector<int> by;
  std::vector<double> bw;

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      std::size_t stop = std::min(order.size(), start + batch);
      bx.clear();
      by.clear();
      bw.clear();
      for (std::size_t i = start; i < stop; ++i) {
        bx.push_back(x[order[i]]);
        by.push_back(y[order[i]]);
        bw.push_back(weights[order[i]]);
      }
      MlpGradients g = mlp_gradient(model, bx, by, bw, params.loss);
      if (!std::isfinite(g.loss))
        throw Error(ErrorCode::DivergedLoss,
                    "non-finite loss at epoch " + std::to_string(epoch));
      ++step;
      apply(model.w1, g.w1, s_w1);
      apply(model.b1, g.b1, s_b1);
      apply(model.w2, g.w2, s_w2);
      apply(model.b2, g.b2, s_b2);
      apply(model.w3, g.w3, s_w3);
      apply(model.b3, g.b3, s_b3);
    }
  }
  return model;
}

}  // namespace fairkit
