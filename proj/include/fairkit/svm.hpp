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
#include <list>
#include <unordered_map>
#include <vector>

#include "fairkit/error.hpp"
#include "fairkit/kernel.hpp"

namespace fairkit {

struct SmoOptions {
  double tol = 1e-3;
  // 0 -> ten passes in the classic sense: 10 * n sweeps of n pair updates,
  // with a floor for tiny problems.
  std::size_t max_iter = 0;
  std::size_t full_gram_limit = 4096;
  std::size_t lru_rows = 512;    // row cache size beyond the full-Gram limit
};

/// Soft-margin binary SVM in dual form. Box upper bounds are per-sample
/// C * w_i; the decision function is sum_k alpha_k y_k K(sv_k, x) + bias.
struct SvmModel {
  KernelSpec spec;
  double gamma = 0.0;
  double c = 1.0;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> alpha;           // per support vector
  std::vector<double> sv_label;        // +-1
  std::vector<double> sv_weight;       // training weight per support vector
  std::vector<std::size_t> sv_index;   // row index in the training set
  double bias = 0.0;
  double dual_objective = 0.0;
  bool converged = true;
  std::size_t iterations = 0;

  double decision(const std::vector<double>& x) const {
    double sum = bias;
    for (std::size_t k = 0; k < support_vectors.size(); ++k)
      sum += alpha[k] * sv_label[k] * kernel_eval(spec, gamma, support_vectors[k], x);
    return sum;
  }
};

namespace detail {

// Gram rows, fully materialized up to full_gram_limit rows and served from a
// small LRU beyond that.
class KernelCache {
 public:
  KernelCache(const std::vector<std::vector<double>>& rows, const KernelSpec& spec,
              double gamma, const SmoOptions& opts)
      : rows_(rows), spec_(spec), gamma_(gamma), lru_capacity_(std::max<std::size_t>(2, opts.lru_rows)) {
    n_ = rows.size();
    full_ = n_ <= opts.full_gram_limit;
    if (full_) {
      gram_.assign(n_ * n_, 0.0);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i; j < n_; ++j) {
          double v = kernel_eval(spec_, gamma_, rows_[i], rows_[j]);
          gram_[i * n_ + j] = v;
          gram_[j * n_ + i] = v;
        }
    }
  }

  const double* row(std::size_t i) {
    if (full_) return &gram_[i * n_];
    auto it = cached_.find(i);
    if (it != cached_.end()) {
      order_.splice(order_.begin(), order_, it->second.second);
      return it->second.first.data();
    }
    if (cached_.size() >= lru_capacity_) {
      cached_.erase(order_.back());
      order_.pop_back();
    }
    std::vector<double> values(n_);
    for (std::size_t j = 0; j < n_; ++j)
      values[j] = kernel_eval(spec_, gamma_, rows_[i], rows_[j]);
    order_.push_front(i);
    auto [pos, inserted] = cached_.emplace(i, std::make_pair(std::move(values), order_.begin()));
    return pos->second.first.data();
  }

 private:
  const std::vector<std::vector<double>>& rows_;
  KernelSpec spec_;
  double gamma_;
  std::size_t n_ = 0;
  bool full_ = true;
  std::vector<double> gram_;
  std::size_t lru_capacity_;
  std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>> cached_;
  std::list<std::size_t> order_;
};

}  // namespace detail

/// Sequential minimal optimization with maximal-violating-pair selection
/// (ties by index). Minimizes (1/2) a'Qa - e'a subject to 0 <= a_i <= C*w_i
/// and y'a = 0; stops when the maximal KKT violation drops below tol.
/// When the iteration budget runs out the best iterate is returned with
/// converged = false.
inline SvmModel smo_train(const std::vector<std::vector<double>>& X,
                          const std::vector<int>& y, double c,
                          const std::vector<double>& weights, const KernelSpec& spec,
                          double gamma, const SmoOptions& opts = {}) {
  const std::size_t n = X.size();
  if (n == 0) throw Error(ErrorCode::EmptyData, "no training rows");
  if (y.size() != n || weights.size() != n)
    throw Error(ErrorCode::LengthMismatch, "labels/weights do not match rows");
  if (c <= 0.0) throw Error(ErrorCode::ConfigError, "C must be positive");

  bool has_pos = false, has_neg = false;
  for (int label : y) {
    if (label == 1) has_pos = true;
    else if (label == -1) has_neg = true;
    else throw Error(ErrorCode::ConfigError, "labels must be +-1");
  }
  if (!has_pos || !has_neg) throw Error(ErrorCode::SingleClass, "both labels required");
  for (double w : weights)
    if (w <= 0.0) throw Error(ErrorCode::ConfigError, "weights must be positive");

  std::vector<double> box(n);
  for (std::size_t i = 0; i < n; ++i) box[i] = c * weights[i];

  detail::KernelCache cache(X, spec, gamma, opts);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // G = Qa - e

  const std::size_t max_iter =
      opts.max_iter ? opts.max_iter : std::max<std::size_t>(10000, 10 * n * n);
  const double tau = 1e-12;

  bool converged = false;
  std::size_t iter = 0;
  double m_final = 0.0, big_m_final = 0.0;
  for (; iter < max_iter; ++iter) {
    // i maximizes -y*G over I_up, j minimizes it over I_low.
    std::ptrdiff_t i = -1, j = -1;
    double m = -std::numeric_limits<double>::infinity();
    double big_m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      double v = -static_cast<double>(y[k]) * grad[k];
      bool in_up = (y[k] == 1) ? alpha[k] < box[k] : alpha[k] > 0.0;
      bool in_low = (y[k] == 1) ? alpha[k] > 0.0 : alpha[k] < box[k];
      if (in_up && v > m) {
        m = v;
        i = static_cast<std::ptrdiff_t>(k);
      }
      if (in_low && v < big_m) {
        big_m = v;
        j = static_cast<std::ptrdiff_t>(k);
      }
    }
    m_final = m;
    big_m_final = big_m;
    if (i < 0 || j < 0 || m - big_m <= opts.tol) {
      converged = true;
      break;
    }

    const std::size_t ii = static_cast<std::size_t>(i);
    const std::size_t jj = static_cast<std::size_t>(j);
    const double* row_i = cache.row(ii);
    const double kii = row_i[ii];
    const double kij = row_i[jj];
    const double* row_j = cache.row(jj);
    const double kjj = row_j[jj];
    row_i = cache.row(ii);  // possibly evicted by row(jj)

    double eta = kii + kjj - 2.0 * kij;
    if (eta < tau) eta = tau;

    // e_k = y_k * G_k is the bias-free prediction error.
    double e_i = static_cast<double>(y[ii]) * grad[ii];
    double e_j = static_cast<double>(y[jj]) * grad[jj];

    double lo, hi;
    if (y[ii] != y[jj]) {
      lo = std::max(0.0, alpha[jj] - alpha[ii]);
      hi = std::min(box[jj], box[ii] + alpha[jj] - alpha[ii]);
    } else {
      lo = std::max(0.0, alpha[ii] + alpha[jj] - box[ii]);
      hi = std::min(box[jj], alpha[ii] + alpha[jj]);
    }

    double aj_new = alpha[jj] + static_cast<double>(y[jj]) * (e_i - e_j) / eta;
    aj_new = std::clamp(aj_new, lo, hi);
    double ai_new = alpha[ii] + static_cast<double>(y[ii]) * static_cast<double>(y[jj]) *
                                    (alpha[jj] - aj_new);

    // The derived alpha can land a rounding error away from its bound and
    // leave a stuck active-set entry; snap it onto the bound.
    auto snap = [](double a, double bound) {
      double eps = 1e-12 * std::max(1.0, bound);
      if (a < eps) return 0.0;
      if (a > bound - eps) return bound;
      return a;
    };
    ai_new = snap(ai_new, box[ii]);
    aj_new = snap(aj_new, box[jj]);

    double delta_i = ai_new - alpha[ii];
    double delta_j = aj_new - alpha[jj];
    if (delta_i == 0.0 && delta_j == 0.0) break;  // stuck pair: not converged
    alpha[ii] = ai_new;
    alpha[jj] = aj_new;

    for (std::size_t k = 0; k < n; ++k)
      grad[k] += static_cast<double>(y[k]) *
                 (static_cast<double>(y[ii]) * delta_i * row_i[k] +
                  static_cast<double>(y[jj]) * delta_j * row_j[k]);
  }

  SvmModel model;
  model.spec = spec;
  model.gamma = gamma;
  model.c = c;
  model.converged = converged;
  model.iterations = iter;

  // Bias from free support vectors; midpoint of the KKT interval otherwise.
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (alpha[k] > 1e-9 && alpha[k] < box[k] - 1e-9) {
      free_sum += -static_cast<double>(y[k]) * grad[k];
      ++free_count;
    }
  }
  if (free_count > 0) {
    model.bias = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(m_final) && std::isfinite(big_m_final)) {
    model.bias = 0.5 * (m_final + big_m_final);
  }

  double quad = 0.0, lin = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    quad += alpha[k] * grad[k];  // a'(Qa - e) = a'Qa - e'a
    lin += alpha[k];
  }
  // max-form dual: e'a - (1/2) a'Qa
  model.dual_objective = lin - 0.5 * (quad + lin);

  for (std::size_t k = 0; k < n; ++k) {
    if (alpha[k] > 1e-12) {
      model.support_vectors.push_back(X[k]);
      model.alpha.push_back(alpha[k]);
      model.sv_label.push_back(static_cast<double>(y[k]));
      model.sv_weight.push_back(weights[k]);
      model.sv_index.push_back(k);
    }
  }
  return model;
}

/// One-vs-one multiclass wrapper: K(K-1)/2 binary machines; prediction by
/// vote count, ties by summed decision values, then lowest class index.
struct MulticlassSvm {
  struct Pair {
    int class_a = 0;  // mapped to +1
    int class_b = 0;  // mapped to -1
    SvmModel model;
  };

  int n_classes = 0;
  std::vector<Pair> pairs;

  bool converged() const {
    for (const auto& p : pairs)
      if (!p.model.converged) return false;
    return true;
  }

  int predict(const std::vector<double>& x) const {
    std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
    std::vector<double> score(static_cast<std::size_t>(n_classes), 0.0);
    for (const auto& p : pairs) {
      double d = p.model.decision(x);
      if (d > 0.0) ++votes[static_cast<std::size_t>(p.class_a)];
      else ++votes[static_cast<std::size_t>(p.class_b)];
      score[static_cast<std::size_t>(p.class_a)] += d;
      score[static_cast<std::size_t>(p.class_b)] -= d;
    }
    int best = 0;
    for (int k = 1; k < n_classes; ++k) {
      std::size_t ku = static_cast<std::size_t>(k);
      std::size_t bu = static_cast<std::size_t>(best);
      if (votes[ku] > votes[bu] || (votes[ku] == votes[bu] && score[ku] > score[bu]))
        best = k;
    }
    return best;
  }
};

inline MulticlassSvm multiclass_train(const std::vector<std::vector<double>>& X,
                                      const std::vector<int>& y, int n_classes,
                                      double c, const std::vector<double>& weights,
                                      const KernelSpec& spec, double gamma,
                                      const SmoOptions& opts = {}) {
  if (n_classes < 2) throw Error(ErrorCode::SingleClass, "need at least 2 classes");
  MulticlassSvm out;
  out.n_classes = n_classes;
  for (int a = 0; a < n_classes; ++a) {
    for (int b = a + 1; b < n_classes; ++b) {
      std::vector<std::vector<double>> sub_x;
      std::vector<int> sub_y;
      std::vector<double> sub_w;
      for (std::size_t r = 0; r < X.size(); ++r) {
        if (y[r] == a || y[r] == b) {
          sub_x.push_back(X[r]);
          sub_y.push_back(y[r] == a ? 1 : -1);
          sub_w.push_back(weights[r]);
        }
      }
      MulticlassSvm::Pair pair;
      pair.class_a = a;
      pair.class_b = b;
      pair.model = smo_train(sub_x, sub_y, c, sub_w, spec, gamma, opts);
      out.pairs.push_back(std::move(pair));
    }
  }
  return out;
}

}  // namespace fairkit
