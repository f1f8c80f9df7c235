// Test-only oracles: independent brute-force implementations used to pin
// expected values. Nothing here may call into the library paths it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Exact fractions (mirrors the rational-before-final-division discipline)
// ---------------------------------------------------------------------------

struct Frac {
  long long n = 0;
  long long d = 1;
  double v() const { return static_cast<double>(n) / static_cast<double>(d); }
};

inline Frac norm(long long n, long long d) {
  if (d < 0) {
    n = -n;
    d = -d;
  }
  long long g = std::gcd(n < 0 ? -n : n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  return {n, d};
}

inline int cmp(Frac a, Frac b) {
  __int128 lhs = static_cast<__int128>(a.n) * b.d;
  __int128 rhs = static_cast<__int128>(b.n) * a.d;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

inline Frac fsub(Frac a, Frac b) { return norm(a.n * b.d - b.n * a.d, a.d * b.d); }
inline Frac fdiv(Frac a, Frac b) { return norm(a.n * b.d, a.d * b.n); }
inline Frac absf(Frac a) { return {a.n < 0 ? -a.n : a.n, a.d}; }

// ---------------------------------------------------------------------------
// Row-counting fairness oracle
// ---------------------------------------------------------------------------

struct Rows {
  std::vector<int> y_true, y_pred, group;
  int n_classes = 0;
  int n_groups = 0;
};

inline long long count_rows(const Rows& r, const std::function<bool(std::size_t)>& pred) {
  long long c = 0;
  for (std::size_t i = 0; i < r.y_true.size(); ++i)
    if (pred(i)) ++c;
  return c;
}

inline long long group_size(const Rows& r, int g) {
  return count_rows(r, [&](std::size_t i) { return r.group[i] == g; });
}

inline Frac pass_rate(const Rows& r, int g, int cls) {
  long long total = group_size(r, g);
  long long pos = count_rows(r, [&](std::size_t i) {
    return r.group[i] == g && r.y_pred[i] == cls;
  });
  return norm(pos, total);
}

inline std::optional<Frac> tpr(const Rows& r, int g, int cls) {
  long long positives = count_rows(r, [&](std::size_t i) {
    return r.group[i] == g && r.y_true[i] == cls;
  });
  if (positives == 0) return std::nullopt;
  long long hit = count_rows(r, [&](std::size_t i) {
    return r.group[i] == g && r.y_true[i] == cls && r.y_pred[i] == cls;
  });
  return norm(hit, positives);
}

inline std::optional<Frac> fpr(const Rows& r, int g, int cls) {
  long long negatives = count_rows(r, [&](std::size_t i) {
    return r.group[i] == g && r.y_true[i] != cls;
  });
  if (negatives == 0) return std::nullopt;
  long long hit = count_rows(r, [&](std::size_t i) {
    return r.group[i] == g && r.y_true[i] != cls && r.y_pred[i] == cls;
  });
  return norm(hit, negatives);
}

// DI = rate(unpriv)/rate(priv); infinity when the privileged rate is 0.
inline double di_binary(const Rows& r, int unpriv, int priv, int pos) {
  Frac u = pass_rate(r, unpriv, pos);
  Frac p = pass_rate(r, priv, pos);
  if (p.n == 0) return std::numeric_limits<double>::infinity();
  return fdiv(u, p).v();
}

// Per class: min over groups of P(pred=c, true=c | group) over max of same.
inline std::vector<double> di_multiclass(const Rows& r) {
  std::vector<double> out;
  for (int c = 0; c < r.n_classes; ++c) {
    std::optional<Frac> lo, hi;
    for (int g = 0; g < r.n_groups; ++g) {
      long long total = group_size(r, g);
      if (total == 0) continue;
      long long hit = count_rows(r, [&](std::size_t i) {
        return r.group[i] == g && r.y_true[i] == c && r.y_pred[i] == c;
      });
      Frac rate = norm(hit, total);
      if (!lo || cmp(rate, *lo) < 0) lo = rate;
      if (!hi || cmp(rate, *hi) > 0) hi = rate;
    }
    if (!hi || hi->n == 0) {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    out.push_back(fdiv(*lo, *hi).v());
  }
  return out;
}

inline double spd_binary(const Rows& r, int unpriv, int priv, int pos) {
  return fsub(pass_rate(r, unpriv, pos), pass_rate(r, priv, pos)).v();
}

inline std::vector<double> spd_multiclass(const Rows& r, int unpriv, int priv) {
  std::vector<double> out;
  for (int c = 0; c < r.n_classes; ++c)
    out.push_back(absf(fsub(pass_rate(r, unpriv, c), pass_rate(r, priv, c))).v());
  return out;
}

// max TPR - min TPR over groups with actual positives.
inline std::optional<double> eqopp_binary(const Rows& r, int pos) {
  std::optional<Frac> lo, hi;
  for (int g = 0; g < r.n_groups; ++g) {
    if (group_size(r, g) == 0) continue;
    auto t = tpr(r, g, pos);
    if (!t) continue;
    if (!lo || cmp(*t, *lo) < 0) lo = *t;
    if (!hi || cmp(*t, *hi) > 0) hi = *t;
  }
  if (!lo) return std::nullopt;
  return absf(fsub(*hi, *lo)).v();
}

inline std::optional<double> eqopp_multiclass(const Rows& r) {
  std::optional<Frac> lo, hi;
  for (int g = 0; g < r.n_groups; ++g) {
    if (group_size(r, g) == 0) continue;
    for (int c = 0; c < r.n_classes; ++c) {
      auto t = tpr(r, g, c);
      if (!t) continue;
      if (!lo || cmp(*t, *lo) < 0) lo = *t;
      if (!hi || cmp(*t, *hi) > 0) hi = *t;
    }
  }
  if (!lo) return std::nullopt;
  return absf(fsub(*hi, *lo)).v();
}

// | |dTPR| - |dFPR| | between the two designated groups.
inline std::optional<double> eqodds_binary(const Rows& r, int unpriv, int priv, int pos) {
  auto tu = tpr(r, unpriv, pos), tp = tpr(r, priv, pos);
  auto fu = fpr(r, unpriv, pos), fp_ = fpr(r, priv, pos);
  if (!tu || !tp || !fu || !fp_) return std::nullopt;
  Frac dt = absf(fsub(*tu, *tp));
  Frac df = absf(fsub(*fu, *fp_));
  return absf(fsub(dt, df)).v();
}

inline std::optional<double> eqodds_multiclass(const Rows& r) {
  std::optional<Frac> tlo, thi, flo, fhi;
  for (int g = 0; g < r.n_groups; ++g) {
    if (group_size(r, g) == 0) continue;
    for (int c = 0; c < r.n_classes; ++c) {
      auto t = tpr(r, g, c);
      if (t) {
        if (!tlo || cmp(*t, *tlo) < 0) tlo = *t;
        if (!thi || cmp(*t, *thi) > 0) thi = *t;
      }
      auto f = fpr(r, g, c);
      if (f) {
        if (!flo || cmp(*f, *flo) < 0) flo = *f;
        if (!fhi || cmp(*f, *fhi) > 0) fhi = *f;
      }
    }
  }
  if (!tlo || !flo) return std::nullopt;
  Frac dt = absf(fsub(*thi, *tlo));
  Frac df = absf(fsub(*fhi, *flo));
  return absf(fsub(dt, df)).v();
}

// min pass rate / max pass rate; nullopt when the max is zero.
inline std::optional<double> dpr_binary(const Rows& r, int pos) {
  std::optional<Frac> lo, hi;
  for (int g = 0; g < r.n_groups; ++g) {
    if (group_size(r, g) == 0) continue;
    Frac rate = pass_rate(r, g, pos);
    if (!lo || cmp(rate, *lo) < 0) lo = rate;
    if (!hi || cmp(rate, *hi) > 0) hi = rate;
  }
  if (!hi || hi->n == 0) return std::nullopt;
  return fdiv(*lo, *hi).v();
}

inline std::optional<double> dpr_multiclass(const Rows& r) {
  std::optional<Frac> worst;
  for (int c = 0; c < r.n_classes; ++c) {
    std::optional<Frac> lo, hi;
    for (int g = 0; g < r.n_groups; ++g) {
      if (group_size(r, g) == 0) continue;
      Frac rate = pass_rate(r, g, c);
      if (!lo || cmp(rate, *lo) < 0) lo = rate;
      if (!hi || cmp(rate, *hi) > 0) hi = rate;
    }
    if (!hi || hi->n == 0) continue;
    Frac ratio = fdiv(*lo, *hi);
    if (!worst || cmp(ratio, *worst) < 0) worst = ratio;
  }
  if (!worst) return std::nullopt;
  return worst->v();
}

inline std::optional<double> eoppr(const Rows& r, int pos, bool multiclass) {
  std::optional<Frac> lo, hi;
  for (int g = 0; g < r.n_groups; ++g) {
    if (group_size(r, g) == 0) continue;
    if (multiclass) {
      for (int c = 0; c < r.n_classes; ++c) {
        auto t = tpr(r, g, c);
        if (!t) continue;
        if (!lo || cmp(*t, *lo) < 0) lo = *t;
        if (!hi || cmp(*t, *hi) > 0) hi = *t;
      }
    } else {
      auto t = tpr(r, g, pos);
      if (!t) continue;
      if (!lo || cmp(*t, *lo) < 0) lo = *t;
      if (!hi || cmp(*t, *hi) > 0) hi = *t;
    }
  }
  if (!lo || hi->n == 0) return std::nullopt;
  return fdiv(*lo, *hi).v();
}

inline std::optional<double> eoddr_multiclass(const Rows& r) { return dpr_multiclass(r); }

// The sweep convention: grid point one below the smallest fair threshold,
// clamped to 0 at the bottom, absent past the top.
inline std::optional<double> sweep(double value, const std::vector<double>& grid) {
  double v = std::abs(value);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (v < grid[i]) return i == 0 ? 0.0 : grid[i - 1];
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Dense projected-gradient QP oracle for the SVM dual
// ---------------------------------------------------------------------------

// max D(a) = sum a - 1/2 sum_ij a_i a_j y_i y_j K_ij
// s.t. 0 <= a_i <= C_i, y'a = 0.
struct QpOracle {
  std::vector<double> kernel;  // n x n
  std::vector<int> y;
  std::vector<double> box;
  std::size_t n = 0;

  double objective(const std::vector<double>& a) const {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lin += a[i];
      for (std::size_t j = 0; j < n; ++j)
        quad += a[i] * a[j] * y[i] * y[j] * kernel[i * n + j];
    }
    return lin - 0.5 * quad;
  }

  // Euclidean projection onto the box intersected with y'a = 0, by
  // bisection on the equality multiplier.
  std::vector<double> project(const std::vector<double>& v) const {
    auto alpha_at = [&](double lambda) {
      std::vector<double> a(n);
      for (std::size_t i = 0; i < n; ++i)
        a[i] = std::clamp(v[i] + lambda * y[i], 0.0, box[i]);
      return a;
    };
    auto violation = [&](double lambda) {
      auto a = alpha_at(lambda);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += y[i] * a[i];
      return s;  // nondecreasing in lambda
    };
    double radius = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      radius = std::max(radius, std::abs(v[i]) + box[i] + 1.0);
    double lo = -radius, hi = radius;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (violation(mid) < 0.0) lo = mid;
      else hi = mid;
    }
    return alpha_at(0.5 * (lo + hi));
  }

  double solve(int iterations = 200000) const {
    // Gershgorin bound on the largest eigenvalue of Q gives a safe step.
    double lip = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += std::abs(kernel[i * n + j]);
      lip = std::max(lip, row);
    }
    double step = 1.0 / std::max(lip, 1e-9);

    std::vector<double> a(n, 0.0);
    a = project(a);
    double best = objective(a);
    for (int it = 0; it < iterations; ++it) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) {
        double grad = 1.0;
        for (std::size_t j = 0; j < n; ++j)
          grad -= a[j] * y[i] * y[j] * kernel[i * n + j];
        v[i] = a[i] + step * grad;
      }
      a = project(v);
      double obj = objective(a);
      if (obj > best) best = obj;
      if (it > 1000 && std::abs(obj - best) < 1e-14 && obj <= best) {
        // keep polishing a little, then bail
        if (it % 1000 == 0 && obj + 1e-12 >= best) break;
      }
    }
    return best;
  }
};

}  // namespace oracle
