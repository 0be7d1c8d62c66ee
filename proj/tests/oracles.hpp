#pragma once

// Independent oracles used by the unit and acceptance suites. Everything here
// deliberately avoids the library's implementation paths: different
// algorithms, different code, same contracts.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "aupipe/core.hpp"

namespace oracles {

// ---- metrics: naive counting, field by field ---------------------------------

struct NaiveCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

inline NaiveCounts naive_confusion(const std::vector<std::uint8_t>& preds,
                                   const std::vector<std::uint8_t>& labels) {
  NaiveCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) c.tp += (preds[i] == 1 && labels[i] == 1);
  for (std::size_t i = 0; i < preds.size(); ++i) c.fp += (preds[i] == 1 && labels[i] == 0);
  for (std::size_t i = 0; i < preds.size(); ++i) c.tn += (preds[i] == 0 && labels[i] == 0);
  for (std::size_t i = 0; i < preds.size(); ++i) c.fn += (preds[i] == 0 && labels[i] == 1);
  return c;
}

inline double naive_f1(const NaiveCounts& c) {
  if (c.tp == 0) return (c.fp == 0 && c.fn == 0) ? 1.0 : 0.0;
  return 2.0 * double(c.tp) / double(2 * c.tp + c.fp + c.fn);
}

inline double naive_rate(const NaiveCounts& c) {
  return double(c.tp + c.tn) / double(c.tp + c.fp + c.tn + c.fn);
}

// ---- balance: reference sampler mirroring the documented Rng algorithms ------

inline std::uint64_t ref_below(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
  std::uint64_t v = gen();
  while (v >= limit) v = gen();
  return v % bound;
}

// Expected balance() output: all positives plus a partial-Fisher-Yates sample
// of the negatives, ascending.
inline std::vector<std::size_t> reference_balance(const std::vector<std::uint8_t>& labels,
                                                  std::uint64_t seed) {
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] ? positives : negatives).push_back(i);
  }
  std::vector<std::size_t> selected = positives;
  if (negatives.size() <= positives.size()) {
    selected.insert(selected.end(), negatives.begin(), negatives.end());
  } else {
    std::mt19937_64 gen(seed);
    std::vector<std::size_t> pool(negatives.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < positives.size(); ++i) {
      const std::size_t j = i + std::size_t(ref_below(gen, pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    for (std::size_t i = 0; i < positives.size(); ++i) selected.push_back(negatives[pool[i]]);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

// ---- sequences: coverage-mask oracle ------------------------------------------

struct OracleSpan {
  int begin, end;  // inclusive
  bool active;
};

// Marks padded activation coverage on a boolean mask, reads maximal runs off
// the mask (merging falls out for free), then classifies the gaps.
inline std::vector<OracleSpan> sequence_spans(const std::vector<std::uint8_t>& labels, int pad,
                                              int inactive_min) {
  const int n = int(labels.size());
  std::vector<std::uint8_t> covered(n, 0);
  for (int t = 0; t < n; ++t) {
    if (!labels[t]) continue;
    for (int k = std::max(0, t - pad); k <= std::min(n - 1, t + pad); ++k) covered[k] = 1;
  }
  std::vector<OracleSpan> spans;
  int t = 0;
  while (t < n) {
    int e = t;
    while (e + 1 < n && covered[e + 1] == covered[t]) ++e;
    const bool active = covered[t] != 0;
    if (active || (e - t + 1) < inactive_min) spans.push_back({t, e, active});
    t = e + 1;
  }
  return spans;
}

// ---- LDA: closed-form 2-D solution with explicit inversion --------------------

struct ClosedFormLda {
  std::array<double, 2> w{};
  double b = 0.0;
};

inline ClosedFormLda closed_form_lda_2d(const std::vector<std::array<double, 2>>& x,
                                        const std::vector<std::uint8_t>& y, double ridge) {
  std::array<double, 2> mu_pos{}, mu_neg{};
  double n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i]) {
      mu_pos[0] += x[i][0];
      mu_pos[1] += x[i][1];
      n_pos += 1;
    } else {
      mu_neg[0] += x[i][0];
      mu_neg[1] += x[i][1];
      n_neg += 1;
    }
  }
  mu_pos[0] /= n_pos;
  mu_pos[1] /= n_pos;
  mu_neg[0] /= n_neg;
  mu_neg[1] /= n_neg;

  double s00 = 0, s01 = 0, s11 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::array<double, 2>& mu = y[i] ? mu_pos : mu_neg;
    const double d0 = x[i][0] - mu[0];
    const double d1 = x[i][1] - mu[1];
    s00 += d0 * d0;
    s01 += d0 * d1;
    s11 += d1 * d1;
  }
  const double n = n_pos + n_neg;
  s00 /= n;
  s01 /= n;
  s11 /= n;
  const double lambda = ridge * (s00 + s11) / 2.0;
  s00 += lambda;
  s11 += lambda;

  // Explicit 2x2 inversion.
  const double det = s00 * s11 - s01 * s01;
  const double inv00 = s11 / det, inv01 = -s01 / det, inv11 = s00 / det;
  const double d0 = mu_pos[0] - mu_neg[0];
  const double d1 = mu_pos[1] - mu_neg[1];
  ClosedFormLda out;
  out.w[0] = inv00 * d0 + inv01 * d1;
  out.w[1] = inv01 * d0 + inv11 * d1;
  out.b = -(out.w[0] * 0.5 * (mu_pos[0] + mu_neg[0]) + out.w[1] * 0.5 * (mu_pos[1] + mu_neg[1]));
  return out;
}

// ---- SVM: brute-force box-QP by dense grid enumeration with refinement --------

// Maximizes D(alpha) = sum(alpha) - 0.5 alpha^T Q alpha over [0, C]^n, where
// Q_ij = y_i y_j (x_i . x_j + 1) is the augmented-bias dual matrix. The dual
// is concave, so shrinking a dense grid around the incumbent converges to the
// global maximum; the incumbent is always a grid point, which keeps the value
// monotone across levels.
struct GridQp {
  double value = 0.0;
  std::vector<double> alpha;
};

inline GridQp grid_qp_max(const std::vector<std::vector<double>>& q, double c, int levels = 60,
                          int points = 5) {
  const std::size_t n = q.size();
  const auto dual = [&](const std::vector<double>& a) {
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v += a[i];
      double qa = 0.0;
      for (std::size_t j = 0; j < n; ++j) qa += q[i][j] * a[j];
      v -= 0.5 * a[i] * qa;
    }
    return v;
  };

  std::vector<double> center(n, c / 2.0);
  std::vector<double> best = center;
  double best_value = dual(best);
  double half_width = c / 2.0;

  std::vector<double> candidate(n);
  std::vector<int> digit(n, 0);
  for (int level = 0; level < levels; ++level) {
    std::fill(digit.begin(), digit.end(), 0);
    bool done = false;
    while (!done) {
      for (std::size_t i = 0; i < n; ++i) {
        const double offset = half_width * (2.0 * digit[i] / (points - 1) - 1.0);
        candidate[i] = std::clamp(center[i] + offset, 0.0, c);
      }
      const double value = dual(candidate);
      if (value > best_value) {
        best_value = value;
        best = candidate;
      }
      // odometer over the n-digit base-`points` counter
      std::size_t pos = 0;
      while (pos < n && ++digit[pos] == points) {
        digit[pos] = 0;
        ++pos;
      }
      done = pos == n;
    }
    center = best;
    half_width *= 0.55;
  }
  return GridQp{best_value, best};
}

// Builds the augmented-bias dual matrix for rows of x with +-1 labels.
inline std::vector<std::vector<double>> svm_dual_matrix(
    const std::vector<std::vector<double>>& x, const std::vector<std::uint8_t>& y) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 1.0;  // augmented bias feature
      for (std::size_t k = 0; k < x[i].size(); ++k) dot += x[i][k] * x[j][k];
      const double si = y[i] ? 1.0 : -1.0;
      const double sj = y[j] ? 1.0 : -1.0;
      q[i][j] = si * sj * dot;
    }
  }
  return q;
}

}  // namespace oracles
