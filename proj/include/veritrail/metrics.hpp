#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "veritrail/common.hpp"

namespace veritrail {

class MetricsError : public Error {
 public:
  enum class Kind {
    EmptyInput,
    LengthMismatch,
    SingleClassInput,
    ZeroVariance,
    InvalidDistribution,
    UnknownStage,
  };

  MetricsError(Kind kind, const std::string& msg) : Error(msg), kind(kind) {}

  Kind kind;
};

// One scored claim with Inconclusive already filtered out by the caller.
struct BinaryPair {
  bool gold_fs = false;
  bool pred_fs = false;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
  bool degenerate_precision = false;  // no predictions of this class
  bool degenerate_recall = false;     // no gold instances of this class
};

struct HardMetrics {
  ClassMetrics fs;
  ClassMetrics nfs;
  double macro_f1 = 0.0;
  double balanced_accuracy = 0.0;
};

inline HardMetrics hard_metrics(const std::vector<BinaryPair>& pairs) {
  if (pairs.empty())
    throw MetricsError(MetricsError::Kind::EmptyInput, "no labeled pairs to score");
  long tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& p : pairs) {
    if (p.gold_fs && p.pred_fs) ++tp;
    if (!p.gold_fs && p.pred_fs) ++fp;
    if (p.gold_fs && !p.pred_fs) ++fn;
    if (!p.gold_fs && !p.pred_fs) ++tn;
  }
  auto one_class = [](long tp_, long fp_, long fn_, long support) {
    ClassMetrics m;
    m.support = support;
    if (tp_ + fp_ > 0)
      m.precision = static_cast<double>(tp_) / static_cast<double>(tp_ + fp_);
    else
      m.degenerate_precision = true;
    if (tp_ + fn_ > 0)
      m.recall = static_cast<double>(tp_) / static_cast<double>(tp_ + fn_);
    else
      m.degenerate_recall = true;
    if (m.precision + m.recall > 0.0)
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
  };
  HardMetrics out;
  out.fs = one_class(tp, fp, fn, tp + fn);
  out.nfs = one_class(tn, fn, fp, tn + fp);
  out.macro_f1 = (out.fs.f1 + out.nfs.f1) / 2.0;
  out.balanced_accuracy = (out.fs.recall + out.nfs.recall) / 2.0;
  return out;
}

// Mann-Whitney formulation: the probability a positive outscores a negative,
// ties counting one half.
inline double auroc(const std::vector<std::pair<bool, double>>& gold_score) {
  std::vector<double> pos, neg;
  for (const auto& [gold, score] : gold_score) (gold ? pos : neg).push_back(score);
  if (pos.empty() || neg.empty())
    throw MetricsError(MetricsError::Kind::SingleClassInput,
                       "AUROC needs both a positive and a negative example");
  double wins = 0.0;
  for (double p : pos)
    for (double n : neg) {
      if (p > n)
        wins += 1.0;
      else if (p == n)
        wins += 0.5;
    }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

// Per-variant error-stage attribution. For variant v with n_v true positives,
// p_{v,s} is the fraction of its true positives whose predicted error stages
// include s; the combined row weights each variant by n_v.
struct AttributionInput {
  std::string variant;
  std::vector<std::set<int>> tp_stage_sets;
};

struct AttributionRow {
  std::string variant;
  long n = 0;
  std::map<int, double> p_by_stage;
};

struct AttributionResult {
  std::vector<AttributionRow> rows;
  std::map<int, double> weighted_mean;
  long total = 0;
};

inline AttributionResult attribution(const std::vector<AttributionInput>& inputs) {
  std::set<int> stages;
  for (const auto& in : inputs)
    for (const auto& s : in.tp_stage_sets) stages.insert(s.begin(), s.end());

  AttributionResult out;
  std::map<int, double> weighted_num;
  for (const auto& in : inputs) {
    AttributionRow row;
    row.variant = in.variant;
    row.n = static_cast<long>(in.tp_stage_sets.size());
    for (int s : stages) {
      long hits = 0;
      for (const auto& set : in.tp_stage_sets) hits += set.count(s) ? 1 : 0;
      double p = row.n > 0 ? static_cast<double>(hits) / static_cast<double>(row.n) : 0.0;
      row.p_by_stage[s] = p;
      weighted_num[s] += static_cast<double>(row.n) * p;
    }
    out.total += row.n;
    out.rows.push_back(std::move(row));
  }
  for (int s : stages)
    out.weighted_mean[s] = out.total > 0 ? weighted_num[s] / static_cast<double>(out.total) : 0.0;
  return out;
}

namespace detail {

inline double percentile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  double pos = p * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = static_cast<size_t>(std::ceil(pos));
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace detail

// Percentile bootstrap (2.5th and 97.5th) for the pooled weighted mean of the
// stage-s attribution rate, resampling true positives from the combined pool.
inline std::pair<double, double> bootstrap_ci(const std::vector<AttributionInput>& inputs,
                                              int stage, int iterations, uint64_t seed) {
  std::vector<char> pool;
  for (const auto& in : inputs)
    for (const auto& set : in.tp_stage_sets) pool.push_back(set.count(stage) ? 1 : 0);
  if (pool.empty())
    throw MetricsError(MetricsError::Kind::EmptyInput, "no true positives to resample");
  if (iterations < 1)
    throw MetricsError(MetricsError::Kind::EmptyInput, "bootstrap needs >= 1 iteration");

  SplitMix rng(seed);
  std::vector<double> stats;
  stats.reserve(static_cast<size_t>(iterations));
  for (int it = 0; it < iterations; ++it) {
    long hits = 0;
    for (size_t i = 0; i < pool.size(); ++i)
      hits += pool[rng.below(pool.size())];
    stats.push_back(static_cast<double>(hits) / static_cast<double>(pool.size()));
  }
  std::sort(stats.begin(), stats.end());
  return {detail::percentile_sorted(stats, 0.025), detail::percentile_sorted(stats, 0.975)};
}

// Jensen-Shannon divergence, base 2, over two distributions on the same
// support; bounded to [0, 1].
inline double jsd(const std::vector<double>& p, const std::vector<double>& r) {
  if (p.size() != r.size())
    throw MetricsError(MetricsError::Kind::LengthMismatch,
                       "distributions must share a support");
  if (p.empty())
    throw MetricsError(MetricsError::Kind::EmptyInput, "distributions must be non-empty");
  auto check = [](const std::vector<double>& d) {
    double sum = 0.0;
    for (double x : d) {
      if (x < 0.0 || !std::isfinite(x))
        throw MetricsError(MetricsError::Kind::InvalidDistribution,
                           "distribution entries must be finite and non-negative");
      sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      throw MetricsError(MetricsError::Kind::InvalidDistribution,
                         "distribution must sum to 1");
  };
  check(p);
  check(r);
  double out = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    double m = (p[i] + r[i]) / 2.0;
    if (p[i] > 0.0) out += 0.5 * p[i] * std::log2(p[i] / m);
    if (r[i] > 0.0) out += 0.5 * r[i] * std::log2(r[i] / m);
  }
  return std::min(1.0, std::max(0.0, out));
}

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& values) {
  std::vector<size_t> order(values.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size(), 0.0);
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw MetricsError(MetricsError::Kind::LengthMismatch, "inputs must pair up");
  if (xs.size() < 2)
    throw MetricsError(MetricsError::Kind::EmptyInput, "need at least two pairs");
  std::vector<double> rx = detail::average_ranks(xs);
  std::vector<double> ry = detail::average_ranks(ys);
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(rx.size());
  my /= static_cast<double>(ry.size());
  double num = 0.0, vx = 0.0, vy = 0.0;
  for (size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    vx += (rx[i] - mx) * (rx[i] - mx);
    vy += (ry[i] - my) * (ry[i] - my);
  }
  if (vx == 0.0 || vy == 0.0)
    throw MetricsError(MetricsError::Kind::ZeroVariance,
                       "rank variance is zero; correlation undefined");
  return num / std::sqrt(vx * vy);
}

}  // namespace veritrail
