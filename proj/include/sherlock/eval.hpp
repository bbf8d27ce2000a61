#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sherlock/error.hpp"
#include "sherlock/random.hpp"
#include "sherlock/semantic_types.hpp"

namespace sherlock {

/// Prediction value for a model that declined to label a column.
inline constexpr int kAbstain = -1;

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvaluationReport {
  std::vector<ClassMetrics> per_class;
  double weighted_f1 = 0.0;
  std::size_t abstained = 0;
  /// confusion[truth][pred]; the last column counts abstentions.
  std::vector<std::vector<std::size_t>> confusion;
  // Filled in by callers that time prediction or know the model file.
  double runtime_per_sample = 0.0;
  std::uintmax_t model_size_bytes = 0;
};

inline double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

/// Abstentions count against recall of the true class and are excluded from
/// every class's precision. 0/0 ratios are 0.
inline EvaluationReport evaluate(std::span<const int> predictions, std::span<const int> truths,
                                 std::size_t num_classes = kNumTypes) {
  if (predictions.size() != truths.size()) throw Error("evaluate: predictions and truths differ in length");
  if (truths.empty()) throw Error("evaluate: no samples");
  EvaluationReport r;
  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes + 1, 0));
  std::vector<std::size_t> predicted(num_classes, 0), correct(num_classes, 0), support(num_classes, 0);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i], p = predictions[i];
    if (t < 0 || static_cast<std::size_t>(t) >= num_classes) throw Error("evaluate: truth label out of range");
    if (p != kAbstain && (p < 0 || static_cast<std::size_t>(p) >= num_classes))
      throw Error("evaluate: prediction out of range");
    ++support[static_cast<std::size_t>(t)];
    if (p == kAbstain) {
      ++r.abstained;
      ++r.confusion[static_cast<std::size_t>(t)][num_classes];
      continue;
    }
    ++predicted[static_cast<std::size_t>(p)];
    ++r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    if (p == t) ++correct[static_cast<std::size_t>(t)];
  }
  r.per_class.resize(num_classes);
  double weighted = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& m = r.per_class[c];
    m.support = support[c];
    m.precision = predicted[c] ? static_cast<double>(correct[c]) / static_cast<double>(predicted[c]) : 0.0;
    m.recall = support[c] ? static_cast<double>(correct[c]) / static_cast<double>(support[c]) : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
    weighted += static_cast<double>(m.support) * m.f1;
  }
  r.weighted_f1 = weighted / static_cast<double>(truths.size());
  return r;
}

inline double weighted_f1(std::span<const int> predictions, std::span<const int> truths,
                          std::size_t num_classes = kNumTypes) {
  return evaluate(predictions, truths, num_classes).weighted_f1;
}

/// Predicted label plus confidence (the winning probability).
struct ScoredPrediction {
  int label = kAbstain;
  double confidence = 0.0;
};

struct RejectionPoint {
  double retained_fraction = 0.0;
  std::size_t retained = 0;
  double weighted_f1 = 0.0;
};

/// Points are ordered by decreasing retained fraction.
using RejectionCurve = std::vector<RejectionPoint>;

/// Keeps the ceil(f * n) most confident samples for each fraction f.
/// Confidence ties keep the original sample order.
inline RejectionCurve rejection_curve(std::span<const ScoredPrediction> scored, std::span<const int> truths,
                                      std::vector<double> fractions, std::size_t num_classes = kNumTypes) {
  if (fractions.empty()) throw Error("rejection_curve: no fractions requested");
  if (scored.size() != truths.size() || scored.empty()) throw Error("rejection_curve: bad sample count");
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scored[a].confidence > scored[b].confidence; });
  std::sort(fractions.begin(), fractions.end(), std::greater<>());
  fractions.erase(std::unique(fractions.begin(), fractions.end()), fractions.end());
  RejectionCurve curve;
  const double n = static_cast<double>(scored.size());
  std::vector<int> p, t;
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw Error("rejection_curve: fractions must lie in (0, 1]");
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(f * n - 1e-9)));
    p.clear();
    t.clear();
    for (std::size_t i = 0; i < keep; ++i) {
      p.push_back(scored[order[i]].label);
      t.push_back(truths[order[i]]);
    }
    curve.push_back({f, keep, weighted_f1(p, t, num_classes)});
  }
  return curve;
}

/// Alternative axis: keep samples whose confidence is at least each threshold.
/// Thresholds that keep nothing yield a point with retained = 0 and F1 0.
inline RejectionCurve threshold_curve(std::span<const ScoredPrediction> scored, std::span<const int> truths,
                                      std::vector<double> thresholds, std::size_t num_classes = kNumTypes) {
  if (thresholds.empty()) throw Error("threshold_curve: no thresholds requested");
  if (scored.size() != truths.size() || scored.empty()) throw Error("threshold_curve: bad sample count");
  std::sort(thresholds.begin(), thresholds.end());
  RejectionCurve curve;
  std::vector<int> p, t;
  for (double th : thresholds) {
    p.clear();
    t.clear();
    for (std::size_t i = 0; i < scored.size(); ++i)
      if (scored[i].confidence >= th) {
        p.push_back(scored[i].label);
        t.push_back(truths[i]);
      }
    const double f1 = p.empty() ? 0.0 : weighted_f1(p, t, num_classes);
    curve.push_back({static_cast<double>(p.size()) / static_cast<double>(scored.size()), p.size(), f1});
  }
  return curve;
}

struct BootstrapResult {
  double mean = 0.0;
  double lower = 0.0;  // 2.5th percentile
  double upper = 0.0;  // 97.5th percentile
};

/// Linear-interpolated percentile of sorted data, q in [0, 1].
inline double percentile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(sorted.size() - 1, lo + 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

inline BootstrapResult bootstrap_f1(std::span<const int> predictions, std::span<const int> truths,
                                    std::size_t n_iterations, std::uint64_t seed, std::size_t num_classes = kNumTypes) {
  if (n_iterations < 1) throw Error("bootstrap_f1: need at least one iteration");
  if (predictions.size() != truths.size() || truths.empty()) throw Error("bootstrap_f1: bad sample count");
  const std::size_t n = truths.size();
  std::vector<double> scores(n_iterations);
  std::vector<int> p(n), t(n);
  for (std::size_t it = 0; it < n_iterations; ++it) {
    Rng rng(derive_seed(seed, it));
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = uniform_index(rng, n);
      p[i] = predictions[j];
      t[i] = truths[j];
    }
    scores[it] = weighted_f1(p, t, num_classes);
  }
  BootstrapResult r;
  r.mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(n_iterations);
  std::sort(scores.begin(), scores.end());
  r.lower = percentile_sorted(scores, 0.025);
  r.upper = percentile_sorted(scores, 0.975);
  return r;
}

inline nlohmann::json report_to_json(const EvaluationReport& r) {
  nlohmann::json j;
  j["weighted_f1"] = r.weighted_f1;
  j["abstained"] = r.abstained;
  j["runtime_per_sample_seconds"] = r.runtime_per_sample;
  j["model_size_bytes"] = r.model_size_bytes;
  nlohmann::json classes = nlohmann::json::array();
  std::size_t total = 0;
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const auto& m = r.per_class[c];
    total += m.support;
    if (m.support == 0 && m.precision == 0.0) {
      // Classes absent from both truths and predictions carry no information.
      bool predicted = false;
      for (const auto& row : r.confusion) predicted = predicted || row[c] > 0;
      if (!predicted) continue;
    }
    classes.push_back({{"type", std::string(c < kNumTypes ? kTypeNames[c] : "")},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support}});
  }
  j["samples"] = total;
  j["per_class"] = classes;
  j["confusion"] = r.confusion;
  return j;
}

inline void write_rejection_csv(std::ostream& out, const RejectionCurve& curve) {
  out << "retained_fraction,retained,weighted_f1\n";
  for (const auto& p : curve) out << p.retained_fraction << ',' << p.retained << ',' << p.weighted_f1 << '\n';
}

}  // namespace sherlock
