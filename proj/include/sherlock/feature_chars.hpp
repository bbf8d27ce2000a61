#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sherlock/column.hpp"
#include "sherlock/moments.hpp"

namespace sherlock {

// Codepoints 32 (space) through 127 (DEL).
inline constexpr int kFirstRosterChar = 32;
inline constexpr std::size_t kRosterSize = 96;
inline constexpr std::size_t kCharAggregations = 10;
inline constexpr std::size_t kNumCharFeatures = kRosterSize * kCharAggregations;

inline constexpr std::array<std::string_view, kCharAggregations> kCharAggregationNames = {
    "any", "all", "mean", "var", "min", "max", "median", "sum", "kurtosis", "skewness",
};

using CharDistVector = std::array<double, kNumCharFeatures>;

/// Slot of (roster character, aggregation); character-major.
inline constexpr std::size_t char_feature_index(char c, std::size_t aggregation) {
  return static_cast<std::size_t>(static_cast<unsigned char>(c) - kFirstRosterChar) * kCharAggregations + aggregation;
}

inline CharDistVector extract_char_features(const Column& column) {
  const std::size_t n = column.values.size();
  // counts[c * n + i]: occurrences of roster char c in value i.
  std::vector<double> counts(kRosterSize * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (char ch : column.values[i]) {
      const auto u = static_cast<unsigned char>(ch);
      if (u >= kFirstRosterChar && u < kFirstRosterChar + kRosterSize) counts[(u - kFirstRosterChar) * n + i] += 1.0;
    }
  }

  CharDistVector out{};
  if (n == 0) return out;
  std::vector<double> xs(n);
  for (std::size_t c = 0; c < kRosterSize; ++c) {
    const double* row = counts.data() + c * n;
    double sum = 0.0, lo = row[0], hi = row[0];
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += row[i];
      lo = std::min(lo, row[i]);
      hi = std::max(hi, row[i]);
      if (row[i] > 0) ++nonzero;
    }
    double* slot = out.data() + c * kCharAggregations;
    if (nonzero == 0) continue;  // every aggregation of an absent character is 0
    xs.assign(row, row + n);
    const Moments m = compute_moments(xs);
    slot[0] = 1.0;
    slot[1] = nonzero == n ? 1.0 : 0.0;
    slot[2] = m.mean;
    slot[3] = m.variance;
    slot[4] = lo;
    slot[5] = hi;
    slot[6] = median_of(xs);
    slot[7] = sum;
    slot[8] = m.kurtosis;
    slot[9] = m.skewness;
  }
  return out;
}

}  // namespace sherlock
