#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sherlock/column.hpp"
#include "sherlock/moments.hpp"
#include "sherlock/text.hpp"

namespace sherlock {

inline constexpr std::size_t kNumStatsFeatures = 27;

// The length-of-values block would hold both an "any" and an "all" flag;
// they are merged into a single "any value has nonzero length" flag so the
// family has 27 entries.
inline constexpr std::array<std::string_view, kNumStatsFeatures> kStatsFeatureNames = {
    "n_values",
    "entropy",
    "frac_unique",
    "frac_numcells",
    "frac_alphacells",
    "num_char_mean",
    "num_char_std",
    "alpha_char_mean",
    "alpha_char_std",
    "special_char_mean",
    "special_char_std",
    "word_count_mean",
    "word_count_std",
    "none_fraction",
    "none_count",
    "none_only",
    "none_has",
    "length_mean",
    "length_std",
    "length_sum",
    "length_min",
    "length_max",
    "length_median",
    "length_mode",
    "length_kurtosis",
    "length_skewness",
    "length_any_nonzero",
};

using GlobalStatsVector = std::array<double, kNumStatsFeatures>;

/// Character classes of one cell, counted per code point.
struct CellProfile {
  double digits = 0;
  double letters = 0;
  double special = 0;
  double words = 0;
  double length = 0;
};

inline CellProfile profile_cell(std::string_view value) {
  CellProfile p;
  bool in_word = false;
  for (char c : value) {
    if (!is_utf8_lead(c)) continue;
    p.length += 1;
    if (is_ascii_space(c)) {
      in_word = false;
      continue;
    }
    if (!in_word) p.words += 1;
    in_word = true;
    if (is_ascii_digit(c))
      p.digits += 1;
    else if (is_ascii_alpha(c))
      p.letters += 1;
    else
      p.special += 1;
  }
  return p;
}

inline GlobalStatsVector extract_global_stats(const Column& column) {
  const auto& values = column.values;
  const std::size_t n = values.size();
  const double dn = static_cast<double>(n);
  GlobalStatsVector f{};
  if (n == 0) return f;

  std::unordered_map<std::string_view, std::size_t> freq;
  freq.reserve(n);
  for (const auto& v : values) ++freq[v];

  double entropy = 0.0;
  std::size_t singletons = 0;
  for (const auto& [value, count] : freq) {
    const double p = static_cast<double>(count) / dn;
    entropy -= p * std::log(p);
    if (count == 1) ++singletons;
  }

  std::vector<double> digits(n), letters(n), special(n), words(n), lengths(n);
  std::size_t with_digit = 0, with_alpha = 0, nones = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const CellProfile p = profile_cell(values[i]);
    digits[i] = p.digits;
    letters[i] = p.letters;
    special[i] = p.special;
    words[i] = p.words;
    lengths[i] = p.length;
    if (p.digits > 0) ++with_digit;
    if (p.letters > 0) ++with_alpha;
    if (is_none_value(values[i])) ++nones;
  }

  const Moments md = compute_moments(digits);
  const Moments ma = compute_moments(letters);
  const Moments ms = compute_moments(special);
  const Moments mw = compute_moments(words);
  const Moments ml = compute_moments(lengths);

  double len_sum = 0.0, len_min = lengths[0], len_max = lengths[0];
  for (double l : lengths) {
    len_sum += l;
    len_min = std::min(len_min, l);
    len_max = std::max(len_max, l);
  }

  std::size_t k = 0;
  f[k++] = dn;
  f[k++] = entropy;
  f[k++] = static_cast<double>(singletons) / dn;
  f[k++] = static_cast<double>(with_digit) / dn;
  f[k++] = static_cast<double>(with_alpha) / dn;
  f[k++] = md.mean;
  f[k++] = std::sqrt(md.variance);
  f[k++] = ma.mean;
  f[k++] = std::sqrt(ma.variance);
  f[k++] = ms.mean;
  f[k++] = std::sqrt(ms.variance);
  f[k++] = mw.mean;
  f[k++] = std::sqrt(mw.variance);
  f[k++] = static_cast<double>(nones) / dn;
  f[k++] = static_cast<double>(nones);
  f[k++] = nones == n ? 1.0 : 0.0;
  f[k++] = nones > 0 ? 1.0 : 0.0;
  f[k++] = ml.mean;
  f[k++] = std::sqrt(ml.variance);
  f[k++] = len_sum;
  f[k++] = len_min;
  f[k++] = len_max;
  f[k++] = median_of(lengths);
  f[k++] = mode_of(lengths);
  f[k++] = ml.kurtosis;
  f[k++] = ml.skewness;
  f[k++] = len_max > 0 ? 1.0 : 0.0;
  return f;
}

}  // namespace sherlock
