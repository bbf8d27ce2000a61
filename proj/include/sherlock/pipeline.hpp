#pragma once

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sherlock/column.hpp"
#include "sherlock/corpus.hpp"
#include "sherlock/csv.hpp"
#include "sherlock/error.hpp"
#include "sherlock/feature_chars.hpp"
#include "sherlock/feature_paragraph.hpp"
#include "sherlock/feature_stats.hpp"
#include "sherlock/feature_words.hpp"

namespace sherlock {

inline constexpr std::size_t kWordDim = 50;
inline constexpr std::size_t kNumWordFeatures = kWordAggregations * kWordDim;

// Canonical layout: stats | chars | words | word flag | paragraph.
inline constexpr std::size_t kStatsOffset = 0;
inline constexpr std::size_t kCharsOffset = kStatsOffset + kNumStatsFeatures;
inline constexpr std::size_t kWordsOffset = kCharsOffset + kNumCharFeatures;
inline constexpr std::size_t kWordFlagOffset = kWordsOffset + kNumWordFeatures;
inline constexpr std::size_t kParagraphOffset = kWordFlagOffset + 1;
inline constexpr std::size_t kNumFeatures = kParagraphOffset + kParagraphDim;
static_assert(kNumFeatures == 1588);

enum class FeatureCategory { Stats, Chars, Words, WordsFlag, Paragraph };

inline constexpr std::string_view category_name(FeatureCategory c) {
  switch (c) {
    case FeatureCategory::Stats: return "stats";
    case FeatureCategory::Chars: return "chars";
    case FeatureCategory::Words: return "words";
    case FeatureCategory::WordsFlag: return "words_flag";
    case FeatureCategory::Paragraph: return "paragraph";
  }
  return "";
}

struct FeatureInfo {
  std::string name;
  FeatureCategory category;
};

/// Contiguous slice of the feature vector.
struct FeatureRange {
  std::size_t offset;
  std::size_t size;
};

/// Feature families as fed to the network branches and the ablation models.
/// The word branch includes the found flag (201 inputs).
enum class FeatureFamily { Chars, Words, Paragraph, Stats };

inline constexpr FeatureRange family_range(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::Chars: return {kCharsOffset, kNumCharFeatures};
    case FeatureFamily::Words: return {kWordsOffset, kNumWordFeatures + 1};
    case FeatureFamily::Paragraph: return {kParagraphOffset, kParagraphDim};
    case FeatureFamily::Stats: return {kStatsOffset, kNumStatsFeatures};
  }
  return {0, 0};
}

inline constexpr std::string_view family_name(FeatureFamily f) {
  switch (f) {
    case FeatureFamily::Chars: return "chars";
    case FeatureFamily::Words: return "words";
    case FeatureFamily::Paragraph: return "paragraph";
    case FeatureFamily::Stats: return "stats";
  }
  return "";
}

inline std::string char_feature_name(std::size_t roster_pos, std::size_t aggregation) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "char_%02x_%s", static_cast<unsigned>(kFirstRosterChar + roster_pos),
                std::string(kCharAggregationNames[aggregation]).c_str());
  return buf;
}

inline const std::vector<FeatureInfo>& feature_schema() {
  static const std::vector<FeatureInfo> schema = [] {
    std::vector<FeatureInfo> s;
    s.reserve(kNumFeatures);
    for (auto name : kStatsFeatureNames) s.push_back({std::string(name), FeatureCategory::Stats});
    for (std::size_t c = 0; c < kRosterSize; ++c)
      for (std::size_t a = 0; a < kCharAggregations; ++a) s.push_back({char_feature_name(c, a), FeatureCategory::Chars});
    for (const char* agg : {"mean", "mode", "median", "var"})
      for (std::size_t k = 0; k < kWordDim; ++k)
        s.push_back({std::string("word_") + agg + "_" + std::to_string(k), FeatureCategory::Words});
    s.push_back({"word_found", FeatureCategory::WordsFlag});
    for (std::size_t k = 0; k < kParagraphDim; ++k) s.push_back({"par_" + std::to_string(k), FeatureCategory::Paragraph});
    return s;
  }();
  return schema;
}

/// FNV-1a over the newline-joined feature names; stored in model files.
inline std::uint64_t schema_hash() {
  std::uint64_t h = fnv1a("sherlock-feature-schema-v1\n");
  for (const auto& f : feature_schema()) {
    h = fnv1a(f.name, h);
    h = fnv1a("\n", h);
  }
  return h;
}

using FeatureVector = std::vector<double>;

inline FeatureVector assemble_features(const Column& column, const WordVectorTable& words,
                                       const ParagraphVectorModel& paragraphs) {
  if (column.values.empty()) throw DataError("cannot extract features from an empty column");
  if (words.dimension() != kWordDim)
    throw DataError("word vectors must have dimension " + std::to_string(kWordDim) + ", got " +
                    std::to_string(words.dimension()));
  if (paragraphs.dimension() != kParagraphDim)
    throw DataError("paragraph vectors must have dimension " + std::to_string(kParagraphDim));
  FeatureVector v;
  v.reserve(kNumFeatures);
  const auto stats = extract_global_stats(column);
  v.insert(v.end(), stats.begin(), stats.end());
  const auto chars = extract_char_features(column);
  v.insert(v.end(), chars.begin(), chars.end());
  const auto word = extract_word_features(column, words);
  v.insert(v.end(), word.values.begin(), word.values.end());
  v.push_back(word.found);
  const auto par = paragraphs.infer(column);
  v.insert(v.end(), par.begin(), par.end());
  return v;
}

inline constexpr int kNoLabel = -1;

/// Row-major feature matrix with one label per row (kNoLabel if unknown).
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = kNumFeatures;
  std::vector<double> values;
  std::vector<int> labels;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }

  void append(std::span<const double> r, int label) {
    if (r.size() != cols) throw DataError("feature row has wrong width");
    values.insert(values.end(), r.begin(), r.end());
    labels.push_back(label);
    ++rows;
  }

  /// Copies columns [range.offset, range.offset + range.size).
  FeatureMatrix slice(FeatureRange range) const {
    FeatureMatrix out;
    out.cols = range.size;
    out.rows = rows;
    out.labels = labels;
    out.values.reserve(rows * range.size);
    for (std::size_t i = 0; i < rows; ++i) {
      auto r = row(i).subspan(range.offset, range.size);
      out.values.insert(out.values.end(), r.begin(), r.end());
    }
    return out;
  }
};

inline FeatureMatrix assemble_matrix(const Corpus& corpus, const WordVectorTable& words,
                                     const ParagraphVectorModel& paragraphs) {
  FeatureMatrix m;
  m.values.reserve(corpus.size() * kNumFeatures);
  for (const auto& col : corpus.columns) m.append(assemble_features(col, words, paragraphs), col.label ? col.label->id : kNoLabel);
  return m;
}

/// Per-feature training means used to fill missing slots.
class Imputer {
 public:
  Imputer() = default;
  explicit Imputer(std::vector<double> means) : means_(std::move(means)) {}

  static Imputer fit(const FeatureMatrix& train) {
    if (train.rows == 0) throw DataError("imputer: empty training matrix");
    std::vector<double> sum(train.cols, 0.0);
    std::vector<std::size_t> count(train.cols, 0);
    for (std::size_t i = 0; i < train.rows; ++i) {
      auto r = train.row(i);
      for (std::size_t j = 0; j < train.cols; ++j) {
        if (is_missing(r[j])) continue;
        sum[j] += r[j];
        ++count[j];
      }
    }
    for (std::size_t j = 0; j < train.cols; ++j) sum[j] = count[j] ? sum[j] / static_cast<double>(count[j]) : 0.0;
    return Imputer(std::move(sum));
  }

  const std::vector<double>& means() const { return means_; }

  void apply(std::span<double> v) const {
    if (v.size() != means_.size()) throw DataError("imputer: vector width does not match");
    for (std::size_t j = 0; j < v.size(); ++j)
      if (is_missing(v[j])) v[j] = means_[j];
  }

  void apply(FeatureMatrix& m) const {
    for (std::size_t i = 0; i < m.rows; ++i) apply(m.row(i));
  }

 private:
  std::vector<double> means_;
};

inline Imputer fit_imputer(const FeatureMatrix& train) { return Imputer::fit(train); }

inline FeatureVector apply_imputer(const Imputer& imputer, FeatureVector v) {
  imputer.apply(v);
  return v;
}

inline std::string format_double(double x) {
  if (is_missing(x)) return {};
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

/// CSV with a header of schema names plus "label"; missing slots are empty.
inline void write_feature_matrix(std::ostream& out, const FeatureMatrix& m) {
  if (m.cols != kNumFeatures) throw DataError("feature matrix must have the full schema width");
  std::vector<std::string> row;
  for (const auto& f : feature_schema()) row.push_back(f.name);
  row.emplace_back("label");
  csv::write_row(out, row);
  for (std::size_t i = 0; i < m.rows; ++i) {
    row.clear();
    for (double x : m.row(i)) row.push_back(format_double(x));
    row.emplace_back(m.labels[i] == kNoLabel ? std::string() : std::string(kTypeNames[static_cast<std::size_t>(m.labels[i])]));
    csv::write_row(out, row);
  }
}

inline FeatureMatrix read_feature_matrix(std::istream& in) {
  const auto rows = csv::read(in);
  if (rows.empty()) throw DataError("feature matrix file is empty");
  const auto& schema = feature_schema();
  const auto& header = rows.front();
  if (header.size() != kNumFeatures + 1 || header.back() != "label")
    throw DataError("feature matrix header does not match the feature schema");
  for (std::size_t j = 0; j < kNumFeatures; ++j)
    if (header[j] != schema[j].name) throw DataError("feature matrix column " + std::to_string(j) + " is '" + header[j] + "', expected '" + schema[j].name + "'");
  FeatureMatrix m;
  m.values.reserve((rows.size() - 1) * kNumFeatures);
  std::vector<double> r(kNumFeatures);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& fields = rows[i];
    if (fields.size() != kNumFeatures + 1) throw DataError("feature matrix row " + std::to_string(i) + " has wrong width");
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      const auto& f = fields[j];
      if (f.empty()) {
        r[j] = kMissing;
        continue;
      }
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), r[j]);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw DataError("feature matrix row " + std::to_string(i) + ": bad number '" + f + "'");
    }
    int label = kNoLabel;
    if (!fields.back().empty()) {
      auto t = type_from_name(fields.back());
      if (!t) throw DataError("feature matrix row " + std::to_string(i) + ": unknown label '" + fields.back() + "'");
      label = t->id;
    }
    m.append(r, label);
  }
  return m;
}

inline void save_feature_matrix(const std::string& path, const FeatureMatrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write feature matrix: " + path);
  write_feature_matrix(out, m);
}

inline FeatureMatrix load_feature_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature matrix: " + path);
  return read_feature_matrix(in);
}

}  // namespace sherlock
