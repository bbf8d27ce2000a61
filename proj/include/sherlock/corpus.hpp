#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "sherlock/column.hpp"
#include "sherlock/error.hpp"
#include "sherlock/feature_words.hpp"
#include "sherlock/random.hpp"
#include "sherlock/semantic_types.hpp"

namespace sherlock {

using TypeCounts = std::array<std::size_t, kNumTypes>;

struct Corpus {
  std::vector<Column> columns;

  TypeCounts per_type_counts() const {
    TypeCounts counts{};
    for (const auto& c : columns)
      if (c.label) ++counts[static_cast<std::size_t>(c.label->id)];
    return counts;
  }
  std::size_t size() const { return columns.size(); }
};

/// Parses the JSON Lines corpus format. Each line holds "values" plus either
/// "label" or "header"; both go through normalize_header. Lines whose type
/// cannot be resolved are dropped and counted in `dropped`.
inline Corpus read_corpus(std::istream& in, std::size_t* dropped = nullptr) {
  Corpus corpus;
  std::size_t skipped = 0, line_no = 0, non_blank = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++non_blank;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("corpus line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("values") || !obj["values"].is_array()) {
      throw DataError("corpus line " + std::to_string(line_no) + ": missing \"values\" array");
    }
    Column col;
    for (const auto& v : obj["values"]) {
      if (!v.is_string()) throw DataError("corpus line " + std::to_string(line_no) + ": non-string value");
      col.values.push_back(v.get<std::string>());
    }
    if (obj.contains("header") && obj["header"].is_string()) col.source_header = obj["header"].get<std::string>();
    if (obj.contains("label") && obj["label"].is_string()) {
      col.label = type_from_name(obj["label"].get<std::string>());
    } else if (col.source_header) {
      col.label = normalize_header(*col.source_header);
    }
    if (!col.label || col.values.empty()) {
      ++skipped;
      continue;
    }
    corpus.columns.push_back(std::move(col));
  }
  if (non_blank == 0) throw DataError("corpus file is empty");
  if (dropped) *dropped = skipped;
  return corpus;
}

inline Corpus load_corpus(const std::string& path, std::size_t* dropped = nullptr) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  return read_corpus(in, dropped);
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& col : corpus.columns) {
    nlohmann::json obj;
    if (col.label) obj["label"] = std::string(col.label->name());
    if (col.source_header) obj["header"] = *col.source_header;
    obj["values"] = col.values;
    out << obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

inline void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  write_corpus(out, corpus);
}

/// True if some cell has a token present in the vocabulary.
inline bool has_vocab_token(const Column& column, const WordVectorTable& vocab) {
  for (const auto& value : column.values)
    for (const auto& token : word_tokens(value))
      if (vocab.contains(token)) return true;
  return false;
}

struct FilterOptions {
  std::size_t cap = 15000;
  std::size_t min_count = 1000;
  // A type is dropped when at least this fraction of its columns has no vocabulary token.
  double coverage_threshold = 0.15;
  std::uint64_t seed = 0;
};

/// Caps each type at `cap` columns (uniform, seeded), drops types with fewer
/// than `min_count` columns, then drops types failing the vocabulary
/// coverage rule. Surviving columns keep their relative order, so a second
/// application with the same options is a no-op.
inline Corpus filter_corpus(const Corpus& corpus, const FilterOptions& opt, const WordVectorTable& vocab) {
  if (opt.min_count < 1 || opt.cap < opt.min_count) throw Error("filter_corpus: need cap >= min_count >= 1");
  if (!(opt.coverage_threshold >= 0.0 && opt.coverage_threshold <= 1.0))
    throw Error("filter_corpus: coverage threshold must lie in [0, 1]");

  std::array<std::vector<std::size_t>, kNumTypes> by_type;
  for (std::size_t i = 0; i < corpus.columns.size(); ++i)
    if (const auto& l = corpus.columns[i].label) by_type[static_cast<std::size_t>(l->id)].push_back(i);

  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < kNumTypes; ++t) {
    auto& idx = by_type[t];
    if (idx.size() > opt.cap) {
      Rng rng(derive_seed(opt.seed, t));
      shuffle(idx.begin(), idx.end(), rng);
      idx.resize(opt.cap);
      std::sort(idx.begin(), idx.end());
    }
    if (idx.empty() || idx.size() < opt.min_count) continue;
    std::size_t uncovered = 0;
    for (auto i : idx)
      if (!has_vocab_token(corpus.columns[i], vocab)) ++uncovered;
    if (static_cast<double>(uncovered) >= opt.coverage_threshold * static_cast<double>(idx.size()) && uncovered > 0)
      continue;
    keep.insert(keep.end(), idx.begin(), idx.end());
  }
  std::sort(keep.begin(), keep.end());
  if (keep.empty()) throw DataError("filter_corpus: no columns survive filtering");
  Corpus out;
  out.columns.reserve(keep.size());
  for (auto i : keep) out.columns.push_back(corpus.columns[i]);
  return out;
}

struct SplitSpec {
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
  std::uint64_t seed = 0;
};

struct CorpusSplit {
  Corpus train, val, test;
};

/// Per-type stratified shuffle split. Part sizes are rounded per type, the
/// test part takes the remainder.
inline CorpusSplit split(const Corpus& corpus, const SplitSpec& spec) {
  double total = 0.0;
  for (double r : spec.ratios) {
    if (r < 0.0) throw Error("split: negative ratio");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("split: ratios must sum to 1");

  std::array<std::vector<std::size_t>, kNumTypes> by_type;
  for (std::size_t i = 0; i < corpus.columns.size(); ++i) {
    const auto& l = corpus.columns[i].label;
    if (!l) throw DataError("split: unlabeled column");
    by_type[static_cast<std::size_t>(l->id)].push_back(i);
  }
  std::array<std::vector<std::size_t>, 3> parts;
  for (std::size_t t = 0; t < kNumTypes; ++t) {
    auto& idx = by_type[t];
    if (idx.empty()) continue;
    if (idx.size() < 5)
      throw DataError("split: type '" + std::string(kTypeNames[t]) + "' has fewer than 5 columns");
    Rng rng(derive_seed(spec.seed, t));
    shuffle(idx.begin(), idx.end(), rng);
    const double n = static_cast<double>(idx.size());
    const auto n_train = static_cast<std::size_t>(std::llround(spec.ratios[0] * n));
    const auto n_val = std::min(idx.size() - n_train, static_cast<std::size_t>(std::llround(spec.ratios[1] * n)));
    parts[0].insert(parts[0].end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    parts[1].insert(parts[1].end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                    idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    parts[2].insert(parts[2].end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
  }
  CorpusSplit out;
  Corpus* targets[3] = {&out.train, &out.val, &out.test};
  for (int p = 0; p < 3; ++p) {
    std::sort(parts[p].begin(), parts[p].end());
    for (auto i : parts[p]) targets[p]->columns.push_back(corpus.columns[i]);
  }
  return out;
}

}  // namespace sherlock
