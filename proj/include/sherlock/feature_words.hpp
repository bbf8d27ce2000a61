#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sherlock/column.hpp"
#include "sherlock/error.hpp"
#include "sherlock/moments.hpp"
#include "sherlock/text.hpp"

namespace sherlock {

/// Placeholder for a feature that could not be computed; replaced by the
/// imputer before a vector reaches any model.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double x) { return std::isnan(x); }

/// Pretrained token embeddings (GloVe text format). Rows are stored flat.
class WordVectorTable {
 public:
  WordVectorTable() = default;
  explicit WordVectorTable(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return index_.size(); }
  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }

  /// Returns false (and leaves the table unchanged) if the token already exists.
  bool insert(std::string_view token, std::span<const double> vec) {
    if (vec.size() != dimension_) throw DataError("word vector has wrong dimension");
    auto [it, fresh] = index_.emplace(to_lower(token), index_.size());
    if (!fresh) return false;
    tokens_.push_back(it->first);
    data_.insert(data_.end(), vec.begin(), vec.end());
    return true;
  }

  /// Tokens in insertion order.
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Empty span when the token is unknown. Lookup is by the case-folded token.
  std::span<const double> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return {};
    return {data_.data() + it->second * dimension_, dimension_};
  }

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> tokens_;
  std::vector<double> data_;
};

/// Parses "token f1 f2 ... fd" lines. The first non-empty line fixes d.
inline WordVectorTable read_word_vectors(std::istream& in) {
  WordVectorTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_dim = false;
  std::vector<double> vec;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    if (rest.empty()) continue;
    const auto space = rest.find(' ');
    if (space == std::string_view::npos) throw DataError("word vectors line " + std::to_string(line_no) + ": no vector components");
    const std::string_view token = rest.substr(0, space);
    rest.remove_prefix(space);
    vec.clear();
    while (true) {
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      if (rest.empty()) break;
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), x);
      if (ec != std::errc() || (ptr != rest.data() + rest.size() && *ptr != ' ')) {
        throw DataError("word vectors line " + std::to_string(line_no) + ": unparseable number");
      }
      vec.push_back(x);
      rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
    }
    if (!have_dim) {
      table = WordVectorTable(vec.size());
      have_dim = true;
    } else if (vec.size() != table.dimension()) {
      throw DataError("word vectors line " + std::to_string(line_no) + ": expected " + std::to_string(table.dimension()) +
                      " components, found " + std::to_string(vec.size()));
    }
    table.insert(token, vec);
  }
  if (!have_dim) throw DataError("word vector file is empty");
  return table;
}

inline WordVectorTable load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word vector file: " + path);
  return read_word_vectors(in);
}

/// Inverse of read_word_vectors; values use the shortest round-trip form.
inline void write_word_vectors(std::ostream& out, const WordVectorTable& table) {
  char buf[32];
  for (const auto& t : table.tokens()) {
    out << t;
    for (double x : table.find(t)) {
      const auto r = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf));
    }
    out << '\n';
  }
}

inline void save_word_vectors(const std::string& path, const WordVectorTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write word vector file: " + path);
  write_word_vectors(out, table);
}

/// Componentwise mean, mode, median and variance of the per-value vectors
/// (aggregation-major), plus a found/not-found flag.
struct WordEmbeddingFeatures {
  std::vector<double> values;
  double found = 0.0;
};

inline constexpr std::size_t kWordAggregations = 4;

/// Mean of the distinct in-vocabulary token vectors of one cell; empty if
/// no token is known.
inline std::vector<double> value_word_vector(std::string_view value, const WordVectorTable& table) {
  std::vector<double> acc;
  std::unordered_set<std::string> seen;
  std::size_t found = 0;
  for (auto& token : word_tokens(value)) {
    if (!seen.insert(token).second) continue;
    auto vec = table.find(token);
    if (vec.empty()) continue;
    if (acc.empty()) acc.assign(table.dimension(), 0.0);
    for (std::size_t k = 0; k < vec.size(); ++k) acc[k] += vec[k];
    ++found;
  }
  for (double& x : acc) x /= static_cast<double>(found);
  return acc;
}

inline WordEmbeddingFeatures extract_word_features(const Column& column, const WordVectorTable& table) {
  const std::size_t dim = table.dimension();
  std::vector<std::vector<double>> vectors;
  for (const auto& value : column.values) {
    auto vec = value_word_vector(value, table);
    if (!vec.empty()) vectors.push_back(std::move(vec));
  }
  WordEmbeddingFeatures out;
  if (vectors.empty()) {
    out.values.assign(kWordAggregations * dim, kMissing);
    out.found = 0.0;
    return out;
  }
  out.values.resize(kWordAggregations * dim);
  out.found = 1.0;
  std::vector<double> component(vectors.size());
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < vectors.size(); ++i) component[i] = vectors[i][k];
    const Moments m = compute_moments(component);
    out.values[k] = m.mean;
    out.values[dim + k] = mode_of(component);
    out.values[2 * dim + k] = median_of(component);
    out.values[3 * dim + k] = m.variance;
  }
  return out;
}

}  // namespace sherlock
