#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "sherlock/column.hpp"
#include "sherlock/corpus.hpp"
#include "sherlock/error.hpp"
#include "sherlock/eval.hpp"
#include "sherlock/random.hpp"

namespace sherlock::matching {

/// Up to `sample_size` cell indices drawn without replacement, in draw order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t sample_size, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (sample_size >= n) return idx;
  Rng rng(seed);
  for (std::size_t i = 0; i < sample_size; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(sample_size);
  return idx;
}

/// Most-voted type; ties go to the smaller type index, no votes abstain.
inline int majority(const std::vector<std::size_t>& votes) {
  std::size_t best = 0;
  int label = kAbstain;
  for (std::size_t t = 0; t < votes.size(); ++t)
    if (votes[t] > best) {
      best = votes[t];
      label = static_cast<int>(t);
    }
  return label;
}

/// Votes cast by each type while classifying one column, and the outcome.
struct VoteResult {
  int label = kAbstain;
  std::vector<std::size_t> votes;
  std::size_t sampled = 0;
};

class DictionaryModel {
 public:
  using Entries = std::vector<std::pair<std::string, std::size_t>>;

  DictionaryModel() : per_type_(kNumTypes) {}
  explicit DictionaryModel(std::vector<Entries> per_type) : per_type_(std::move(per_type)) {
    per_type_.resize(kNumTypes);
    for (std::size_t t = 0; t < per_type_.size(); ++t)
      for (const auto& [value, count] : per_type_[t]) index_[value].push_back(static_cast<int>(t));
  }

  const std::vector<Entries>& entries() const { return per_type_; }

  std::size_t pair_count() const {
    std::size_t n = 0;
    for (const auto& e : per_type_) n += e.size();
    return n;
  }

  /// Types whose dictionary holds `value` exactly, ascending.
  const std::vector<int>* types_of(const std::string& value) const {
    auto it = index_.find(value);
    return it == index_.end() ? nullptr : &it->second;
  }

  VoteResult vote(const Column& column, std::size_t sample_size, std::uint64_t seed) const {
    VoteResult r;
    r.votes.assign(kNumTypes, 0);
    for (auto i : sample_indices(column.values.size(), sample_size, seed)) {
      ++r.sampled;
      if (const auto* types = types_of(column.values[i]))
        for (int t : *types) ++r.votes[static_cast<std::size_t>(t)];
    }
    r.label = majority(r.votes);
    return r;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t t = 0; t < per_type_.size(); ++t) {
      if (per_type_[t].empty()) continue;
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& [value, count] : per_type_[t]) arr.push_back({value, count});
      j[std::string(kTypeNames[t])] = std::move(arr);
    }
    return j;
  }

  static DictionaryModel from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("dictionary must be a JSON object");
    std::vector<Entries> per_type(kNumTypes);
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto type = type_from_name(it.key());
      if (!type) throw DataError("dictionary: unknown type '" + it.key() + "'");
      for (const auto& pair : it.value())
        per_type[static_cast<std::size_t>(type->id)].emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::size_t>());
    }
    return DictionaryModel(std::move(per_type));
  }

 private:
  std::vector<Entries> per_type_;
  std::unordered_map<std::string, std::vector<int>> index_;
};

/// Keeps each type's `k` most frequent exact cell values (ties by value).
inline DictionaryModel build_dictionary(const Corpus& train, std::size_t k = 1000) {
  std::vector<std::unordered_map<std::string, std::size_t>> counts(kNumTypes);
  for (const auto& col : train.columns) {
    if (!col.label) continue;
    auto& c = counts[static_cast<std::size_t>(col.label->id)];
    for (const auto& v : col.values) ++c[v];
  }
  std::vector<DictionaryModel::Entries> per_type(kNumTypes);
  for (std::size_t t = 0; t < kNumTypes; ++t) {
    auto& e = per_type[t];
    e.assign(counts[t].begin(), counts[t].end());
    std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (e.size() > k) e.resize(k);
  }
  return DictionaryModel(std::move(per_type));
}

inline int predict_dictionary(const DictionaryModel& dict, const Column& column, std::size_t sample_size = 1000,
                              std::uint64_t seed = 0) {
  return dict.vote(column, sample_size, seed).label;
}

/// One externally supplied pattern per type; a value must match in full.
class RegexRuleSet {
 public:
  void add(SemanticType type, const std::string& pattern) {
    try {
      rules_.push_back({type, pattern, std::regex(pattern, std::regex::ECMAScript | std::regex::optimize)});
    } catch (const std::regex_error& e) {
      throw DataError("invalid pattern for type '" + std::string(type.name()) + "': " + e.what());
    }
    std::sort(rules_.begin(), rules_.end(), [](const Rule& a, const Rule& b) { return a.type < b.type; });
  }

  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }

  bool matches(std::size_t rule, const std::string& value) const { return std::regex_match(value, rules_[rule].compiled); }

  VoteResult vote(const Column& column, std::size_t sample_size, std::uint64_t seed) const {
    VoteResult r;
    r.votes.assign(kNumTypes, 0);
    for (auto i : sample_indices(column.values.size(), sample_size, seed)) {
      ++r.sampled;
      for (const auto& rule : rules_)
        if (std::regex_match(column.values[i], rule.compiled)) ++r.votes[static_cast<std::size_t>(rule.type.id)];
    }
    r.label = majority(r.votes);
    return r;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& r : rules_) j[std::string(r.type.name())] = r.pattern;
    return j;
  }

  /// {type name: pattern}. Unknown type names and bad patterns are errors.
  static RegexRuleSet from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("regex rules must be a JSON object of {type: pattern}");
    RegexRuleSet rules;
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto type = type_from_name(it.key());
      if (!type) throw DataError("regex rules: unknown type '" + it.key() + "'");
      if (!it.value().is_string()) throw DataError("regex rules: pattern for '" + it.key() + "' is not a string");
      rules.add(*type, it.value().get<std::string>());
    }
    return rules;
  }

 private:
  struct Rule {
    SemanticType type;
    std::string pattern;
    std::regex compiled;
  };
  std::vector<Rule> rules_;
};

inline int predict_regex(const RegexRuleSet& rules, const Column& column, std::size_t sample_size = 1000,
                         std::uint64_t seed = 0) {
  return rules.vote(column, sample_size, seed).label;
}

}  // namespace sherlock::matching
