#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "sherlock/text.hpp"

namespace sherlock {

inline constexpr std::size_t kNumTypes = 78;

// Alphabetical, lowercase, words separated by a single space.
inline constexpr std::array<std::string_view, kNumTypes> kTypeNames = {
    "address",      "affiliate",   "affiliation", "age",          "album",      "area",
    "artist",       "birth date",  "birth place", "brand",        "capacity",   "category",
    "city",         "class",       "classification", "club",      "code",       "collection",
    "command",      "company",     "component",   "continent",    "country",    "county",
    "creator",      "credit",      "currency",    "day",          "depth",      "description",
    "director",     "duration",    "education",   "elevation",    "family",     "file size",
    "format",       "gender",      "genre",       "grades",       "industry",   "isbn",
    "jockey",       "language",    "location",    "manufacturer", "name",       "nationality",
    "notes",        "operator",    "order",       "organisation", "origin",     "owner",
    "person",       "plays",       "position",    "product",      "publisher",  "range",
    "rank",         "ranking",     "region",      "religion",     "requirement", "result",
    "sales",        "service",     "sex",         "species",      "state",      "status",
    "symbol",       "team",        "team name",   "type",         "weight",     "year",
};

/// Index into kTypeNames. Kept as a thin wrapper so labels cannot be mixed up
/// with other integers (feature indices, counts) by accident.
struct SemanticType {
  int id = 0;

  constexpr std::string_view name() const { return kTypeNames[static_cast<std::size_t>(id)]; }
  friend constexpr bool operator==(SemanticType, SemanticType) = default;
  friend constexpr auto operator<=>(SemanticType, SemanticType) = default;
};

namespace detail {

// Lowercase, with spaces, underscores and hyphens removed.
inline std::string squash_header(std::string_view header) {
  std::string out;
  out.reserve(header.size());
  for (char c : header) {
    if (c == ' ' || c == '_' || c == '-' || c == '\t') continue;
    out.push_back(ascii_lower(c));
  }
  return out;
}

inline const std::unordered_map<std::string, int>& squashed_type_index() {
  static const std::unordered_map<std::string, int> index = [] {
    std::unordered_map<std::string, int> m;
    for (std::size_t i = 0; i < kNumTypes; ++i) m.emplace(squash_header(kTypeNames[i]), static_cast<int>(i));
    return m;
  }();
  return index;
}

}  // namespace detail

/// Maps a raw column header onto the type vocabulary. "NAME", "Name" and
/// "name" all match name; "birthDate", "birth_date" and "Birth Date"
/// all match "birth date". CamelCase humps need no special
/// handling because case is folded after separators are dropped.
inline std::optional<SemanticType> normalize_header(std::string_view header) {
  const auto& index = detail::squashed_type_index();
  auto it = index.find(detail::squash_header(trim(header)));
  if (it == index.end()) return std::nullopt;
  return SemanticType{it->second};
}

/// Exact canonical-name lookup, falling back to header normalization.
inline std::optional<SemanticType> type_from_name(std::string_view name) { return normalize_header(name); }

}  // namespace sherlock
