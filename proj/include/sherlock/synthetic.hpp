#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sherlock/corpus.hpp"
#include "sherlock/feature_words.hpp"
#include "sherlock/random.hpp"

// Generator for a small labeled corpus with eight semantic types, dirty
// cells and cross-type contamination, plus a matching toy embedding table.
// Used by the end-to-end tests and by `sherlock synth` for demos.
namespace sherlock::synthetic {

namespace words {

inline constexpr std::array<std::string_view, 48> kFirstNames = {
    "James",  "Mary",    "John",   "Patricia", "Robert",  "Jennifer", "Michael", "Linda",  "William", "Elizabeth",
    "David",  "Barbara", "Joseph", "Susan",    "Thomas",  "Jessica",  "Charles", "Sarah",  "Daniel",  "Karen",
    "Matthew", "Nancy",  "Anthony", "Lisa",    "Mark",    "Betty",    "Paul",    "Sandra", "Steven",  "Ashley",
    "Andrew", "Emily",   "Joshua", "Donna",    "Kenneth", "Michelle", "Kevin",   "Carol",  "Brian",   "Amanda",
    "George", "Melissa", "Edward", "Deborah",  "Ronald",  "Laura",    "Timothy", "Rebecca",
};

inline constexpr std::array<std::string_view, 48> kLastNames = {
    "Smith",   "Johnson", "Williams", "Brown",    "Jones",    "Garcia",  "Miller",  "Davis",    "Rodriguez", "Martinez",
    "Wilson",  "Anderson", "Taylor",  "Thomas",   "Moore",    "Martin",  "Lee",     "Thompson", "White",     "Harris",
    "Clark",   "Lewis",   "Robinson", "Walker",   "Young",    "Allen",   "King",    "Wright",   "Scott",     "Green",
    "Baker",   "Adams",   "Nelson",   "Hill",     "Campbell", "Mitchell", "Roberts", "Carter",  "Phillips",  "Evans",
    "Turner",  "Parker",  "Collins",  "Edwards",  "Stewart",  "Morris",  "Jackson", "Lincoln",
};

inline constexpr std::array<std::string_view, 48> kCities = {
    "Paris",     "London",      "Berlin",   "Madrid",       "Rome",          "Vienna",    "Prague",   "Lisbon",
    "Dublin",    "Amsterdam",   "Brussels", "Oslo",         "Stockholm",     "Helsinki",  "Warsaw",   "Budapest",
    "Athens",    "Istanbul",    "Moscow",   "Cairo",        "Nairobi",       "Lagos",     "Tokyo",    "Osaka",
    "Seoul",     "Beijing",     "Shanghai", "Mumbai",       "Delhi",         "Bangkok",   "Jakarta",  "Manila",
    "Sydney",    "Melbourne",   "Toronto",  "Montreal",     "Vancouver",     "Chicago",   "Boston",   "Houston",
    "Denver",    "Seattle",     "Phoenix",  "New York",     "Los Angeles",   "San Francisco", "Rio de Janeiro", "Buenos Aires",
};

inline constexpr std::array<std::string_view, 96> kProse = {
    "the",     "a",        "of",       "and",      "to",       "in",      "is",       "for",     "with",    "on",
    "this",    "that",     "by",       "from",     "an",       "are",     "it",       "as",      "at",      "be",
    "product", "service",  "quality",  "design",   "system",   "data",    "report",   "project", "team",    "customer",
    "new",     "high",     "large",    "small",    "simple",   "modern",  "classic",  "durable", "light",   "premium",
    "provides", "includes", "offers",  "supports", "features", "delivers", "improves", "helps",  "allows",  "makes",
    "easy",    "fast",     "reliable", "flexible", "secure",   "complete", "annual",  "local",   "global",  "daily",
    "water",   "energy",   "health",   "market",   "research", "support", "access",   "content", "network", "program",
    "users",   "families", "students", "people",   "staff",    "members", "visitors", "clients", "partners", "experts",
    "built",   "designed", "made",     "tested",   "used",     "known",   "based",    "focused", "located", "managed",
    "room",    "space",    "area",     "level",    "range",    "value",
};

inline constexpr std::array<std::string_view, 20> kGrades = {
    "K", "PK", "1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12", "K-5", "K-8", "6-8", "9-12", "K-12", "Pre-K",
};

inline constexpr std::array<std::string_view, 14> kBooleans = {
    "true", "false", "yes", "no", "Y", "N", "TRUE", "FALSE", "True", "False", "Yes", "No", "T", "F",
};

inline constexpr std::array<std::string_view, 9> kDirty = {
    "", "N/A", "null", "-", "?", "unknown", "#REF!", "none", "NaN",
};

}  // namespace words

enum class Kind { Year, Isbn, Name, Grades, Price, City, Boolean, FreeText };
inline constexpr std::size_t kNumKinds = 8;

/// Vocabulary type each synthetic kind is labeled with.
inline SemanticType label_of(Kind k) {
  static constexpr std::array<std::string_view, kNumKinds> names = {
      "year", "isbn", "name", "grades", "sales", "city", "status", "description"};
  return *normalize_header(names[static_cast<std::size_t>(k)]);
}

inline std::vector<SemanticType> labels() {
  std::vector<SemanticType> out;
  for (std::size_t k = 0; k < kNumKinds; ++k) out.push_back(label_of(static_cast<Kind>(k)));
  return out;
}

namespace detail {

template <class Array>
std::string_view pick(const Array& a, Rng& rng) {
  return a[static_cast<std::size_t>(uniform_index(rng, a.size()))];
}

inline std::string digits(Rng& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('0' + uniform_index(rng, 10)));
  return s;
}

inline std::string with_thousands(std::uint64_t v) {
  std::string raw = std::to_string(v), out;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (i && (raw.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(raw[i]);
  }
  return out;
}

inline std::string value_of(Kind kind, Rng& rng) {
  switch (kind) {
    case Kind::Year:
      return std::to_string(1900 + uniform_index(rng, 124));
    case Kind::Isbn: {
      const auto style = uniform_index(rng, 3);
      if (style == 0) return "978-" + digits(rng, 1) + "-" + digits(rng, 3) + "-" + digits(rng, 5) + "-" + digits(rng, 1);
      if (style == 1) return "978" + digits(rng, 10);
      return digits(rng, 1) + "-" + digits(rng, 4) + "-" + digits(rng, 4) + "-" + (uniform_index(rng, 10) ? digits(rng, 1) : "X");
    }
    case Kind::Name: {
      const auto first = pick(words::kFirstNames, rng), last = pick(words::kLastNames, rng);
      if (uniform_index(rng, 10) == 0) return std::string(last) + ", " + std::string(first);
      return std::string(first) + " " + std::string(last);
    }
    case Kind::Grades:
      return std::string(pick(words::kGrades, rng));
    case Kind::Price: {
      const auto dollars = uniform_index(rng, 3) == 0 ? uniform_index(rng, 100000) : uniform_index(rng, 500);
      std::string s = uniform_index(rng, 4) ? "$" : "";
      s += with_thousands(dollars);
      if (uniform_index(rng, 3)) s += "." + digits(rng, 2);
      return s;
    }
    case Kind::City: {
      std::string c(pick(words::kCities, rng));
      if (uniform_index(rng, 15) == 0)
        for (char& ch : c) ch = static_cast<char>(ch >= 'a' && ch <= 'z' ? ch - 'a' + 'A' : ch);
      return c;
    }
    case Kind::Boolean:
      return std::string(pick(words::kBooleans, rng));
    case Kind::FreeText: {
      const auto n = 4 + uniform_index(rng, 11);
      std::string s;
      for (std::uint64_t i = 0; i < n; ++i) {
        if (i) s.push_back(' ');
        s += pick(words::kProse, rng);
      }
      s[0] = static_cast<char>(s[0] >= 'a' && s[0] <= 'z' ? s[0] - 'a' + 'A' : s[0]);
      s.push_back('.');
      return s;
    }
  }
  return {};
}

inline std::string dirty_value(Rng& rng) {
  if (uniform_index(rng, 4) == 0) {
    std::string junk;
    const auto n = 1 + uniform_index(rng, 8);
    for (std::uint64_t i = 0; i < n; ++i) junk.push_back(static_cast<char>(33 + uniform_index(rng, 94)));
    return junk;
  }
  return std::string(pick(words::kDirty, rng));
}

}  // namespace detail

struct Options {
  std::size_t columns_per_type = 600;
  std::size_t min_values = 5;
  std::size_t max_values = 40;
  // Fraction of cells replaced by junk / missing markers.
  double dirty_fraction = 0.10;
  // Fraction of cells drawn from one other (per-column) type.
  double overlap_fraction = 0.20;
  std::uint64_t seed = 0;
};

/// One column of the given kind.
inline Column make_column(Kind kind, const Options& opt, Rng& rng) {
  Column col;
  col.label = label_of(kind);
  const auto n = opt.min_values + uniform_index(rng, opt.max_values - opt.min_values + 1);
  auto other = static_cast<Kind>(uniform_index(rng, kNumKinds - 1));
  if (other >= kind) other = static_cast<Kind>(static_cast<std::size_t>(other) + 1);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    if (u < opt.dirty_fraction)
      col.values.push_back(detail::dirty_value(rng));
    else if (u < opt.dirty_fraction + opt.overlap_fraction)
      col.values.push_back(detail::value_of(other, rng));
    else
      col.values.push_back(detail::value_of(kind, rng));
  }
  return col;
}

/// Columns are interleaved by kind: column i has kind i % 8.
inline Corpus make_corpus(const Options& opt) {
  if (opt.min_values == 0 || opt.max_values < opt.min_values) throw Error("synthetic: bad column length range");
  Rng rng(opt.seed);
  Corpus c;
  for (std::size_t i = 0; i < opt.columns_per_type; ++i)
    for (std::size_t k = 0; k < kNumKinds; ++k) c.columns.push_back(make_column(static_cast<Kind>(k), opt, rng));
  return c;
}

/// 50-d toy embeddings: one Gaussian cluster per word category (first
/// names, surnames, city words, prose, numbers, yes/no words, missing markers).
inline WordVectorTable make_word_vectors(std::uint64_t seed = 0, std::size_t dim = 50) {
  Rng rng(derive_seed(seed, 0xE3B));
  auto gauss = [&rng] {
    // Box-Muller on the portable uniform source.
    const double u1 = std::max(uniform01(rng), 1e-300), u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  };
  WordVectorTable table(dim);
  std::vector<double> center(dim), v(dim);
  auto category = [&](const std::vector<std::string>& tokens) {
    for (double& c : center) c = gauss();
    for (const auto& t : tokens) {
      for (std::size_t k = 0; k < dim; ++k) v[k] = center[k] + 0.5 * gauss();
      table.insert(t, v);
    }
  };
  auto tokens_of = [](auto const& list) {
    std::vector<std::string> out;
    for (auto w : list)
      for (auto& t : word_tokens(w)) out.push_back(t);
    return out;
  };
  category(tokens_of(words::kFirstNames));
  category(tokens_of(words::kLastNames));
  category(tokens_of(words::kCities));
  category(tokens_of(words::kProse));
  std::vector<std::string> numbers;
  for (int i = 0; i <= 2030; ++i) numbers.push_back(std::to_string(i));
  category(numbers);
  category(tokens_of(words::kBooleans));
  category({"none", "null", "unknown", "nan", "n/a"});
  return table;
}

/// Hand-written full-match patterns for the eight synthetic kinds.
inline nlohmann::json regex_rules() {
  return {
      {"year", "[12][0-9]{3}"},
      {"isbn", "(97[89]-?)?[0-9]{1,5}-?[0-9]{1,7}-?[0-9]{1,7}-?[0-9Xx]"},
      {"name", "[A-Z][a-z]+,? [A-Z][a-z]+"},
      {"grades", "(PK|K|Pre-K|[0-9]{1,2})(-[0-9]{1,2})?"},
      {"sales", "\\$?[0-9]{1,3}(,[0-9]{3})*(\\.[0-9]{2})?"},
      {"city", "[A-Z][a-z]+( [a-z]+)?( [A-Z][a-z]+)?|[A-Z ]+"},
      {"status", "true|false|yes|no|Yes|No|TRUE|FALSE|True|False|[YNTF]"},
      {"description", "[A-Z][a-z]*( [a-z]+){3,}\\."},
  };
}

}  // namespace sherlock::synthetic
