#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sherlock {

inline constexpr char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline constexpr bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}
inline constexpr bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline constexpr bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline constexpr bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}
// Leading byte of a UTF-8 sequence (or a plain ASCII byte).
inline constexpr bool is_utf8_lead(char c) { return (static_cast<unsigned char>(c) & 0xC0u) != 0x80u; }

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ascii_lower(c);
  return out;
}

/// Whitespace-split, punctuation-stripped (leading/trailing), lowercased
/// tokens of one cell. Tokens that are pure punctuation vanish.
inline std::vector<std::string> word_tokens(std::string_view value) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < value.size()) {
    while (i < value.size() && is_ascii_space(value[i])) ++i;
    std::size_t j = i;
    while (j < value.size() && !is_ascii_space(value[j])) ++j;
    std::string_view word = value.substr(i, j - i);
    while (!word.empty() && is_ascii_punct(word.front())) word.remove_prefix(1);
    while (!word.empty() && is_ascii_punct(word.back())) word.remove_suffix(1);
    if (!word.empty()) tokens.push_back(to_lower(word));
    i = j;
  }
  return tokens;
}

/// Cells treated as missing: "", "none", "null", "n/a", "na", "-"
/// (after trimming and case folding).
inline bool is_none_value(std::string_view value) {
  const std::string v = to_lower(trim(value));
  return v.empty() || v == "none" || v == "null" || v == "n/a" || v == "na" || v == "-";
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace sherlock
