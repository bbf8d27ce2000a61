#pragma once

// Deliberately naive reference implementations used to cross-check the
// library. Nothing here calls into the library's feature code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Values = std::vector<std::string>;

inline bool space(unsigned char c) { return c == ' ' || (c >= 9 && c <= 13); }

// Unicode scalar values of a UTF-8 string, one entry per code point
// (continuation bytes are folded into their lead).
inline std::vector<unsigned> code_points(const std::string& s) {
  std::vector<unsigned> out;
  for (unsigned char c : s) {
    if (c >= 0x80 && c < 0xC0) continue;
    out.push_back(c);
  }
  return out;
}

struct Moments {
  long double mean = 0, var = 0, skew = 0, kurt = 0;
};

inline Moments moments(const std::vector<long double>& x) {
  Moments m;
  const long double n = static_cast<long double>(x.size());
  for (auto v : x) m.mean += v;
  m.mean /= n;
  long double m2 = 0, m3 = 0, m4 = 0;
  for (auto v : x) {
    const long double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.var = m2;
  if (m2 > 0) {
    m.skew = m3 / std::pow(m2, 1.5L);
    m.kurt = m4 / (m2 * m2) - 3;
  }
  return m;
}

inline long double median(std::vector<long double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : (x[n / 2 - 1] + x[n / 2]) / 2;
}

inline long double mode(const std::vector<long double>& x) {
  std::map<long double, int> c;
  for (auto v : x) ++c[v];
  long double best = 0;
  int count = 0;
  for (auto [v, k] : c)
    if (k > count) {
      best = v;
      count = k;
    }
  return best;
}

inline std::string fold(std::string s) {
  std::size_t b = 0, e = s.size();
  while (b < e && space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && space(static_cast<unsigned char>(s[e - 1]))) --e;
  s = s.substr(b, e - b);
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool none_like(const std::string& v) {
  static const std::set<std::string> roster = {"", "none", "null", "n/a", "na", "-"};
  return roster.count(fold(v)) > 0;
}

/// The 27 global statistics, in schema order.
inline std::vector<double> global_stats(const Values& values) {
  const std::size_t n = values.size();
  std::map<std::string, int> freq;
  for (const auto& v : values) ++freq[v];
  long double entropy = 0;
  int singles = 0;
  for (const auto& [v, k] : freq) {
    const long double p = static_cast<long double>(k) / n;
    entropy += -p * std::log(p);
    singles += k == 1;
  }
  std::vector<long double> num, alpha, special, words, len;
  int with_num = 0, with_alpha = 0, nones = 0;
  for (const auto& v : values) {
    long double a = 0, d = 0, s = 0, w = 0;
    const auto cps = code_points(v);
    for (std::size_t i = 0; i < cps.size(); ++i) {
      const unsigned c = cps[i];
      const bool ws = c < 128 && space(static_cast<unsigned char>(c));
      if (ws) continue;
      if (i == 0 || (cps[i - 1] < 128 && space(static_cast<unsigned char>(cps[i - 1])))) w += 1;
      if (c >= '0' && c <= '9')
        d += 1;
      else if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))
        a += 1;
      else
        s += 1;
    }
    num.push_back(d);
    alpha.push_back(a);
    special.push_back(s);
    words.push_back(w);
    len.push_back(static_cast<long double>(cps.size()));
    with_num += d > 0;
    with_alpha += a > 0;
    nones += none_like(v);
  }
  const auto mn = moments(num), ma = moments(alpha), ms = moments(special), mw = moments(words), ml = moments(len);
  long double sum = 0;
  for (auto l : len) sum += l;
  const long double lo = *std::min_element(len.begin(), len.end());
  const long double hi = *std::max_element(len.begin(), len.end());
  const long double N = static_cast<long double>(n);
  std::vector<long double> f = {
      N,
      entropy,
      singles / N,
      with_num / N,
      with_alpha / N,
      mn.mean,
      std::sqrt(mn.var),
      ma.mean,
      std::sqrt(ma.var),
      ms.mean,
      std::sqrt(ms.var),
      mw.mean,
      std::sqrt(mw.var),
      nones / N,
      static_cast<long double>(nones),
      nones == static_cast<int>(n) ? 1.0L : 0.0L,
      nones > 0 ? 1.0L : 0.0L,
      ml.mean,
      std::sqrt(ml.var),
      sum,
      lo,
      hi,
      median(len),
      mode(len),
      ml.kurt,
      ml.skew,
      hi > 0 ? 1.0L : 0.0L,
  };
  return {f.begin(), f.end()};
}

/// 96 characters (32..127) x {any, all, mean, var, min, max, median, sum, kurtosis, skewness}.
inline std::vector<double> char_features(const Values& values) {
  std::vector<double> out;
  for (int c = 32; c < 128; ++c) {
    std::vector<long double> counts;
    for (const auto& v : values) counts.push_back(static_cast<long double>(std::count(v.begin(), v.end(), static_cast<char>(c))));
    const bool any = std::any_of(counts.begin(), counts.end(), [](long double x) { return x > 0; });
    const bool all = std::all_of(counts.begin(), counts.end(), [](long double x) { return x > 0; });
    if (!any) {
      out.insert(out.end(), 10, 0.0);
      continue;
    }
    const auto m = moments(counts);
    long double sum = 0;
    for (auto x : counts) sum += x;
    const std::vector<long double> f = {1.0L,
                                        all ? 1.0L : 0.0L,
                                        m.mean,
                                        m.var,
                                        *std::min_element(counts.begin(), counts.end()),
                                        *std::max_element(counts.begin(), counts.end()),
                                        median(counts),
                                        sum,
                                        m.kurt,
                                        m.skew};
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

/// Support-weighted F1 straight from the confusion counts; -1 marks an abstention.
inline double weighted_f1(const std::vector<int>& pred, const std::vector<int>& truth) {
  std::set<int> classes(truth.begin(), truth.end());
  for (int p : pred)
    if (p >= 0) classes.insert(p);
  long double total = 0;
  for (int c : classes) {
    long double tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == c) ++support;
      if (pred[i] == c && truth[i] == c) ++tp;
      if (pred[i] == c && truth[i] != c) ++fp;
      if (pred[i] != c && truth[i] == c) ++fn;
    }
    const long double p = tp + fp > 0 ? tp / (tp + fp) : 0;
    const long double r = tp + fn > 0 ? tp / (tp + fn) : 0;
    const long double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0;
    total += support * f1;
  }
  return static_cast<double>(total / truth.size());
}

inline double gini(const std::vector<double>& counts) {
  double n = 0, sq = 0;
  for (double c : counts) n += c;
  for (double c : counts) sq += (c / n) * (c / n);
  return 1 - sq;
}

/// |a - b| <= tol * max(|a|, |b|), with an absolute floor for values that are
/// mathematically zero but carry rounding noise.
inline bool close(double a, double b, double rel = 1e-9, double floor = 1e-12) {
  if (a == b) return true;
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), floor);
}

/// Fuzzed column: random lengths, ASCII (incl. whitespace and DEL), a little
/// multi-byte UTF-8, missing markers and repeated values.
inline Values random_column(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_values(1, 60), len(0, 24), pick(0, 99), ascii(32, 127);
  static const char* markers[] = {"", "None", "null", " N/A ", "na", "-", "NULL"};
  static const char* utf8[] = {"\xC3\xA9", "\xE2\x82\xAC", "\xF0\x9F\x98\x80", "\xE4\xB8\xAD"};
  static const char ws[] = {' ', '\t', '\n', '\r', '\v', '\f'};
  Values v;
  const int n = n_values(rng);
  for (int i = 0; i < n; ++i) {
    const int roll = pick(rng);
    if (roll < 8) {
      v.push_back(markers[pick(rng) % 7]);
      continue;
    }
    if (roll < 20 && !v.empty()) {
      v.push_back(v[static_cast<std::size_t>(pick(rng)) % v.size()]);
      continue;
    }
    std::string s;
    const int L = len(rng);
    for (int k = 0; k < L; ++k) {
      const int r = pick(rng);
      if (r < 6)
        s += utf8[r % 4];
      else if (r < 14)
        s += ws[r % 6];
      else if (r < 30)
        s += static_cast<char>('0' + r % 10);
      else
        s += static_cast<char>(ascii(rng));
    }
    v.push_back(s);
  }
  return v;
}

}  // namespace oracle
