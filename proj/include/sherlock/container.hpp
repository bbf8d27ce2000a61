#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sherlock/error.hpp"
#include "sherlock/pipeline.hpp"

namespace sherlock::io {

// Layout (all integers little-endian):
//   magic "SHERLOCK" | u32 version | u64 n | n bytes of JSON metadata
//   u32 section count, then per section:
//   u64 n | n bytes name | u8 kind (0 = f64 array, 1 = raw bytes) | u64 count | payload
inline constexpr std::array<char, 8> kMagic = {'S', 'H', 'E', 'R', 'L', 'O', 'C', 'K'};
inline constexpr std::uint32_t kFormatVersion = 1;

inline std::string schema_hash_hex() {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(schema_hash()));
  return buf;
}

struct Section {
  enum class Kind : std::uint8_t { Doubles = 0, Bytes = 1 };
  Kind kind = Kind::Doubles;
  std::vector<double> doubles;
  std::string bytes;
};

namespace detail {

template <class T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

template <class T>
T get_le(std::istream& in) {
  static_assert(std::is_unsigned_v<T>);
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw DataError("model file is truncated");
    v |= static_cast<T>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

inline std::string get_bytes(std::istream& in, std::uint64_t n) {
  constexpr std::uint64_t kLimit = 1ull << 34;
  if (n > kLimit) throw DataError("model file has an implausible length field");
  std::string s(static_cast<std::size_t>(n), '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw DataError("model file is truncated");
  return s;
}

}  // namespace detail

/// Metadata plus named binary sections. Readers verify the magic, format
/// version and the feature-schema hash recorded at save time.
class ModelContainer {
 public:
  nlohmann::json metadata = nlohmann::json::object();

  void put(const std::string& name, std::vector<double> values) {
    Section s;
    s.kind = Section::Kind::Doubles;
    s.doubles = std::move(values);
    sections_[name] = std::move(s);
  }
  void put_bytes(const std::string& name, std::string bytes) {
    Section s;
    s.kind = Section::Kind::Bytes;
    s.bytes = std::move(bytes);
    sections_[name] = std::move(s);
  }

  bool has(const std::string& name) const { return sections_.contains(name); }

  const std::vector<double>& doubles(const std::string& name) const {
    const auto& s = section(name);
    if (s.kind != Section::Kind::Doubles) throw DataError("model section '" + name + "' is not numeric");
    return s.doubles;
  }
  const std::string& bytes(const std::string& name) const {
    const auto& s = section(name);
    if (s.kind != Section::Kind::Bytes) throw DataError("model section '" + name + "' is not a byte section");
    return s.bytes;
  }
  const std::map<std::string, Section>& sections() const { return sections_; }

  void write(std::ostream& out) const {
    out.write(kMagic.data(), kMagic.size());
    detail::put_le<std::uint32_t>(out, kFormatVersion);
    nlohmann::json meta = metadata;
    meta["schema_hash"] = schema_hash_hex();
    const std::string m = meta.dump();
    detail::put_le<std::uint64_t>(out, m.size());
    out.write(m.data(), static_cast<std::streamsize>(m.size()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sections_.size()));
    for (const auto& [name, s] : sections_) {
      detail::put_le<std::uint64_t>(out, name.size());
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      out.put(static_cast<char>(s.kind));
      if (s.kind == Section::Kind::Doubles) {
        detail::put_le<std::uint64_t>(out, s.doubles.size());
        for (double d : s.doubles) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(d));
      } else {
        detail::put_le<std::uint64_t>(out, s.bytes.size());
        out.write(s.bytes.data(), static_cast<std::streamsize>(s.bytes.size()));
      }
    }
    if (!out) throw Error("failed writing model file");
  }

  static ModelContainer read(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw DataError("not a model file (bad magic)");
    const auto version = detail::get_le<std::uint32_t>(in);
    if (version != kFormatVersion)
      throw SchemaMismatch("unsupported model format version " + std::to_string(version));
    ModelContainer c;
    try {
      c.metadata = nlohmann::json::parse(detail::get_bytes(in, detail::get_le<std::uint64_t>(in)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("model metadata is not valid JSON: ") + e.what());
    }
    if (!c.metadata.contains("schema_hash") || c.metadata["schema_hash"] != schema_hash_hex())
      throw SchemaMismatch("model was built for a different feature schema");
    const auto count = detail::get_le<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < count; ++i) {
      std::string name = detail::get_bytes(in, detail::get_le<std::uint64_t>(in));
      Section s;
      const int kind = in.get();
      if (kind != 0 && kind != 1) throw DataError("model section '" + name + "' has unknown kind");
      s.kind = static_cast<Section::Kind>(kind);
      const auto n = detail::get_le<std::uint64_t>(in);
      if (s.kind == Section::Kind::Doubles) {
        if (n > (1ull << 31)) throw DataError("model section '" + name + "' is implausibly large");
        s.doubles.resize(static_cast<std::size_t>(n));
        for (auto& d : s.doubles) d = std::bit_cast<double>(detail::get_le<std::uint64_t>(in));
      } else {
        s.bytes = detail::get_bytes(in, n);
      }
      c.sections_[std::move(name)] = std::move(s);
    }
    return c;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    write(out);
  }

  static ModelContainer load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    return read(in);
  }

 private:
  const Section& section(const std::string& name) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) throw DataError("model file lacks section '" + name + "'");
    return it->second;
  }

  std::map<std::string, Section> sections_;
};

}  // namespace sherlock::io
