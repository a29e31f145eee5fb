#pragma once

// Little-endian primitives shared by the WAV, FGR1 matrix and checkpoint codecs.

#include "fregrad/types.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace fregrad::io {

static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("unexpected end of data");
  return value;
}

inline void put_tag(std::ostream& out, const char (&tag)[5]) { out.write(tag, 4); }

inline std::string get_tag(std::istream& in) {
  std::string tag(4, '\0');
  in.read(tag.data(), 4);
  if (!in) throw FormatError("unexpected end of data");
  return tag;
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in, std::uint64_t max_size = 1ull << 32) {
  const auto size = get<std::uint64_t>(in);
  if (size > max_size) throw FormatError("string record too large");
  std::string s(size, '\0');
  in.read(s.data(), static_cast<std::streamsize>(size));
  if (!in) throw FormatError("unexpected end of data");
  return s;
}

}  // namespace fregrad::io
