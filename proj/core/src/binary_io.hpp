#pragma once

// Little-endian primitives for the on-disk formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "mdhar/error.hpp"

namespace mdhar::io {

template <typename U>
U byteswap_if_big(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out = static_cast<U>((out << 8) | ((v >> (8 * i)) & 0xFF));
    }
    return out;
  }
  return v;
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  v = byteswap_if_big(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_f64(std::ostream& os, double d) {
  auto v = byteswap_if_big(std::bit_cast<std::uint64_t>(d));
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_f32(std::ostream& os, float f) {
  auto v = byteswap_if_big(std::bit_cast<std::uint32_t>(f));
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void put_magic(std::ostream& os, std::string_view magic) {
  os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void need(std::istream& is, const std::string& what) {
  if (!is) throw DataError("truncated or unreadable " + what);
}

inline std::uint32_t get_u32(std::istream& is, const std::string& what) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  need(is, what);
  return byteswap_if_big(v);
}

inline double get_f64(std::istream& is, const std::string& what) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  need(is, what);
  return std::bit_cast<double>(byteswap_if_big(v));
}

inline float get_f32(std::istream& is, const std::string& what) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  need(is, what);
  return std::bit_cast<float>(byteswap_if_big(v));
}

inline void expect_magic(std::istream& is, std::string_view magic, const std::string& what) {
  std::array<char, 8> buf{};
  is.read(buf.data(), static_cast<std::streamsize>(magic.size()));
  need(is, what);
  if (std::string_view(buf.data(), magic.size()) != magic) {
    throw DataError(what + ": bad magic, expected '" + std::string(magic) + "'");
  }
}

}  // namespace mdhar::io
