#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace nlx {

// Lowercase hex SHA-256 of the bytes of `data`.
std::string sha256_hex(std::string_view data);

// 64-bit FNV-1a; cheap, stable across platforms, used for feature hashing.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace nlx
