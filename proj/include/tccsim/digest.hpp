#pragma once
// FNV-1a 64-bit content digests, used for config/trace identity and for
// naming persisted run artifacts. Not cryptographic; collision scale here
// is a few hundred objects.

#include <cstdint>
#include <string>
#include <string_view>

namespace tccsim {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = kFnvOffset) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t fnv1a64_u64(std::uint64_t v,
                                    std::uint64_t h = kFnvOffset) noexcept {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

std::string to_hex16(std::uint64_t v);
std::uint64_t parse_hex64(std::string_view s);  // throws std::invalid_argument

}  // namespace tccsim
