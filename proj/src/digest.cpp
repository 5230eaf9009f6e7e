#include "tccsim/digest.hpp"

#include <cstdio>
#include <stdexcept>

namespace tccsim {

std::string to_hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(std::string_view s) {
  if (s.empty() || s.size() > 16) {
    throw std::invalid_argument("bad hex64: '" + std::string(s) + "'");
  }
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') {
      v |= static_cast<std::uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      v |= static_cast<std::uint64_t>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      v |= static_cast<std::uint64_t>(c - 'A' + 10);
    } else {
      throw std::invalid_argument("bad hex digit in '" + std::string(s) + "'");
    }
  }
  return v;
}

}  // namespace tccsim
