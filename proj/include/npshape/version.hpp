#pragma once

#include <cstdint>
#include <string>

namespace npshape {

inline constexpr const char* kVersion = "np-shape 0.1.0";

// FNV-1a, used to stamp reports with a hash of the effective config.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace npshape
