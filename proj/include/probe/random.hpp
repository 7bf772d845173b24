#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace probe {

/// Deterministic named sub-stream derived from a root seed, so that
/// independent consumers never share generator state.
inline std::mt19937_64 seed_stream(uint64_t root_seed, std::string_view name,
                                   uint64_t index = 0) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (char c : name) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ull;
  }
  mix(root_seed);
  mix(index);
  return std::mt19937_64(h);
}

} // namespace probe
