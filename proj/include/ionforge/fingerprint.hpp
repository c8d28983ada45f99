#pragma once

// FNV-1a hashing for artifact provenance (chain fingerprints, config hashes).

#include <bit>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include "chain.hpp"
#include "error.hpp"

namespace ionforge {

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a_doubles(const double* data, std::size_t count, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (std::size_t k = 0; k < count; ++k) {
    const auto bits = std::bit_cast<std::uint64_t>(data[k]);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::uint64_t parse_hex64(const std::string& s) {
  try {
    return std::stoull(s, nullptr, 16);
  } catch (const std::exception&) {
    throw SchemaError("bad 64-bit hex value '" + s + "'");
  }
}

/// Identifies a chain by trap parameters and mode spectrum.
inline std::uint64_t chain_fingerprint(const ChainModel& c) {
  const double head[3] = {static_cast<double>(c.trap.n_ions), c.trap.omega_x, c.trap.omega_z};
  std::uint64_t h = fnv1a_doubles(head, 3);
  return fnv1a_doubles(c.mode_freqs.data(), static_cast<std::size_t>(c.mode_freqs.size()), h);
}

}  // namespace ionforge
