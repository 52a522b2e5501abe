#pragma once

#include <cstdint>

#include "msalab/lattice_geometry.hpp"

namespace msalab {

/// Stateless generator: every draw is a hash of its key, so the value at a
/// site does not depend on which box or worker asks for it.
struct CounterKey {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::uint64_t stream = 0;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_bits(const CounterKey& key, const Site& site, std::uint64_t draw = 0) {
  std::uint64_t h = splitmix64(key.seed);
  h = splitmix64(h ^ key.trial);
  h = splitmix64(h ^ (key.stream * 0xd6e8feb86659fd93ULL));
  for (int k = 0; k < site.dim(); ++k) h = splitmix64(h ^ static_cast<std::uint64_t>(site[k]));
  return splitmix64(h ^ draw);
}

/// Uniform on the open interval (0, 1).
inline double counter_uniform(const CounterKey& key, const Site& site, std::uint64_t draw = 0) {
  return (static_cast<double>(counter_bits(key, site, draw) >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace msalab
