#pragma once

#include <cstdint>
#include <cstddef>

namespace pacc {

// Deterministic RNG with pinned sampling algorithms. The std:: distributions
// are implementation-defined, which would make reports depend on the libstdc++
// version; everything here is spelled out so equal seeds give equal bytes.
//
// Core generator: xoshiro256**, seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  double uniform01();                 // [0, 1)
  double uniform01_open();            // (0, 1]
  double uniform(double lo, double hi);
  std::size_t uniform_index(std::size_t n);  // [0, n), n > 0

  double normal();                    // standard normal, Box-Muller
  double gamma(double shape);         // shape > 0, unit scale, Marsaglia-Tsang
  double beta(double a, double b);    // a, b > 0

  // Independent substream; derived from the original seed and the stream tag,
  // not from the current state, so derivation order does not matter.
  Rng derive(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

// One step of splitmix64; also used to hash seeds with stream tags.
std::uint64_t splitmix64_next(std::uint64_t& state);

}  // namespace pacc
