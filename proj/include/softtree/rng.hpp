#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace softtree {

// Deterministic random stream. A (seed, stream) pair fully determines the
// sequence on every platform: mt19937_64 is specified bit-for-bit by the
// standard, and the normal/uniform transforms below avoid the
// implementation-defined std::*_distribution classes.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal();

  // Uniform integer in [0, bound); rejection sampling, bound >= 1.
  std::uint64_t below(std::uint64_t bound);

  // Child stream derived from this stream's identity plus a path of ids.
  // Children with different paths are decorrelated and order-independent.
  RngStream derive(std::initializer_list<std::uint64_t> path) const;

  // Avalanche mix of an id sequence into a single 64-bit value.
  static std::uint64_t mix(std::initializer_list<std::uint64_t> ids);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace softtree
