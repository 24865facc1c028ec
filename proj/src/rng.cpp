#include "softtree/rng.hpp"

#include <cmath>

namespace softtree {

namespace {

// splitmix64 finalizer; good avalanche, stable constants.
std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(splitmix(splitmix(seed) ^ splitmix(stream ^ 0xa02bdbf7bb3c0a7ULL))) {}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  // u1 in (0, 1] so the log never sees zero.
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  // Rejection below the largest multiple of bound; unbiased and deterministic.
  const std::uint64_t limit = bound * (~0ULL / bound);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

RngStream RngStream::derive(std::initializer_list<std::uint64_t> path) const {
  std::uint64_t h = splitmix(seed_) ^ 0x6a09e667f3bcc909ULL;
  h = splitmix(h ^ stream_);
  for (std::uint64_t id : path) h = splitmix(h ^ id);
  return RngStream(seed_, h);
}

std::uint64_t RngStream::mix(std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::uint64_t id : ids) h = splitmix(h ^ id);
  return h;
}

}  // namespace softtree
