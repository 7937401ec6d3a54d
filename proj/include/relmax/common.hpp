#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace relmax {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using CandidateId = std::uint32_t;

inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

// Malformed input: bad file, unknown label, invalid parameter.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A request that is well-formed but exceeds a configured work cap.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Counter-based randomness. Every random decision is a pure function of a
// 64-bit key, so sample i of a run never depends on which thread drew it or
// in what order edges were visited.
namespace rng {

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Uniform double in [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Existence coin of edge `edge` in the world identified by `world_key`.
inline bool edge_present(std::uint64_t world_key, EdgeId edge, double prob) noexcept {
  if (prob >= 1.0) return true;
  if (prob <= 0.0) return false;
  return to_unit(mix64(world_key ^ (static_cast<std::uint64_t>(edge) * 0xd1b54a32d192ed03ULL))) < prob;
}

// Small sequential generator for places that consume a stream of numbers
// (graph generators, repeated experiments).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() noexcept { return to_unit(next()); }

  // Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      __extension__ using u128 = unsigned __int128;
      const u128 m = static_cast<u128>(next()) * bound;
      if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace rng
}  // namespace relmax
