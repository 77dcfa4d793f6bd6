#pragma once

#include <cstdint>
#include <random>

namespace quditcorr {

/// Seed for one random stream, derived from a global seed and a task id.
///
/// Streams are keyed, never shared: a task's draws depend only on
/// (global seed, task id), so a sweep produces identical bits regardless
/// of how tasks are scheduled across workers.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t task = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes an additional integer into a key, e.g. to split a task into sub-streams.
inline StreamKey substream(StreamKey key, std::uint64_t sub) {
  return {key.seed, splitmix64(key.task ^ splitmix64(sub + 0x632be59bd9b4e019ULL))};
}

using Rng = std::mt19937_64;

inline Rng make_rng(StreamKey key) {
  const std::uint64_t a = splitmix64(key.seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(key.task));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

}  // namespace quditcorr
