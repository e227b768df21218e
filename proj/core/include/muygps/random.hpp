#pragma once

#include <cstdint>

namespace muygps {

/// splitmix64 finalizer; maps (master seed, stream id) to an independent seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Fixed stream offsets so a single CLI seed drives every module.
namespace seed_stream {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kSmote = 2;
inline constexpr std::uint64_t kBatch = 3;
inline constexpr std::uint64_t kCalibration = 4;
inline constexpr std::uint64_t kKnnRuns = 5;
inline constexpr std::uint64_t kSubsample = 6;
}  // namespace seed_stream

}  // namespace muygps
