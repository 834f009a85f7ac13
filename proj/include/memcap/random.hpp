#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace memcap {

/// Independent random streams carved out of one seed. Draws on one stream
/// never shift the draws on another.
enum class Stream : std::uint32_t {
  kMatrix = 1,
  kMask = 2,
  kInputs = 3,
  kWashoutInputs = 4,
  kPowerIteration = 5,
};

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit seed is the key; the 64-bit stream word occupies the upper
/// half of the 128-bit counter, so (seed, stream) pairs index disjoint
/// sequences. Satisfies UniformRandomBitGenerator.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;
  Philox4x32(std::uint64_t seed, Stream stream, std::uint32_t substream = 0) noexcept
      : Philox4x32(seed, (static_cast<std::uint64_t>(stream) << 32) | substream) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Fair coin.
  bool bit() noexcept { return ((*this)() >> 31) != 0u; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  unsigned next_ = 4;
};

/// Mixes a base seed with up to three indices into a fresh 64-bit seed
/// (SplitMix64 finalizer chain).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0) noexcept;

}  // namespace memcap
