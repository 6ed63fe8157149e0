#pragma once

#include <cstdint>

namespace nrt {

/// SplitMix64 (Steele, Lea, Flood 2014). State advances by the golden-ratio
/// increment and each output is the standard 30/27/31 xor-shift-multiply mix.
/// Chosen because it is a few lines in any language, so subsets drawn here can
/// be reproduced elsewhere bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform integer in [0, bound) by rejection of the low remainder zone.
  /// `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

}  // namespace nrt
