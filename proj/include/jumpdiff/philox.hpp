#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace jumpdiff {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// Stream layout used by the simulator: the 64-bit seed is the key, and the
// counter is {step_lo, step_hi, lane, stream}. Every random quantity of step k
// is a pure function of (seed, stream, k, lane), so paths can be generated in
// any order or in parallel without changing a single bit.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::string_view kName = "philox4x32-10";

  explicit constexpr Philox4x32(Key key) : key_(key) {}
  explicit constexpr Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr Block operator()(Block ctr) const {
    Key k = key_;
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        k[0] += kWeyl0;
        k[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  Block block(std::uint64_t step, std::uint32_t lane, std::uint32_t stream) const {
    return (*this)({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), lane, stream});
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
  Key key_;
};

// 52-bit uniform strictly inside (0, 1); with 53 bits the top value would
// round up to 1.
inline double open_uniform(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

// Standard normal from one block (Box-Muller, cosine branch).
inline double block_normal(const Philox4x32::Block& b) {
  const double u1 = open_uniform(b[0], b[1]);
  const double u2 = open_uniform(b[2], b[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace jumpdiff
