#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace bdsde {

// Threefry-2x64, 20 rounds. Stateless block cipher used as a counter-based
// generator: every draw is a pure function of (key, counter), so any cell of
// the random field can be regenerated in isolation and time-shifts of the
// noise are literal index shifts.
inline std::array<std::uint64_t, 2> threefry2x64(std::array<std::uint64_t, 2> ctr,
                                                 std::array<std::uint64_t, 2> key) {
  constexpr int kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};
  constexpr std::uint64_t kParity = 0x1BD11BDAA9FC1A22ULL;
  const std::uint64_t ks[3] = {key[0], key[1], kParity ^ key[0] ^ key[1]};
  std::uint64_t x0 = ctr[0] + ks[0];
  std::uint64_t x1 = ctr[1] + ks[1];
  auto rotl = [](std::uint64_t v, int r) { return (v << r) | (v >> (64 - r)); };
  for (int round = 0; round < 20; ++round) {
    x0 += x1;
    x1 = rotl(x1, kRot[round & 7]);
    x1 ^= x0;
    if ((round & 3) == 3) {
      const int s = round / 4 + 1;
      x0 += ks[s % 3];
      x1 += ks[(s + 1) % 3] + static_cast<std::uint64_t>(s);
    }
  }
  return {x0, x1};
}

// Counter layout, shared by every consumer of the master stream:
//   key     = (master seed, kStreamKeyTag)
//   ctr[0]  = signed step index on the stream axis (two's complement)
//   ctr[1]  = purpose tag (8 bits) | lane (32 bits) | draw (24 bits)
// Distinct (tag, lane, draw) triples never collide, so grids, inner clouds
// and path bundles all read disjoint cells of one stream.
inline constexpr std::uint64_t kStreamKeyTag = 0x42445344452D4C61ULL;

enum class StreamTag : std::uint64_t {
  kGrid = 1,
  kInnerCloud = 2,
  kFlowBundle = 3,
  kScratch = 4,
};

/// One addressable substream of the master noise. Values are pure functions
/// of (seed, tag, lane, step, draw); copies are free and thread-safe.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, StreamTag tag, std::uint64_t lane = 0)
      : seed_(seed),
        hi_(static_cast<std::uint64_t>(tag) << 56 | (lane & 0xFFFFFFFFULL) << 24) {
    if (lane > 0xFFFFFFFFULL) throw std::invalid_argument("CounterStream: lane out of range");
  }

  /// Standard normal draw at (step, draw). draw < 2^24.
  double normal(std::int64_t step, std::uint32_t draw) const {
    const auto r = threefry2x64({static_cast<std::uint64_t>(step), hi_ | (draw & 0xFFFFFFULL)},
                                {seed_, kStreamKeyTag});
    // Box-Muller on the two output words; u1 in (0,1], u2 in [0,1).
    const double u1 = (static_cast<double>(r[0] >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(r[1] >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t hi_;
};

}  // namespace bdsde
