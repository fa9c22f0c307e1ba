#pragma once

// Counter-based random numbers (Philox4x32-10). Every draw is a pure function
// of (seed, counter), so independent streams need no shared state and the
// same key always reproduces the same numbers.

#include <array>
#include <cstdint>
#include <limits>

namespace crystal {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter bijection(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Uniform in (0, 1], 53 bits.
inline double to_unit_open0(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Uniform in [0, 1), 53 bits.
inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Sequential generator over one keyed stream: (seed; stream_a, stream_b)
/// select the stream, an internal 64-bit index walks it. Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint32_t stream_a, std::uint32_t stream_b)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        a_(stream_a),
        b_(stream_b) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    auto out = Philox4x32::bijection(
        {static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32), a_, b_}, key_);
    ++index_;
    spare_ = (std::uint64_t{out[3]} << 32) | out[2];
    cached_ = true;
    return (std::uint64_t{out[1]} << 32) | out[0];
  }

  double uniform() { return to_unit((*this)()); }
  double uniform_open0() { return to_unit_open0((*this)()); }

  /// Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t v;
    do {
      v = (*this)();
    } while (v >= limit);
    return v % bound;
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t a_, b_;
  std::uint64_t index_ = 0;
  std::uint64_t spare_ = 0;
  bool cached_ = false;
};

/// Domain tags, placed in the top byte of stream_a (the third counter word)
/// so different consumers never share a stream.
enum class StreamDomain : std::uint32_t {
  Clock = 0,
  DriftMonteCarlo = 1,
  Permutation = 2,
  InitialState = 3,
};

}  // namespace crystal
