#pragma once

// Shared Poisson clocks. Each site carries three independent Poisson streams
// of intensities beta0, beta1 - beta0 and beta2 - beta1. They are realised as
// one merged stream of intensity beta2 whose events carry an independent mark
// selecting the sub-stream; every coupled process reads the same marked
// events.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "crystal/core_model.hpp"
#include "crystal/counter_rng.hpp"

namespace crystal {

enum class Stream : std::uint8_t { S0 = 0, S1 = 1, S2 = 2 };

struct ClockEvent {
  double time = 0.0;
  std::size_t site = 0;
  Stream stream = Stream::S0;
};

/// A site at rate level L jumps on events of streams 0..L.
inline bool accepts(RateLevel level, Stream s) { return static_cast<int>(s) <= level; }

/// Event stream of one (replica, site). Event k is a pure function of
/// (seed, replica, site, k).
class SiteClock {
 public:
  SiteClock(std::uint64_t seed, std::uint32_t replica, std::size_t site, const BetaParams& betas);

  /// Time and mark of the next event after the current one.
  ClockEvent next();
  std::uint64_t events_drawn() const { return index_; }

 private:
  Philox4x32::Key key_;
  std::uint32_t replica_;
  std::uint32_t site_;
  double rate_;
  double cut0_, cut1_;
  double time_ = 0.0;
  std::uint64_t index_ = 0;
};

/// Factory for per-site clocks, keyed by a 64-bit seed.
class ClockSource {
 public:
  explicit ClockSource(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t seed() const { return seed_; }
  SiteClock site_clock(std::uint32_t replica, std::size_t site, const BetaParams& betas) const {
    return SiteClock(seed_, replica, site, betas);
  }

 private:
  std::uint64_t seed_;
};

/// Merges the clocks of sites 0..n-1 into one time-ordered event sequence.
/// Equal times are resolved by the smaller site index.
class EventQueue {
 public:
  EventQueue(const ClockSource& clocks, std::uint32_t replica, std::size_t sites, const BetaParams& betas);

  const ClockEvent& peek() const { return pending_[head_]; }
  ClockEvent pop();

 private:
  void select_head();

  std::vector<SiteClock> clocks_;
  std::vector<ClockEvent> pending_;
  std::size_t head_ = 0;
};

}  // namespace crystal
