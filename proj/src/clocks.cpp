#include "crystal/clocks.hpp"

#include <cmath>
#include <stdexcept>

namespace crystal {

SiteClock::SiteClock(std::uint64_t seed, std::uint32_t replica, std::size_t site, const BetaParams& betas)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      replica_(replica),
      site_(static_cast<std::uint32_t>(site)),
      rate_(betas.beta2()),
      cut0_(betas.beta0() / betas.beta2()),
      cut1_(betas.beta1() / betas.beta2()) {
  if (site >= (std::size_t{1} << 24)) throw std::out_of_range("site index too large for clock key");
}

ClockEvent SiteClock::next() {
  const std::uint32_t tagged_site = (static_cast<std::uint32_t>(StreamDomain::Clock) << 24) | site_;
  auto out = Philox4x32::bijection(
      {static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32), tagged_site, replica_},
      key_);
  ++index_;
  const double gap_u = to_unit_open0((std::uint64_t{out[1]} << 32) | out[0]);
  const double mark_u = to_unit((std::uint64_t{out[3]} << 32) | out[2]);
  time_ += -std::log(gap_u) / rate_;
  Stream s = mark_u < cut0_ ? Stream::S0 : (mark_u < cut1_ ? Stream::S1 : Stream::S2);
  return ClockEvent{time_, site_, s};
}

EventQueue::EventQueue(const ClockSource& clocks, std::uint32_t replica, std::size_t sites,
                       const BetaParams& betas) {
  if (sites == 0) throw std::invalid_argument("event queue needs at least one site");
  clocks_.reserve(sites);
  pending_.reserve(sites);
  for (std::size_t j = 0; j < sites; ++j) {
    clocks_.push_back(clocks.site_clock(replica, j, betas));
    pending_.push_back(clocks_.back().next());
  }
  select_head();
}

void EventQueue::select_head() {
  // strict < keeps the lowest site on ties
  head_ = 0;
  for (std::size_t j = 1; j < pending_.size(); ++j) {
    if (pending_[j].time < pending_[head_].time) head_ = j;
  }
}

ClockEvent EventQueue::pop() {
  ClockEvent ev = pending_[head_];
  pending_[head_] = clocks_[head_].next();
  select_head();
  return ev;
}

}  // namespace crystal
