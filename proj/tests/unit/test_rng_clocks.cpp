#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <set>

#include "crystal/clocks.hpp"
#include "crystal/counter_rng.hpp"

using namespace crystal;

TEST_SUITE("rng_clocks") {

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::bijection(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::bijection(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::bijection(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniform conversions stay in range") {
  CHECK(to_unit(0) == 0.0);
  CHECK(to_unit(~std::uint64_t{0}) < 1.0);
  CHECK(to_unit_open0(0) > 0.0);
  CHECK(to_unit_open0(~std::uint64_t{0}) <= 1.0);
}

TEST_CASE("counter rng is reproducible and stream-separated") {
  CounterRng a(42, 1, 2), b(42, 1, 2), c(42, 1, 3), d(43, 1, 2);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
  }
  CounterRng r(7, 0, 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.below(10);
    CHECK(v < 10);
    seen.insert(v);
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("site clock: gaps and marks follow the merged stream") {
  const BetaParams b(1, 2, 4);
  SiteClock clock(5, 0, 3, b);
  const int N = 200000;
  double last = 0.0, gap_sum = 0.0;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < N; ++i) {
    auto ev = clock.next();
    CHECK(ev.site == 3);
    REQUIRE(ev.time > last);
    gap_sum += ev.time - last;
    last = ev.time;
    ++counts[static_cast<int>(ev.stream)];
  }
  // mean gap 1/beta2, marks beta0/beta2, (beta1-beta0)/beta2, (beta2-beta1)/beta2
  const double mean_gap = gap_sum / N;
  CHECK(std::abs(mean_gap - 0.25) < 4 * 0.25 / std::sqrt(N));
  const double p[3] = {0.25, 0.25, 0.5};
  for (int s = 0; s < 3; ++s) {
    const double se = std::sqrt(p[s] * (1 - p[s]) / N);
    CHECK(std::abs(counts[s] / double(N) - p[s]) < 4 * se);
  }
  CHECK(clock.events_drawn() == static_cast<std::uint64_t>(N));
}

TEST_CASE("site clocks are pure functions of their keys") {
  const BetaParams b(1, 2, 3);
  SiteClock a(9, 4, 1, b), c(9, 4, 1, b), other_site(9, 4, 2, b), other_rep(9, 5, 1, b);
  for (int i = 0; i < 50; ++i) {
    auto x = a.next(), y = c.next();
    CHECK(x.time == y.time);
    CHECK(x.stream == y.stream);
    CHECK(x.time != other_site.next().time);
    CHECK(x.time != other_rep.next().time);
  }
}

TEST_CASE("event queue merges sites in time order") {
  const BetaParams b(1, 2, 3);
  EventQueue q(ClockSource(11), 0, 4, b);
  double last = 0.0;
  std::set<std::size_t> sites;
  for (int i = 0; i < 1000; ++i) {
    auto ev = q.pop();
    CHECK(ev.time >= last);
    CHECK(ev.site < 4);
    last = ev.time;
    sites.insert(ev.site);
  }
  CHECK(sites.size() == 4);
}

TEST_CASE("acceptance rule") {
  CHECK(accepts(0, Stream::S0));
  CHECK_FALSE(accepts(0, Stream::S1));
  CHECK(accepts(1, Stream::S1));
  CHECK_FALSE(accepts(1, Stream::S2));
  CHECK(accepts(2, Stream::S2));
}

}  // TEST_SUITE
