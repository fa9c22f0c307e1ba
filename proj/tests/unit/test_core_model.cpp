#include "doctest.h"

#include <stdexcept>

#include "crystal/core_model.hpp"

using namespace crystal;

TEST_SUITE("core_model") {

TEST_CASE("beta parameters must be strictly increasing and positive") {
  CHECK_NOTHROW(BetaParams(1, 2, 3));
  CHECK_THROWS_AS(BetaParams(0, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(BetaParams(2, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(BetaParams(1, 3, 2), std::invalid_argument);
  CHECK(BetaParams::parse("0.2,0.4,0.8") == BetaParams(0.2, 0.4, 0.8));
  CHECK_THROWS_AS(BetaParams::parse("1,2"), std::invalid_argument);
  CHECK_THROWS_AS(BetaParams::parse("1,2,x"), std::invalid_argument);
}

TEST_CASE("rate function cases") {
  const BetaParams b(1, 2, 3);
  // valley, slope, peak, flat
  CHECK(rate_r(5, 3, 4, b) == 3);
  CHECK(rate_r(5, 3, 2, b) == 2);
  CHECK(rate_r(2, 3, 2, b) == 1);
  CHECK(rate_r(3, 3, 3, b) == 1);
  CHECK(rate_r(3, 3, 4, b) == 2);
  CHECK(rate_r(4, 3, 3, b) == 2);
}

TEST_CASE("rate symmetry, shift invariance and difference form") {
  const BetaParams b(0.5, 1.5, 4);
  for (Height a = -3; a <= 3; ++a)
    for (Height m = -3; m <= 3; ++m)
      for (Height c = -3; c <= 3; ++c) {
        CHECK(rate_r(a, m, c, b) == rate_r(c, m, a, b));
        CHECK(rate_r(a, m, c, b) == rate_r(a + 7, m + 7, c + 7, b));
        CHECK(rate_r(a, m, c, b) == rate_tilde(a - m, c - m, b));
        CHECK(level_r(a, m, c) == level_tilde(a - m, c - m));
      }
}

TEST_CASE("boundary substitution") {
  const std::vector<Height> h{2, 0, 5};
  CHECK(neighbours(h, 0, Boundary::Zero) == std::pair<Height, Height>{0, 0});
  CHECK(neighbours(h, 2, Boundary::Zero) == std::pair<Height, Height>{0, 0});
  CHECK(neighbours(h, 0, Boundary::Periodic) == std::pair<Height, Height>{5, 0});
  CHECK(neighbours(h, 2, Boundary::Periodic) == std::pair<Height, Height>{0, 2});
  const BetaParams b(1, 2, 3);
  // column 1 sits between 2 and 5: both higher
  CHECK(site_rate(HeightState(h), 1, Boundary::Zero, b) == 3);
  // a zero-BC edge column never sees a higher virtual neighbour
  CHECK(site_rate(HeightState({0, 0}), 0, Boundary::Zero, b) == 1);
  CHECK(site_rate(HeightState({0, 1}), 0, Boundary::Zero, b) == 2);
  CHECK_THROWS_AS(site_rate(HeightState(h), 3, Boundary::Zero, b), std::out_of_range);
  CHECK_THROWS_AS(HeightState({1, -1}), std::invalid_argument);
  CHECK(parse_boundary("periodic") == Boundary::Periodic);
  CHECK_THROWS_AS(parse_boundary("open"), std::invalid_argument);
}

TEST_CASE("delta states") {
  const std::vector<Height> h{4, 1, 3};
  auto z = DeltaState::of(h, Boundary::Zero);
  CHECK(z.deltas == std::vector<Height>{3, -2});
  auto p = DeltaState::of(h, Boundary::Periodic);
  CHECK(p.deltas == std::vector<Height>{3, -2, -1});
  CHECK(p.sum() == 0);
  CHECK(z.running_max(1) == 3);
}

TEST_CASE("process spec validation") {
  CHECK_THROWS_AS(ProcessSpec::from_zero(0, Boundary::Zero, BetaParams(1, 2, 3)).validate(), std::invalid_argument);
  ProcessSpec s = ProcessSpec::from_zero(3, Boundary::Zero, BetaParams(1, 2, 3));
  s.initial = {1, 2};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("graphs") {
  auto p = GraphSpec::path(4);
  CHECK(p.p() == 3);
  CHECK(p.is_tree());
  auto c = GraphSpec::cycle(4);
  CHECK(c.p() == 4);
  CHECK(c.has_edge(3, 0));
  CHECK(GraphSpec::complete(4).p() == 6);
  CHECK(GraphSpec::star(5).p() == 4);
  auto e = GraphSpec::parse("edges:4:1-2,2-3,3-4,4-1");
  CHECK(e.edges() == c.edges());
  CHECK(GraphSpec::parse("path:3").edges() == GraphSpec::path(3).edges());
  CHECK_THROWS_AS(GraphSpec::parse("edges:4:1-2,3-4"), std::invalid_argument);  // disconnected
  CHECK_THROWS_AS(GraphSpec::parse("edges:3:1-1,1-2,2-3"), std::invalid_argument);
  CHECK_THROWS_AS(GraphSpec::parse("wheel:5"), std::invalid_argument);
}

TEST_CASE("Y coordinates, growth vectors and the edge function") {
  const std::vector<Height> h{5, 2, 3};
  const YPoint y = to_y(h);
  CHECK(y == YPoint{2, -1});
  CHECK(f_ij(y, 0, 1) == 3);
  CHECK(f_ij(y, 1, 2) == -1);
  CHECK(f_ij(y, 2, 0) == -2);
  CHECK_THROWS_AS(f_ij(y, 1, 1), std::invalid_argument);
  CHECK(growth_vector(0, 3) == YPoint{1, 0});
  CHECK(growth_vector(2, 3) == YPoint{-1, -1});
  // growing the reference column is the same as every other column falling
  CHECK(grow(y, 2) == to_y(std::vector<Height>{5, 2, 4}));
}

TEST_CASE("f increment identity: f(y + g_i) - f(y) = sum over neighbours of 2 f_il + 1") {
  for (const auto& g : {GraphSpec::path(4), GraphSpec::cycle(4), GraphSpec::complete(4), GraphSpec::star(4)}) {
    for (std::int64_t a = -3; a <= 3; ++a)
      for (std::int64_t b = -2; b <= 2; ++b)
        for (std::int64_t c = -3; c <= 3; c += 2) {
          const YPoint y{a, b, c};
          for (std::size_t i = 0; i < 4; ++i) {
            std::int64_t expect = 0;
            for (std::size_t l : g.neighbours(i)) expect += 2 * f_ij(y, i, l) + 1;
            CHECK(lyapunov_f(grow(y, i), g) - lyapunov_f(y, g) == expect);
          }
        }
  }
}

}  // TEST_SUITE
