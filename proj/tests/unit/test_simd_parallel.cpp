#include "doctest.h"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "crystal/counter_rng.hpp"
#include "crystal/parallel.hpp"
#include "crystal/simd/kernels.hpp"

using namespace crystal;

namespace {

std::vector<double> noise(std::size_t n, std::uint32_t stream) {
  CounterRng rng(17, stream, 0);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform() * 200.0 - 100.0;
  return v;
}

}  // namespace

TEST_SUITE("simd_parallel") {

TEST_CASE("scalar reference kernels") {
  const std::vector<double> a{1, -2, 3}, b{0, 2, 3};
  auto m = simd::scalar::moments(a);
  CHECK(m.sum == 2.0);
  CHECK(m.sum_sq == 14.0);
  CHECK(simd::scalar::l1_distance(a, b) == 5.0);
  CHECK(simd::scalar::max_abs_diff(a, b) == 4.0);
  CHECK(simd::scalar::max_abs_diff({}, {}) == 0.0);
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  if (!simd::avx2_available()) {
    MESSAGE("AVX2 not available; only the scalar path is exercised");
    return;
  }
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 1000u, 100003u}) {
    auto a = noise(n, 1), b = noise(n, 2);
    auto ms = simd::scalar::moments(a), mv = simd::avx2::moments(a);
    CHECK(mv.sum == doctest::Approx(ms.sum).epsilon(1e-12));
    CHECK(mv.sum_sq == doctest::Approx(ms.sum_sq).epsilon(1e-12));
    CHECK(simd::avx2::l1_distance(a, b) == doctest::Approx(simd::scalar::l1_distance(a, b)).epsilon(1e-12));
    // max is order-independent: bit-identical
    CHECK(simd::avx2::max_abs_diff(a, b) == simd::scalar::max_abs_diff(a, b));
  }
}

TEST_CASE("dispatch can be pinned and reset") {
  CHECK(simd::force_isa(simd::Isa::Scalar) == simd::Isa::Scalar);
  CHECK(simd::active_isa() == simd::Isa::Scalar);
  auto a = noise(33, 3);
  CHECK(simd::moments(a).sum == simd::scalar::moments(a).sum);
  const auto got = simd::force_isa(simd::Isa::Avx2);
  CHECK(got == (simd::avx2_available() ? simd::Isa::Avx2 : simd::Isa::Scalar));
  simd::reset_isa();
  CHECK(simd::active_isa() == (simd::avx2_available() ? simd::Isa::Avx2 : simd::Isa::Scalar));
  CHECK(simd::to_string(simd::Isa::Scalar) == "scalar");
  CHECK_THROWS_AS(simd::l1_distance(std::vector<double>{1.0}, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("parallel_for covers every index once and propagates errors") {
  for (std::size_t threads : {1u, 2u, 5u}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; }, threads);
    for (int h : hits) CHECK(h == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }, 3),
                  std::runtime_error);
  parallel_for(0, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("thread count comes from the setting or the environment") {
  set_default_threads(3);
  CHECK(default_threads() == 3);
  set_default_threads(0);
  CHECK(default_threads() >= 1);
}

}  // TEST_SUITE
