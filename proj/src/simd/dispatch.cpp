#include "crystal/simd/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace crystal::simd {

namespace {

Isa detect() { return avx2_available() ? Isa::Avx2 : Isa::Scalar; }

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool avx2_available() {
#if defined(CRYSTAL_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa force_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_available()) isa = Isa::Scalar;
  current().store(isa, std::memory_order_relaxed);
  return isa;
}

void reset_isa() { current().store(detect(), std::memory_order_relaxed); }

std::string to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Moments moments(std::span<const double> x) {
  return active_isa() == Isa::Avx2 ? avx2::moments(x) : scalar::moments(x);
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: length mismatch");
  return active_isa() == Isa::Avx2 ? avx2::l1_distance(a, b) : scalar::l1_distance(a, b);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: length mismatch");
  return active_isa() == Isa::Avx2 ? avx2::max_abs_diff(a, b) : scalar::max_abs_diff(a, b);
}

}  // namespace crystal::simd
