#pragma once

// Reduction kernels used by the replica estimators. Each kernel has a scalar
// reference and, on x86-64, an AVX2 variant; the variant is picked once at
// runtime from CPUID and can be pinned for testing.

#include <span>
#include <string>

namespace crystal::simd {

enum class Isa { Scalar, Avx2 };

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
};

namespace scalar {
Moments moments(std::span<const double> x);
double l1_distance(std::span<const double> a, std::span<const double> b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
}  // namespace scalar

namespace avx2 {
// Only callable when the CPU supports AVX2 (see avx2_available()).
Moments moments(std::span<const double> x);
double l1_distance(std::span<const double> a, std::span<const double> b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
}  // namespace avx2

bool avx2_available();
Isa active_isa();
/// Pins the dispatch target; requesting Avx2 on a machine without it falls
/// back to Scalar. Returns the ISA now in effect.
Isa force_isa(Isa isa);
/// Restores CPUID-based selection.
void reset_isa();
std::string to_string(Isa isa);

Moments moments(std::span<const double> x);
/// sum_i |a_i - b_i|; spans must have equal length.
double l1_distance(std::span<const double> a, std::span<const double> b);
/// max_i |a_i - b_i|; 0 for empty input.
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace crystal::simd
