#include <cmath>
#include <stdexcept>

#include "crystal/simd/kernels.hpp"

#if defined(CRYSTAL_HAVE_AVX2_TU) && defined(__AVX2__)
#include <immintrin.h>

namespace crystal::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sw));
}

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

}  // namespace

Moments moments(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
  __m256d q0 = _mm256_setzero_pd(), q1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d a = _mm256_loadu_pd(p + i);
    __m256d b = _mm256_loadu_pd(p + i + 4);
    s0 = _mm256_add_pd(s0, a);
    s1 = _mm256_add_pd(s1, b);
    q0 = _mm256_fmadd_pd(a, a, q0);
    q1 = _mm256_fmadd_pd(b, b, q1);
  }
  Moments m{hsum(_mm256_add_pd(s0, s1)), hsum(_mm256_add_pd(q0, q1))};
  for (; i < n; ++i) {
    m.sum += p[i];
    m.sum_sq += p[i] * p[i];
  }
  return m;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: length mismatch");
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    acc = _mm256_add_pd(acc, abs_pd(d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: length mismatch");
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    acc = _mm256_max_pd(acc, abs_pd(d));
  }
  double m = hmax(acc);
  for (; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace crystal::simd::avx2

#else

// No AVX2 translation unit on this target; dispatch never selects these.
namespace crystal::simd::avx2 {
Moments moments(std::span<const double> x) { return scalar::moments(x); }
double l1_distance(std::span<const double> a, std::span<const double> b) { return scalar::l1_distance(a, b); }
double max_abs_diff(std::span<const double> a, std::span<const double> b) { return scalar::max_abs_diff(a, b); }
}  // namespace crystal::simd::avx2

#endif
