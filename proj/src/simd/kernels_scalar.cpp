#include <cmath>
#include <stdexcept>

#include "crystal/simd/kernels.hpp"

namespace crystal::simd::scalar {

Moments moments(std::span<const double> x) {
  Moments m;
  for (double v : x) {
    m.sum += v;
    m.sum_sq += v * v;
  }
  return m;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace crystal::simd::scalar
