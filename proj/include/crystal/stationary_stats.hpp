#pragma once

// Exact stationary laws and Monte Carlo estimators for the difference
// process: the two-column birth-death law, truncated generator solves,
// exponential tail fits, growth speeds, exponential-martingale means and the
// cross-n comparison in the midpoint case beta1 = (beta0 + beta2) / 2.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crystal/core_model.hpp"
#include "crystal/simulation.hpp"

namespace crystal {

/// Stationary law of |Delta_1| for two columns under zero boundary
/// conditions: a birth-death chain with 0 -> 1 at 2 beta0, m -> m+1 at beta0
/// and m -> m-1 at beta1.
struct BirthDeathLaw {
  double rho = 0.0;           // beta0 / beta1
  std::vector<double> pmf;    // P(|Delta| = m), m = 0..K
  double truncated_mass = 0;  // P(|Delta| > K)

  /// Closed-form P(|Delta| >= k).
  double tail(std::size_t k) const;
};

BirthDeathLaw birth_death_stationary(const BetaParams& betas, std::size_t truncation);

inline constexpr std::size_t kMaxTruncatedStates = 200'000;

struct TruncatedStationary {
  std::size_t n = 0;
  Boundary bc = Boundary::Zero;
  std::int64_t window = 0;
  /// Full delta vectors: n-1 entries (zero BC) or n entries summing to 0.
  std::vector<std::vector<Height>> states;
  std::vector<double> pi;
  /// max_j |(pi G)_j|
  double residual = 0.0;

  /// Law of |Delta_coordinate|, index m = 0..window.
  std::vector<double> abs_marginal(std::size_t coordinate) const;
  double probability(std::span<const Height> deltas) const;
};

/// Stationary vector of the difference-process generator restricted to
/// |Delta_i| <= window, moves leaving the window suppressed. Requires
/// n <= 4 and (2 window + 1)^(free coordinates) <= kMaxTruncatedStates.
TruncatedStationary truncated_stationary(const ProcessSpec& spec, std::int64_t window);

/// 0.5 * sum |p_i - q_i|, shorter input padded with zeros.
double total_variation(std::span<const double> p, std::span<const double> q);

/// Empirical law of |v| on 0..max.
std::vector<double> abs_pmf(std::span<const std::int64_t> values);

struct TailOptions {
  std::size_t count_floor = 30;
  std::size_t k_min = 1;
};

struct TailEstimate {
  std::size_t coordinate = 0;
  std::size_t samples = 0;
  std::vector<std::uint64_t> counts;  // counts[k] = #{|Delta| >= k}
  std::vector<double> probs;          // counts[k] / samples
  std::vector<std::size_t> fit_k;
  double slope = 0.0;      // fitted -alpha
  double intercept = 0.0;  // fitted ln a
  double r2 = 0.0;
  std::vector<double> abs_law;  // empirical P(|Delta| = m)
};

/// Tail curve and log-linear least-squares fit over k >= k_min with
/// counts[k] >= count_floor. Throws std::invalid_argument when fewer than
/// three k qualify.
TailEstimate fit_tail(std::span<const std::int64_t> values, std::size_t coordinate, const TailOptions& options = {});

/// Delta_i at time t from the all-zero start, replica by replica.
std::vector<std::vector<std::int64_t>> sample_deltas(const ProcessSpec& spec, double t, std::size_t replicas,
                                                     std::uint64_t seed, std::uint32_t replica_offset = 0);

std::vector<TailEstimate> estimate_tails(const ProcessSpec& spec, double t, std::size_t replicas, std::uint64_t seed,
                                         std::span<const std::size_t> coordinates, const TailOptions& options = {});

inline constexpr double kZ99 = 2.5758293035489004;

struct SpeedEstimate {
  std::size_t coordinate = 0;
  double t = 0.0;
  std::size_t replicas = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;  // 99% normal interval
  double ci_high = 0.0;
};

SpeedEstimate estimate_speed(const ProcessSpec& spec, std::size_t coordinate, double t, std::size_t replicas,
                             std::uint64_t seed);

struct MartingaleCheck {
  std::string statistic;
  double alpha = 0.0;
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> std_error;

  /// max over times of |mean - 1| / SE (0 where SE = 0 and mean = 1).
  double max_standardized_deviation() const;
};

struct MartingaleResult {
  MartingaleCheck gap;   // (1+a)^{Z_r - X_r} exp(-a int u)
  MartingaleCheck tip;   // (1+a)^{X_{r+1}} exp(-a int v)
  AuxCheck invariants;   // summed over replicas
};

MartingaleResult martingale_mean(std::size_t r, const BetaParams& betas, double alpha,
                                 std::span<const double> times, std::size_t replicas, std::uint64_t seed);

struct KsComparison {
  std::string label;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  double statistic = 0.0;
  double critical = 0.0;  // resampled (1 - level) quantile
  double p_value = 1.0;
  bool reject = false;
};

/// Two-sample Kolmogorov-Smirnov distance of integer samples.
double ks_distance(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

/// KS statistic with a pooled-permutation null distribution.
KsComparison permutation_ks(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                            std::size_t permutations, std::uint64_t seed, double level = 0.01);

struct MidpointOptions {
  std::size_t permutations = 1000;
  double level = 0.01;
  bool enforce_midpoint = true;
};

struct MidpointReport {
  double beta0 = 0, beta1 = 0, beta2 = 0;
  bool midpoint = false;
  std::size_t coordinate = 0;
  double t = 0.0;
  std::size_t replicas = 0;
  std::vector<std::size_t> n_list;
  std::vector<KsComparison> comparisons;  // each n against n_list[0]
  bool any_reject = false;
};

bool is_midpoint(const BetaParams& betas);

/// Compares the law of Delta_coordinate at time t (zero BC, all-zero start)
/// across column counts. Throws std::invalid_argument off the midpoint unless
/// the guard is disabled.
MidpointReport midpoint_invariance(const BetaParams& betas, std::span<const std::size_t> n_list,
                                   std::size_t coordinate, double t, std::size_t replicas, std::uint64_t seed,
                                   const MidpointOptions& options = {});

/// Burn-in diagnostic: law of Delta_coordinate at t against 2t.
KsComparison stationarity_diagnostic(const ProcessSpec& spec, std::size_t coordinate, double t, std::size_t replicas,
                                     std::uint64_t seed, std::size_t permutations = 1000);

}  // namespace crystal
