#pragma once

// Replica-level path-wise checks on coupled trajectories. Every quantity is a
// count of violations observed after individual events, never an average.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "crystal/simulation.hpp"

namespace crystal {

struct CouplingOptions {
  std::size_t n = 4;
  BetaParams betas{1.0, 2.0, 3.0};
  double horizon = 100.0;
  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
  /// Constant added to every column of the shifted copy.
  Height shift = 5;
  /// Initial heights are drawn uniformly from 0..max_initial.
  Height max_initial = 3;
};

struct CouplingCheck {
  std::size_t replicas = 0;
  std::uint64_t events = 0;
  std::uint64_t domination_violations = 0;  // X(0) >= X~(0) but X_j(t) < X~_j(t)
  std::uint64_t shift_violations = 0;       // X^(t) - X~(t) != shift
  /// Restriction of X~ to its first n-1 columns, compared while
  /// Delta_{n-1} >= 0 has held since time 0.
  std::uint64_t restriction_checks = 0;
  std::uint64_t restriction_violations = 0;

  bool pass() const { return domination_violations == 0 && shift_violations == 0 && restriction_violations == 0; }
};

/// Per replica: a random start X~(0), a dominating start X(0) = X~(0) + random
/// nonnegative offsets, the shifted start X~(0) + shift and the (n-1)-column
/// restriction, all on one set of clocks. Requires 2 <= n.
CouplingCheck coupling_experiment(const CouplingOptions& options);

/// Auxiliary-process invariants summed over replicas.
AuxCheck aux_experiment(std::size_t r, const BetaParams& betas, double horizon, std::size_t replicas,
                        std::uint64_t seed);

}  // namespace crystal
