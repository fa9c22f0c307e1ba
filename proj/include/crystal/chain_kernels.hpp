#pragma once

// Discrete-time kernels on Y = Z^{n-1} whose moves are "stay" or "one
// particle on column i" (y -> y + e_i), plus the edge-sign quotient on which
// the built-in kernels are constant.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crystal/core_model.hpp"

namespace crystal {

/// Transition probabilities out of one state: grow[i] = Q(y, y + e_i),
/// stay = Q(y, y).
struct KernelRow {
  std::vector<double> grow;
  double stay = 0.0;

  double total() const;
};

class Kernel {
 public:
  using RowFn = std::function<KernelRow(std::span<const std::int64_t>)>;

  /// `sign_constant` promises that row(y) depends on y only through
  /// sign_pattern_of(y, graph); the drift checker then verifies exactly.
  Kernel(GraphSpec graph, RowFn row, bool sign_constant, std::string name);

  /// Throws std::invalid_argument if y has the wrong length or the row does
  /// not have n grow entries.
  KernelRow row(std::span<const std::int64_t> y) const;

  std::size_t n() const { return graph_.n(); }
  const GraphSpec& graph() const { return graph_; }
  bool sign_constant() const { return sign_constant_; }
  const std::string& name() const { return name_; }

 private:
  GraphSpec graph_;
  RowFn row_;
  bool sign_constant_;
  std::string name_;
};

/// Per-column rate levels of the configuration with Y-coordinates y, for the
/// chain of differences under boundary condition bc.
std::vector<RateLevel> column_levels(std::span<const std::int64_t> y, Boundary bc);

/// Jump chain of the difference process: Q(y, y + e_i) = rate_i / total rate,
/// no stay mass. Zero BC uses the path graph, periodic BC the cycle.
Kernel embedded_jump_kernel(const ProcessSpec& spec);
Kernel embedded_jump_kernel(std::size_t n, Boundary bc, const BetaParams& betas);

/// Lazy kernel on an arbitrary graph: beta0/n when column i is above all its
/// neighbours, beta2/n when it is nowhere above them, beta1/n otherwise.
/// Requires beta2 <= 1.
Kernel example3_kernel(const GraphSpec& graph, const BetaParams& betas);

/// Sign of f_ij(y) for each canonical edge (i < j), in edge order.
class SignPattern {
 public:
  SignPattern() = default;
  explicit SignPattern(std::vector<std::int8_t> signs) : signs_(std::move(signs)) {}

  const std::vector<std::int8_t>& signs() const { return signs_; }
  /// Sign of f_il(y) for an edge {i, l}; antisymmetric in (i, l).
  int sign(const GraphSpec& g, std::size_t i, std::size_t l) const;
  std::string to_string() const;
  bool operator==(const SignPattern&) const = default;
  auto operator<=>(const SignPattern&) const = default;

 private:
  std::vector<std::int8_t> signs_;
};

SignPattern sign_pattern_of(std::span<const std::int64_t> y, const GraphSpec& graph);

/// Smallest nonnegative heights realising the pattern, as a Y-point; nullopt
/// when the pattern is inconsistent (a strict cycle or a strict edge inside an
/// equality class).
std::optional<YPoint> realize(const SignPattern& pattern, const GraphSpec& graph);

struct RealizedPattern {
  SignPattern pattern;
  YPoint witness;
};

inline constexpr std::size_t kMaxPatternEdges = 12;

/// Every realizable pattern with a witness, in base-3 enumeration order.
/// Throws std::invalid_argument when p exceeds max_edges.
std::vector<RealizedPattern> enumerate_patterns(const GraphSpec& graph,
                                                std::size_t max_edges = kMaxPatternEdges);

/// CSV `pattern_id,move,probability`; move is `stay` or `grow_<i>` (1-based).
void write_kernel_rows_csv(std::ostream& os, const Kernel& kernel, std::span<const RealizedPattern> patterns);

}  // namespace crystal
