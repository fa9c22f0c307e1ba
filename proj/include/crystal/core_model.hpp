#pragma once

// Growth-model primitives: rate function, boundary handling, height
// differences and the Y = Z^{n-1} coordinate algebra used by the drift
// checker.
//
// Indexing is 0-based throughout. A configuration of n columns is a vector of
// n heights; the Y-coordinates of a configuration are the n-1 differences
// X_i - X_{n-1}, so column n-1 is the reference column.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace crystal {

using Height = std::int64_t;
using Rate = double;

/// The three growth rates. Construction enforces 0 < beta0 < beta1 < beta2.
class BetaParams {
 public:
  BetaParams(double beta0, double beta1, double beta2);

  double beta0() const { return b_[0]; }
  double beta1() const { return b_[1]; }
  double beta2() const { return b_[2]; }

  /// Rate of level 0, 1 or 2.
  double at(int level) const { return b_[level]; }

  bool operator==(const BetaParams&) const = default;

  /// Parses "b0,b1,b2".
  static BetaParams parse(const std::string& text);

 private:
  double b_[3];
};

enum class Boundary { Zero, Periodic };

std::string to_string(Boundary bc);
Boundary parse_boundary(const std::string& text);

// Rate level of a site: 0 -> beta0, 1 -> beta1, 2 -> beta2. A site at level
// L accepts events of the sub-streams 0..L of the shared Poisson clocks.
using RateLevel = int;

RateLevel level_r(Height a, Height b, Height c);
RateLevel level_tilde(Height u, Height v);

Rate rate_r(Height a, Height b, Height c, const BetaParams& betas);
Rate rate_tilde(Height u, Height v, const BetaParams& betas);

struct HeightState {
  std::vector<Height> heights;

  HeightState() = default;
  explicit HeightState(std::vector<Height> h);
  static HeightState zeros(std::size_t n) { return HeightState(std::vector<Height>(n, 0)); }

  std::size_t size() const { return heights.size(); }
  Height operator[](std::size_t i) const { return heights[i]; }
  bool operator==(const HeightState&) const = default;
};

/// Left and right neighbour heights of column j after boundary substitution.
std::pair<Height, Height> neighbours(std::span<const Height> heights, std::size_t j, Boundary bc);

RateLevel site_level(std::span<const Height> heights, std::size_t j, Boundary bc);
Rate site_rate(const HeightState& state, std::size_t j, Boundary bc, const BetaParams& betas);

/// Height differences Delta_i = X_i - X_{i+1}. Length n-1 under zero
/// boundary conditions, n under periodic ones (Delta_{n-1} = X_{n-1} - X_0).
struct DeltaState {
  Boundary bc = Boundary::Zero;
  std::vector<Height> deltas;

  static DeltaState of(std::span<const Height> heights, Boundary bc);

  std::size_t size() const { return deltas.size(); }
  Height operator[](std::size_t i) const { return deltas[i]; }
  Height sum() const;
  /// max(Delta_0, ..., Delta_j).
  Height running_max(std::size_t j) const;
  bool operator==(const DeltaState&) const = default;
};

/// Growth process identity: column count, boundary rule, rates, start.
struct ProcessSpec {
  std::size_t n = 0;
  Boundary bc = Boundary::Zero;
  BetaParams betas{1.0, 2.0, 3.0};
  std::vector<Height> initial;

  static ProcessSpec from_zero(std::size_t n, Boundary bc, const BetaParams& betas);
  /// Throws std::invalid_argument on n == 0, size mismatch or negative heights.
  void validate() const;
};

/// Connected simple undirected graph on vertices 0..n-1. Edges are stored as
/// (i, j) with i < j, sorted, without duplicates.
class GraphSpec {
 public:
  GraphSpec(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges);

  static GraphSpec path(std::size_t n);
  static GraphSpec cycle(std::size_t n);
  static GraphSpec complete(std::size_t n);
  static GraphSpec star(std::size_t n);
  /// "path:3", "cycle:4", "complete:4", "star:5" or "edges:4:1-2,2-3,3-4"
  /// (1-based vertex labels in the edge list).
  static GraphSpec parse(const std::string& text);

  std::size_t n() const { return n_; }
  std::size_t p() const { return edges_.size(); }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  const std::vector<std::size_t>& neighbours(std::size_t v) const { return adj_[v]; }
  bool has_edge(std::size_t i, std::size_t j) const;
  bool is_tree() const { return edges_.size() + 1 == n_; }
  std::string describe() const;

 private:
  std::size_t n_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  std::vector<std::vector<std::size_t>> adj_;
};

using YPoint = std::vector<std::int64_t>;

/// Height of column i relative to the reference column n-1.
inline std::int64_t y_height(std::span<const std::int64_t> y, std::size_t i) {
  return i < y.size() ? y[i] : 0;
}

/// Particle difference between columns i and j. Requires i != j.
std::int64_t f_ij(std::span<const std::int64_t> y, std::size_t i, std::size_t j);

/// The Y-increment caused by one particle landing on column i.
YPoint growth_vector(std::size_t i, std::size_t n);

/// y + e_i without materialising e_i.
YPoint grow(std::span<const std::int64_t> y, std::size_t i);

/// Sum over edges of f_ij(y)^2.
std::int64_t lyapunov_f(std::span<const std::int64_t> y, const GraphSpec& g);

/// Y-point of a height configuration (X_i - X_{n-1}).
YPoint to_y(std::span<const Height> heights);

}  // namespace crystal
