#pragma once

// Foster-Lyapunov verification for kernels on Y = Z^{n-1} with the quadratic
// edge function f(y) = sum_{ {i,j} in E } f_ij(y)^2.
//
// check_conditions tests the four structural hypotheses (support, uniform
// lower bound delta, monotonicity along edges, and the margin-M condition in
// either orientation). constants_schedule produces the step schedule and the
// partition thresholds, classify assigns states to D_0..D_p, and exact_drift /
// monte_carlo_drift evaluate the k-step drift itself.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "crystal/chain_kernels.hpp"

namespace crystal {

/// Raised by exact_drift when enumeration would exceed the work budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (iv): a column above all its neighbours is slower by M.
/// (iv'): a column below all its neighbours is faster by M.
enum class MarginCondition { AboveSlower, BelowFaster };

struct Verdict {
  std::string name;
  bool pass = true;
  std::string detail;
  std::optional<YPoint> witness;
};

struct ConditionReport {
  Verdict support;      // (i)
  Verdict lower_bound;  // (ii)
  Verdict monotone;     // (iii)
  Verdict above_slower; // (iv)
  Verdict below_faster; // (iv')
  bool exact = false;   // all realizable sign patterns were checked
  std::size_t states_checked = 0;
  double tolerance = 0.0;

  bool pass() const {
    return support.pass && lower_bound.pass && monotone.pass && (above_slower.pass || below_faster.pass);
  }
  /// The margin condition that holds; (iv) preferred when both do.
  std::optional<MarginCondition> margin() const;
};

inline constexpr double kConditionTolerance = 1e-12;

/// Sign-constant kernels are checked on one witness per realizable sign
/// pattern (exact). Other kernels are scanned on the window [-w, w]^{n-1}
/// and the report is marked partial.
ConditionReport check_conditions(const Kernel& kernel, double delta, double margin,
                                 std::int64_t window = 3, double tolerance = kConditionTolerance);

struct DriftConstants {
  double delta = 0.0;
  double margin = 0.0;
  std::size_t p = 0;
  MarginCondition variant = MarginCondition::AboveSlower;
  std::vector<double> C;  // C_1..C_p (C[0] is C_1)
  std::vector<double> k;  // k_1..k_p
  bool from_schedule = true;

  /// All C_m and k_m finite.
  bool representable() const;
};

/// Smallest integers with C_1 >= (1+p)/(2M) and, for m >= 2,
/// C_m >= max{p C_{m-1}, (1 + p + p^2 C_{m-1}) / (M delta^{p C_{m-1}})},
/// k_1 = 1, k_m = 1 + p C_{m-1}. With BelowFaster the second bound becomes
/// (1 + p + p^3 C_{m-1}) / (M delta^{p^2 C_{m-1}}) and k_m = 1 + p^2 C_{m-1}.
/// Values beyond double range come out as +infinity.
DriftConstants constants_schedule(std::size_t p, double delta, double margin,
                                  MarginCondition variant = MarginCondition::AboveSlower);

/// User-chosen thresholds (strictly increasing, positive) with the step
/// counts of the schedule. Marked as not coming from the schedule.
DriftConstants user_constants(std::size_t p, double delta, double margin, std::vector<double> C,
                              MarginCondition variant = MarginCondition::AboveSlower);

/// Labels m in {0..p} of every partition class containing y, ascending.
/// D_0: all |f_ij| < C_p. D_1: all |f_ij| >= C_1. D_m (m >= 2): some
/// |f_uv| >= C_m and no |f_ij| in [C_{m-1}, C_m).
std::vector<int> classify(std::span<const std::int64_t> y, const GraphSpec& graph, const DriftConstants& consts);

/// Class that fixes the step count of y: 0 for the exceptional finite set
/// D_0, 1 for D_1 \ D_0, otherwise the smallest m with y in D_m.
int step_class(std::span<const std::int64_t> y, const GraphSpec& graph, const DriftConstants& consts);

struct DriftValue {
  long double value = 0.0L;
  /// Rigorous bound on accumulated rounding error.
  long double error_bound = 0.0L;
  std::size_t work = 0;
};

inline constexpr std::size_t kDefaultPathBudget = 10'000'000;

/// E[f(zeta_k) - f(y) | zeta_0 = y], exact over all move sequences (merged
/// by endpoint). Throws BudgetExceeded when the number of expanded
/// (state, step) pairs would pass `budget`.
DriftValue exact_drift(const Kernel& kernel, std::span<const std::int64_t> y, std::size_t steps,
                       std::size_t budget = kDefaultPathBudget);

/// Exact one-step E[f_ij(zeta_1)^2] - f_ij(y)^2 for every edge, in edge order.
std::vector<long double> edge_increments(const Kernel& kernel, std::span<const std::int64_t> y);

/// For an edge with |f_ij(y)| >= 1: P(|f_ij| grows) and P(|f_ij| shrinks)
/// over one step.
struct EdgeMoveOdds {
  double grow = 0.0;
  double shrink = 0.0;
};
EdgeMoveOdds edge_move_odds(const Kernel& kernel, std::span<const std::int64_t> y, std::size_t edge);

struct McDrift {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
};

/// Sample mean of f(zeta_k) - f(y) over independent chains. Deterministic in
/// (seed, replicas).
McDrift monte_carlo_drift(const Kernel& kernel, std::span<const std::int64_t> y, std::size_t steps,
                          std::size_t replicas, std::uint64_t seed);

struct ClassSummary {
  int label = 0;
  double k = 1;
  std::size_t n_states = 0;
  std::size_t exact_states = 0;
  double min_drift = 0.0;
  double max_drift = 0.0;
  /// max drift (or its Monte Carlo upper confidence bound) <= -1
  bool drift_ok = false;
  bool certified = false;
  std::string note;
};

struct DriftWitness {
  std::string reason;
  YPoint y;
  int label = -1;
  double drift = 0.0;
};

struct DriftReport {
  std::string kernel;
  std::string graph;
  ConditionReport conditions;
  std::optional<DriftConstants> constants;
  std::vector<ClassSummary> classes;
  std::vector<DriftWitness> witnesses;
  /// p = 1 only: drift <= -1 proven on both rays |y| >= C_1.
  std::optional<bool> ray_certificate;
  bool certified = false;
  bool pass = false;
  std::vector<std::string> notes;
};

struct FosterOptions {
  std::optional<std::vector<double>> user_C;
  std::size_t samples_per_class = 200;
  std::uint64_t seed = 1;
  std::size_t path_budget = kDefaultPathBudget;
  std::size_t mc_replicas = 2000;
  /// Upper confidence multiplier for Monte Carlo drift estimates.
  double mc_z = 4.0;
  /// Classes whose step count exceeds this are reported as infeasible.
  double max_steps = 5000;
  std::int64_t window = 3;
};

/// Gates on check_conditions, then evaluates the drift inequality on sampled
/// states of every class D_1..D_p with the scheduled step counts. Only the
/// schedule constants yield certified = true.
DriftReport verify_foster(const Kernel& kernel, double delta, double margin, const FosterOptions& options = {});

nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const DriftConstants& consts);
nlohmann::json to_json(const DriftReport& report);

}  // namespace crystal
