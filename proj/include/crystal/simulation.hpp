#pragma once

// Exact event-driven simulation of the growth processes on shared clocks.
//
// Rules per event (site j, stream s): the site jumps when s is accepted by
// its current rate level, i.e. S0 always, S1 when the rate is at least beta1
// and S2 only at rate beta2. The state is sampled right-continuously: the
// state reported at time t includes every event with time <= t.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "crystal/clocks.hpp"
#include "crystal/core_model.hpp"

namespace crystal {

enum class SampleMode { Heights, Deltas };

/// Event classification counts: [stream][rate level at the event site].
struct EventTally {
  std::array<std::array<std::uint64_t, 3>, 3> by_stream_level{};
  std::uint64_t jumps = 0;

  std::uint64_t events() const;
  /// Jumps implied by the classification rule; equals `jumps` when the
  /// dynamics are correct.
  std::uint64_t accepted() const;
};

/// One growth process being driven by external events.
class GrowthProcess {
 public:
  explicit GrowthProcess(ProcessSpec spec);

  /// Applies one clock event; events at sites >= n are ignored. Returns
  /// whether the site jumped.
  bool apply(const ClockEvent& ev);

  const ProcessSpec& spec() const { return spec_; }
  std::span<const Height> heights() const { return heights_; }
  std::span<const std::uint64_t> jumps() const { return jumps_; }
  const EventTally& tally() const { return tally_; }

 private:
  ProcessSpec spec_;
  std::vector<Height> heights_;
  std::vector<std::uint64_t> jumps_;
  EventTally tally_;
};

struct Trajectory {
  ProcessSpec spec;
  SampleMode mode = SampleMode::Heights;
  std::vector<double> times;
  /// Heights (n entries) or deltas (n-1 / n entries) at each sample time.
  std::vector<std::vector<Height>> states;
  /// Cumulative jump count per site at each sample time.
  std::vector<std::vector<std::uint64_t>> jumps;
  EventTally tally;

  /// X_j(t) - X_j(s) for sampled times s <= t.
  std::int64_t increment(std::size_t j, double s, double t) const;
  std::vector<Height> heights_at(std::size_t sample) const;
};

/// Observer called after every event with the post-event states of all
/// coupled processes.
using CoupledObserver = std::function<void(const ClockEvent&, std::span<const GrowthProcess>)>;

/// Sorted, within [0, horizon]; empty means {0, horizon}.
std::vector<double> resolve_sample_times(std::span<const double> sample_times, double horizon);

Trajectory simulate(const ProcessSpec& spec, double horizon, const ClockSource& clocks,
                    std::span<const double> sample_times, std::uint32_t replica = 0,
                    SampleMode mode = SampleMode::Heights);

/// All processes read the same clock events (sites 0..max n - 1).
std::vector<Trajectory> simulate_coupled(std::span<const ProcessSpec> specs, double horizon,
                                         const ClockSource& clocks, std::span<const double> sample_times,
                                         std::uint32_t replica = 0, const CoupledObserver& observer = {},
                                         SampleMode mode = SampleMode::Heights);

/// Auxiliary triple (X^r, Z^r, X^{r+1}).
struct AuxState {
  std::vector<Height> xr;
  std::vector<Height> zr;
  std::vector<Height> xr1;
};

struct AuxCheck {
  std::uint64_t events = 0;
  std::uint64_t ordering_violations = 0;     // X^r <= X^{r+1} <= Z^r
  std::uint64_t constancy_violations = 0;    // Z_i - X_i equal across i
  std::uint64_t implication_violations = 0;  // u > 0 implies v = beta0
  std::uint64_t u_value_violations = 0;      // u outside its admissible set
  std::uint64_t double_fires = 0;            // Z_r gained two units at once
};

struct AuxTrajectory {
  std::size_t r = 0;
  std::vector<double> times;
  std::vector<AuxState> states;
  std::vector<double> integral_u;
  std::vector<double> integral_v;
  AuxCheck check;
};

using AuxObserver = std::function<void(const ClockEvent&, const AuxState&)>;

/// Intensities of Z_r - X_r and of X^{r+1}_{r+1} in a given X^{r+1} state.
double aux_u(std::span<const Height> xr1, const BetaParams& betas);
double aux_v(std::span<const Height> xr1, const BetaParams& betas);

AuxTrajectory simulate_aux(std::size_t r, const BetaParams& betas, double horizon, const ClockSource& clocks,
                           std::span<const double> sample_times, std::uint32_t replica = 0,
                           const AuxObserver& observer = {});

/// CSV with header time,site_1,...,site_n or time,delta_1,...
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Shortest round-trip decimal form; used by every CSV/JSON writer.
std::string format_double(double v);

}  // namespace crystal
