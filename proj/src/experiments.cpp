#include "crystal/experiments.hpp"

#include <stdexcept>

#include "crystal/counter_rng.hpp"
#include "crystal/parallel.hpp"

namespace crystal {

CouplingCheck coupling_experiment(const CouplingOptions& o) {
  if (o.n < 2) throw std::invalid_argument("coupling experiment needs n >= 2");
  if (o.shift < 0 || o.max_initial < 0) throw std::invalid_argument("shift and initial range must be nonnegative");
  if (!(o.horizon >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
  const ClockSource clocks(o.seed);
  const std::size_t n = o.n;
  std::vector<CouplingCheck> per(o.replicas);

  parallel_for(o.replicas, [&](std::size_t rep) {
    CounterRng rng(o.seed, static_cast<std::uint32_t>(StreamDomain::InitialState) << 24,
                   static_cast<std::uint32_t>(rep));
    const auto span = static_cast<std::uint64_t>(o.max_initial) + 1;
    std::vector<Height> base(n), above(n), shifted(n);
    for (std::size_t j = 0; j < n; ++j) {
      base[j] = static_cast<Height>(rng.below(span));
      above[j] = base[j] + static_cast<Height>(rng.below(span));
      shifted[j] = base[j] + o.shift;
    }
    std::vector<ProcessSpec> specs{
        {n, Boundary::Zero, o.betas, base},
        {n, Boundary::Zero, o.betas, above},
        {n, Boundary::Zero, o.betas, shifted},
        {n - 1, Boundary::Zero, o.betas, std::vector<Height>(base.begin(), base.end() - 1)},
    };

    CouplingCheck& c = per[rep];
    bool restricted_live = true;
    auto inspect = [&](std::span<const GrowthProcess> procs) {
      auto lo = procs[0].heights(), hi = procs[1].heights(), sh = procs[2].heights(), rs = procs[3].heights();
      for (std::size_t j = 0; j < n; ++j) {
        c.domination_violations += hi[j] < lo[j];
        c.shift_violations += sh[j] - lo[j] != o.shift;
      }
      restricted_live = restricted_live && lo[n - 2] >= lo[n - 1];
      if (restricted_live) {
        ++c.restriction_checks;
        for (std::size_t j = 0; j + 1 < n; ++j) c.restriction_violations += rs[j] != lo[j];
      }
    };
    std::vector<GrowthProcess> start;
    for (const auto& s : specs) start.emplace_back(s);
    inspect(start);
    simulate_coupled(specs, o.horizon, clocks, {}, static_cast<std::uint32_t>(rep),
                     [&](const ClockEvent&, std::span<const GrowthProcess> procs) {
                       ++c.events;
                       inspect(procs);
                     });
  });

  CouplingCheck total;
  total.replicas = o.replicas;
  for (const auto& c : per) {
    total.events += c.events;
    total.domination_violations += c.domination_violations;
    total.shift_violations += c.shift_violations;
    total.restriction_checks += c.restriction_checks;
    total.restriction_violations += c.restriction_violations;
  }
  return total;
}

AuxCheck aux_experiment(std::size_t r, const BetaParams& betas, double horizon, std::size_t replicas,
                        std::uint64_t seed) {
  const ClockSource clocks(seed);
  std::vector<AuxCheck> per(replicas);
  parallel_for(replicas, [&](std::size_t rep) {
    per[rep] = simulate_aux(r, betas, horizon, clocks, {}, static_cast<std::uint32_t>(rep)).check;
  });
  AuxCheck total;
  for (const auto& c : per) {
    total.events += c.events;
    total.ordering_violations += c.ordering_violations;
    total.constancy_violations += c.constancy_violations;
    total.implication_violations += c.implication_violations;
    total.u_value_violations += c.u_value_violations;
    total.double_fires += c.double_fires;
  }
  return total;
}

}  // namespace crystal
