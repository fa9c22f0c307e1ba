#include "crystal/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace crystal {

namespace {

// Walks the merged event stream up to the horizon, emitting samples
// right-continuously.
template <class OnEvent, class OnSample>
void drive(EventQueue& queue, double horizon, std::span<const double> samples, OnEvent&& on_event,
           OnSample&& on_sample) {
  std::size_t k = 0;
  for (;;) {
    const double next = queue.peek().time;
    while (k < samples.size() && samples[k] < next) on_sample(k++);
    if (next > horizon) break;
    on_event(queue.pop());
  }
  while (k < samples.size()) on_sample(k++);
}

void record(Trajectory& traj, const GrowthProcess& proc, double time) {
  traj.times.push_back(time);
  if (traj.mode == SampleMode::Heights) {
    traj.states.emplace_back(proc.heights().begin(), proc.heights().end());
  } else {
    traj.states.push_back(DeltaState::of(proc.heights(), proc.spec().bc).deltas);
  }
  traj.jumps.emplace_back(proc.jumps().begin(), proc.jumps().end());
}

}  // namespace

std::uint64_t EventTally::events() const {
  std::uint64_t total = 0;
  for (const auto& row : by_stream_level)
    for (auto c : row) total += c;
  return total;
}

std::uint64_t EventTally::accepted() const {
  std::uint64_t total = 0;
  for (int s = 0; s < 3; ++s)
    for (int level = s; level < 3; ++level) total += by_stream_level[s][level];
  return total;
}

GrowthProcess::GrowthProcess(ProcessSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  heights_ = spec_.initial;
  jumps_.assign(spec_.n, 0);
}

bool GrowthProcess::apply(const ClockEvent& ev) {
  if (ev.site >= spec_.n) return false;
  const RateLevel level = site_level(heights_, ev.site, spec_.bc);
  ++tally_.by_stream_level[static_cast<int>(ev.stream)][level];
  if (!accepts(level, ev.stream)) return false;
  ++heights_[ev.site];
  ++jumps_[ev.site];
  ++tally_.jumps;
  return true;
}

std::int64_t Trajectory::increment(std::size_t j, double s, double t) const {
  if (s > t) throw std::invalid_argument("increment needs s <= t");
  if (j >= spec.n) throw std::out_of_range("site index out of range");
  auto find = [&](double x) {
    auto it = std::find(times.begin(), times.end(), x);
    if (it == times.end()) throw std::invalid_argument("time is not a sample time");
    return static_cast<std::size_t>(it - times.begin());
  };
  const std::size_t a = find(s), b = find(t);
  return static_cast<std::int64_t>(jumps[b][j]) - static_cast<std::int64_t>(jumps[a][j]);
}

std::vector<Height> Trajectory::heights_at(std::size_t sample) const {
  std::vector<Height> h(spec.initial);
  for (std::size_t j = 0; j < h.size(); ++j) h[j] += static_cast<Height>(jumps.at(sample)[j]);
  return h;
}

std::vector<double> resolve_sample_times(std::span<const double> sample_times, double horizon) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be finite and >= 0");
  if (sample_times.empty()) return horizon > 0.0 ? std::vector<double>{0.0, horizon} : std::vector<double>{0.0};
  std::vector<double> out(sample_times.begin(), sample_times.end());
  for (double t : out) {
    if (!(t >= 0.0 && t <= horizon)) throw std::invalid_argument("sample times must lie in [0, horizon]");
  }
  if (!std::is_sorted(out.begin(), out.end())) throw std::invalid_argument("sample times must be sorted");
  return out;
}

Trajectory simulate(const ProcessSpec& spec, double horizon, const ClockSource& clocks,
                    std::span<const double> sample_times, std::uint32_t replica, SampleMode mode) {
  auto samples = resolve_sample_times(sample_times, horizon);
  GrowthProcess proc(spec);
  Trajectory traj{spec, mode, {}, {}, {}, {}};
  EventQueue queue(clocks, replica, spec.n, spec.betas);
  drive(
      queue, horizon, samples, [&](const ClockEvent& ev) { proc.apply(ev); },
      [&](std::size_t k) { record(traj, proc, samples[k]); });
  traj.tally = proc.tally();
  return traj;
}

std::vector<Trajectory> simulate_coupled(std::span<const ProcessSpec> specs, double horizon,
                                         const ClockSource& clocks, std::span<const double> sample_times,
                                         std::uint32_t replica, const CoupledObserver& observer,
                                         SampleMode mode) {
  if (specs.empty()) throw std::invalid_argument("no processes to couple");
  auto samples = resolve_sample_times(sample_times, horizon);
  std::size_t sites = 0;
  for (const auto& s : specs) {
    if (!(s.betas == specs.front().betas)) throw std::invalid_argument("coupled processes must share rates");
    sites = std::max(sites, s.n);
  }
  std::vector<GrowthProcess> procs;
  procs.reserve(specs.size());
  std::vector<Trajectory> trajs;
  for (const auto& s : specs) {
    procs.emplace_back(s);
    trajs.push_back(Trajectory{s, mode, {}, {}, {}, {}});
  }
  EventQueue queue(clocks, replica, sites, specs.front().betas);
  drive(
      queue, horizon, samples,
      [&](const ClockEvent& ev) {
        for (auto& p : procs) p.apply(ev);
        if (observer) observer(ev, procs);
      },
      [&](std::size_t k) {
        for (std::size_t i = 0; i < procs.size(); ++i) record(trajs[i], procs[i], samples[k]);
      });
  for (std::size_t i = 0; i < procs.size(); ++i) trajs[i].tally = procs[i].tally();
  return trajs;
}

double aux_u(std::span<const Height> xr1, const BetaParams& betas) {
  const std::size_t r = xr1.size() - 1;
  const Height left = xr1[r - 2], mid = xr1[r - 1], right = xr1[r];
  return betas.at(level_r(left, mid, right)) - betas.at(level_r(left, mid, 0));
}

double aux_v(std::span<const Height> xr1, const BetaParams& betas) {
  const std::size_t r = xr1.size() - 1;
  return betas.at(level_r(xr1[r - 1], xr1[r], 0));
}

AuxTrajectory simulate_aux(std::size_t r, const BetaParams& betas, double horizon, const ClockSource& clocks,
                           std::span<const double> sample_times, std::uint32_t replica,
                           const AuxObserver& observer) {
  if (r < 2) throw std::invalid_argument("auxiliary process needs r >= 2");
  auto samples = resolve_sample_times(sample_times, horizon);
  AuxState st{std::vector<Height>(r, 0), std::vector<Height>(r, 0), std::vector<Height>(r + 1, 0)};
  AuxTrajectory out;
  out.r = r;

  const double eps = 1e-12;
  const double admissible[] = {0.0, betas.beta1() - betas.beta0(), betas.beta2() - betas.beta1(),
                               betas.beta2() - betas.beta0()};
  double acc_u = 0.0, acc_v = 0.0, last = 0.0;
  double u = aux_u(st.xr1, betas), v = aux_v(st.xr1, betas);

  auto verify = [&] {
    const double uu = aux_u(st.xr1, betas);
    if (uu > 0.0 && aux_v(st.xr1, betas) != betas.beta0()) ++out.check.implication_violations;
    if (std::none_of(std::begin(admissible), std::end(admissible),
                     [&](double a) { return std::abs(a - uu) < eps; })) {
      ++out.check.u_value_violations;
    }
    const Height gap = st.zr[0] - st.xr[0];
    for (std::size_t i = 0; i < r; ++i) {
      if (!(st.xr[i] <= st.xr1[i] && st.xr1[i] <= st.zr[i])) ++out.check.ordering_violations;
      if (st.zr[i] - st.xr[i] != gap) ++out.check.constancy_violations;
    }
  };
  verify();

  EventQueue queue(clocks, replica, r + 1, betas);
  drive(
      queue, horizon, samples,
      [&](const ClockEvent& ev) {
        acc_u += u * (ev.time - last);
        acc_v += v * (ev.time - last);
        last = ev.time;

        const std::size_t j = ev.site;
        const std::size_t tip = r - 1;  // column r in 1-based labels
        bool extra = false;
        if (j == tip && st.xr1[r] > st.xr1[tip]) {
          const bool left_low = st.xr1[tip - 1] <= st.xr1[tip];
          extra = (left_low && ev.stream == Stream::S1) || (!left_low && ev.stream == Stream::S2);
        }
        const bool xr_jump = j < r && accepts(site_level(st.xr, j, Boundary::Zero), ev.stream);
        const bool xr1_jump = accepts(site_level(st.xr1, j, Boundary::Zero), ev.stream);

        if (xr_jump) {
          ++st.xr[j];
          ++st.zr[j];
        }
        if (extra) {
          for (auto& z : st.zr) ++z;
          if (xr_jump && j == tip) ++out.check.double_fires;
        }
        if (xr1_jump) ++st.xr1[j];

        ++out.check.events;
        u = aux_u(st.xr1, betas);
        v = aux_v(st.xr1, betas);
        verify();
        if (observer) observer(ev, st);
      },
      [&](std::size_t k) {
        const double t = samples[k];
        out.times.push_back(t);
        out.states.push_back(st);
        out.integral_u.push_back(acc_u + u * (t - last));
        out.integral_v.push_back(acc_v + v * (t - last));
      });
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const bool heights = traj.mode == SampleMode::Heights;
  const std::size_t width = traj.states.empty() ? (heights ? traj.spec.n : 0) : traj.states.front().size();
  os << "time";
  for (std::size_t i = 0; i < width; ++i) os << (heights ? ",site_" : ",delta_") << i + 1;
  os << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << format_double(traj.times[k]);
    for (Height h : traj.states[k]) os << ',' << h;
    os << '\n';
  }
}

}  // namespace crystal
