#include "crystal/stationary_stats.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "crystal/counter_rng.hpp"
#include "crystal/parallel.hpp"
#include "crystal/simd/kernels.hpp"

namespace crystal {

namespace {

constexpr std::size_t kDirectSolveStates = 20'000;

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(std::span<const double> values) {
  const auto m = simd::moments(values);
  const double n = static_cast<double>(values.size());
  const double mean = m.sum / n;
  if (values.size() < 2) return {mean, 0.0};
  const double var = std::max(0.0, (m.sum_sq - m.sum * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

void require_zero_start(const ProcessSpec& spec) {
  spec.validate();
  if (std::any_of(spec.initial.begin(), spec.initial.end(), [](Height h) { return h != 0; })) {
    throw std::invalid_argument("estimators start from the all-zero configuration");
  }
}

std::vector<double> cdf_on(std::span<const std::uint64_t> hist, double total) {
  std::vector<double> cdf(hist.size());
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    acc += hist[i];
    cdf[i] = static_cast<double>(acc) / total;
  }
  return cdf;
}

}  // namespace

double BirthDeathLaw::tail(std::size_t k) const {
  const double p0 = (1.0 - rho) / (1.0 + rho);
  if (k == 0) return 1.0;
  return 2.0 * p0 * std::pow(rho, static_cast<double>(k)) / (1.0 - rho);
}

BirthDeathLaw birth_death_stationary(const BetaParams& betas, std::size_t truncation) {
  if (truncation < 1) throw std::invalid_argument("truncation must be at least 1");
  BirthDeathLaw law;
  law.rho = betas.beta0() / betas.beta1();
  const double p0 = (1.0 - law.rho) / (1.0 + law.rho);
  law.pmf.resize(truncation + 1);
  law.pmf[0] = p0;
  for (std::size_t m = 1; m <= truncation; ++m) {
    law.pmf[m] = 2.0 * p0 * std::pow(law.rho, static_cast<double>(m));
  }
  law.truncated_mass = law.tail(truncation + 1);
  return law;
}

std::vector<double> TruncatedStationary::abs_marginal(std::size_t coordinate) const {
  std::vector<double> out(static_cast<std::size_t>(window) + 1, 0.0);
  for (std::size_t s = 0; s < states.size(); ++s) {
    out[static_cast<std::size_t>(std::llabs(states[s].at(coordinate)))] += pi[s];
  }
  return out;
}

double TruncatedStationary::probability(std::span<const Height> deltas) const {
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (std::equal(states[s].begin(), states[s].end(), deltas.begin(), deltas.end())) return pi[s];
  }
  return 0.0;
}

TruncatedStationary truncated_stationary(const ProcessSpec& spec, std::int64_t window) {
  spec.validate();
  if (spec.n > 4) throw std::invalid_argument("truncated solve supports n <= 4");
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  const std::size_t n = spec.n;
  const bool periodic = spec.bc == Boundary::Periodic;
  const std::size_t len = periodic ? n : n - 1;     // entries of a delta vector
  const std::size_t free_dims = n == 0 ? 0 : n - 1;  // independent entries
  const auto side = static_cast<std::size_t>(2 * window + 1);
  std::size_t box = 1;
  for (std::size_t d = 0; d < free_dims; ++d) {
    box *= side;
    if (box > kMaxTruncatedStates) throw std::invalid_argument("truncated state space exceeds the state budget");
  }

  TruncatedStationary out;
  out.n = n;
  out.bc = spec.bc;
  out.window = window;

  // dense index over the free-coordinate box; -1 marks excluded points
  std::vector<std::int64_t> index_of(box, -1);
  auto box_index = [&](std::span<const Height> d) -> std::int64_t {
    std::size_t idx = 0;
    for (std::size_t k = free_dims; k-- > 0;) {
      if (d[k] < -window || d[k] > window) return -1;
      idx = idx * side + static_cast<std::size_t>(d[k] + window);
    }
    if (periodic && n >= 1 && (d[n - 1] < -window || d[n - 1] > window)) return -1;
    return index_of[idx];
  };
  {
    std::vector<Height> d(len, 0);
    for (std::size_t code = 0; code < box; ++code) {
      std::size_t c = code;
      Height sum = 0;
      for (std::size_t k = 0; k < free_dims; ++k) {
        d[k] = static_cast<Height>(c % side) - window;
        c /= side;
        sum += d[k];
      }
      if (periodic) {
        d[n - 1] = -sum;
        if (d[n - 1] < -window || d[n - 1] > window) continue;
      }
      index_of[code] = static_cast<std::int64_t>(out.states.size());
      out.states.push_back(d);
    }
  }

  const std::size_t count = out.states.size();
  std::vector<Eigen::Triplet<double>> trip;  // transposed generator
  trip.reserve(count * (n + 1));
  std::vector<double> exit_rate(count, 0.0);
  std::vector<std::vector<std::pair<std::size_t, double>>> moves(count);
  for (std::size_t s = 0; s < count; ++s) {
    const auto& d = out.states[s];
    for (std::size_t j = 0; j < n; ++j) {
      Height u, v;
      std::vector<Height> target(d);
      if (periodic) {
        const std::size_t left = (j + n - 1) % n;
        u = d[left];
        v = -d[j];
        --target[left];
        ++target[j];
      } else {
        u = j > 0 ? d[j - 1] : 0;
        v = j + 1 < n ? -d[j] : 0;
        if (j > 0) --target[j - 1];
        if (j + 1 < n) ++target[j];
      }
      if (target == d) continue;
      const std::int64_t t = box_index(target);
      if (t < 0) continue;  // leaves the window: suppressed
      const double rate = spec.betas.at(level_tilde(u, v));
      moves[s].emplace_back(static_cast<std::size_t>(t), rate);
      exit_rate[s] += rate;
    }
  }
  for (std::size_t s = 0; s < count; ++s) {
    if (s + 1 == count) break;  // last equation replaced by normalisation
    trip.emplace_back(static_cast<int>(s), static_cast<int>(s), -exit_rate[s]);
  }
  for (std::size_t s = 0; s < count; ++s) {
    for (auto [t, rate] : moves[s]) {
      if (t + 1 == count) continue;
      trip.emplace_back(static_cast<int>(t), static_cast<int>(s), rate);
    }
  }
  for (std::size_t s = 0; s < count; ++s) trip.emplace_back(static_cast<int>(count - 1), static_cast<int>(s), 1.0);

  Eigen::SparseMatrix<double> A(static_cast<int>(count), static_cast<int>(count));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<int>(count));
  rhs[static_cast<int>(count) - 1] = 1.0;
  Eigen::VectorXd x;
  if (count <= kDirectSolveStates) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success) throw std::runtime_error("stationary solve: factorisation failed");
    x = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw std::runtime_error("stationary solve failed");
  } else {
    // three free coordinates: LU fill-in gets out of hand, iterate instead
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
    solver.setTolerance(1e-14);
    solver.setMaxIterations(20000);
    solver.compute(A);
    if (solver.info() != Eigen::Success) throw std::runtime_error("stationary solve: preconditioner failed");
    x = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw std::runtime_error("stationary solve did not converge");
  }

  out.pi.assign(x.data(), x.data() + count);
  std::vector<double> flow(count, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    flow[s] -= out.pi[s] * exit_rate[s];
    for (auto [t, rate] : moves[s]) flow[t] += out.pi[s] * rate;
  }
  out.residual = 0.0;
  for (double f : flow) out.residual = std::max(out.residual, std::abs(f));
  return out;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  const std::size_t len = std::max(p.size(), q.size());
  std::vector<double> a(len, 0.0), b(len, 0.0);
  std::copy(p.begin(), p.end(), a.begin());
  std::copy(q.begin(), q.end(), b.begin());
  return 0.5 * simd::l1_distance(a, b);
}

std::vector<double> abs_pmf(std::span<const std::int64_t> values) {
  std::int64_t top = 0;
  for (auto v : values) top = std::max(top, static_cast<std::int64_t>(std::llabs(v)));
  std::vector<double> pmf(static_cast<std::size_t>(top) + 1, 0.0);
  for (auto v : values) pmf[static_cast<std::size_t>(std::llabs(v))] += 1.0;
  for (double& x : pmf) x /= static_cast<double>(values.size());
  return pmf;
}

TailEstimate fit_tail(std::span<const std::int64_t> values, std::size_t coordinate, const TailOptions& options) {
  if (values.empty()) throw std::invalid_argument("no samples to fit");
  TailEstimate est;
  est.coordinate = coordinate;
  est.samples = values.size();
  std::int64_t top = 0;
  for (auto v : values) top = std::max(top, static_cast<std::int64_t>(std::llabs(v)));
  std::vector<std::uint64_t> hist(static_cast<std::size_t>(top) + 1, 0);
  for (auto v : values) ++hist[static_cast<std::size_t>(std::llabs(v))];
  est.counts.assign(hist.size(), 0);
  std::uint64_t acc = 0;
  for (std::size_t k = hist.size(); k-- > 0;) {
    acc += hist[k];
    est.counts[k] = acc;
  }
  const double n = static_cast<double>(values.size());
  for (std::size_t k = 0; k < hist.size(); ++k) {
    est.probs.push_back(static_cast<double>(est.counts[k]) / n);
    est.abs_law.push_back(static_cast<double>(hist[k]) / n);
  }

  std::vector<double> xs, ys;
  for (std::size_t k = options.k_min; k < est.counts.size(); ++k) {
    if (est.counts[k] < options.count_floor) continue;
    est.fit_k.push_back(k);
    xs.push_back(static_cast<double>(k));
    ys.push_back(std::log(est.probs[k]));
  }
  if (xs.size() < 3) throw std::invalid_argument("tail fit needs at least three usable k values");
  const double m = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (est.intercept + est.slope * xs[i]);
    ss_res += r * r;
  }
  est.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return est;
}

std::vector<std::vector<std::int64_t>> sample_deltas(const ProcessSpec& spec, double t, std::size_t replicas,
                                                     std::uint64_t seed, std::uint32_t replica_offset) {
  const ClockSource clocks(seed);
  const double at[] = {t};
  std::vector<std::vector<std::int64_t>> out(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    auto traj = simulate(spec, t, clocks, at, replica_offset + static_cast<std::uint32_t>(r), SampleMode::Deltas);
    out[r] = std::move(traj.states.back());
  });
  return out;
}

std::vector<TailEstimate> estimate_tails(const ProcessSpec& spec, double t, std::size_t replicas, std::uint64_t seed,
                                         std::span<const std::size_t> coordinates, const TailOptions& options) {
  require_zero_start(spec);
  if (replicas < 1000) throw std::invalid_argument("tail estimation needs at least 1000 replicas");
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  const std::size_t len = spec.bc == Boundary::Zero ? spec.n - 1 : spec.n;
  for (auto c : coordinates) {
    if (c >= len) throw std::out_of_range("delta coordinate out of range");
  }
  auto deltas = sample_deltas(spec, t, replicas, seed);
  std::vector<TailEstimate> out;
  std::vector<std::int64_t> column(replicas);
  for (auto c : coordinates) {
    for (std::size_t r = 0; r < replicas; ++r) column[r] = deltas[r][c];
    out.push_back(fit_tail(column, c, options));
  }
  return out;
}

SpeedEstimate estimate_speed(const ProcessSpec& spec, std::size_t coordinate, double t, std::size_t replicas,
                             std::uint64_t seed) {
  require_zero_start(spec);
  if (!(t > 0.0)) throw std::invalid_argument("speed needs t > 0");
  if (coordinate >= spec.n) throw std::out_of_range("column out of range");
  if (replicas < 2) throw std::invalid_argument("speed needs at least two replicas");
  const ClockSource clocks(seed);
  const double at[] = {t};
  std::vector<double> speed(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    auto traj = simulate(spec, t, clocks, at, static_cast<std::uint32_t>(r), SampleMode::Deltas);
    speed[r] = static_cast<double>(traj.jumps.back()[coordinate]) / t;
  });
  const auto ms = mean_se(speed);
  return SpeedEstimate{coordinate, t, replicas, ms.mean, ms.se, ms.mean - kZ99 * ms.se, ms.mean + kZ99 * ms.se};
}

double MartingaleCheck::max_standardized_deviation() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double dev = std::abs(mean[i] - 1.0);
    if (dev == 0.0) continue;
    worst = std::max(worst, std_error[i] > 0 ? dev / std_error[i] : std::numeric_limits<double>::infinity());
  }
  return worst;
}

MartingaleResult martingale_mean(std::size_t r, const BetaParams& betas, double alpha, std::span<const double> times,
                                 std::size_t replicas, std::uint64_t seed) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  if (r < 2) throw std::invalid_argument("auxiliary process needs r >= 2");
  if (times.empty()) throw std::invalid_argument("need at least one sample time");
  if (replicas < 2) throw std::invalid_argument("need at least two replicas");
  const double horizon = *std::max_element(times.begin(), times.end());
  auto samples = resolve_sample_times(times, horizon);
  const ClockSource clocks(seed);
  const double log_base = std::log1p(alpha);
  const std::size_t nt = samples.size();
  std::vector<double> gap(nt * replicas), tip(nt * replicas);
  std::vector<AuxCheck> checks(replicas);
  parallel_for(replicas, [&](std::size_t rep) {
    auto traj = simulate_aux(r, betas, horizon, clocks, samples, static_cast<std::uint32_t>(rep));
    for (std::size_t k = 0; k < nt; ++k) {
      const auto& st = traj.states[k];
      const double d = static_cast<double>(st.zr[r - 1] - st.xr[r - 1]);
      const double x = static_cast<double>(st.xr1[r]);
      gap[k * replicas + rep] = std::exp(d * log_base - alpha * traj.integral_u[k]);
      tip[k * replicas + rep] = std::exp(x * log_base - alpha * traj.integral_v[k]);
    }
    checks[rep] = traj.check;
  });
  MartingaleResult res;
  res.gap = {"(1+alpha)^(Z_r - X_r) exp(-alpha int u)", alpha, samples, {}, {}};
  res.tip = {"(1+alpha)^(X_{r+1}) exp(-alpha int v)", alpha, samples, {}, {}};
  for (std::size_t k = 0; k < nt; ++k) {
    auto g = mean_se(std::span<const double>(gap).subspan(k * replicas, replicas));
    auto t = mean_se(std::span<const double>(tip).subspan(k * replicas, replicas));
    res.gap.mean.push_back(g.mean);
    res.gap.std_error.push_back(g.se);
    res.tip.mean.push_back(t.mean);
    res.tip.std_error.push_back(t.se);
  }
  for (const auto& c : checks) {
    res.invariants.events += c.events;
    res.invariants.ordering_violations += c.ordering_violations;
    res.invariants.constancy_violations += c.constancy_violations;
    res.invariants.implication_violations += c.implication_violations;
    res.invariants.u_value_violations += c.u_value_violations;
    res.invariants.double_fires += c.double_fires;
  }
  return res;
}

double ks_distance(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS distance needs two nonempty samples");
  auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  const std::int64_t lo = std::min(*amin, *bmin), hi = std::max(*amax, *bmax);
  const auto width = static_cast<std::size_t>(hi - lo + 1);
  std::vector<std::uint64_t> ha(width, 0), hb(width, 0);
  for (auto v : a) ++ha[static_cast<std::size_t>(v - lo)];
  for (auto v : b) ++hb[static_cast<std::size_t>(v - lo)];
  auto fa = cdf_on(ha, static_cast<double>(a.size()));
  auto fb = cdf_on(hb, static_cast<double>(b.size()));
  return simd::max_abs_diff(fa, fb);
}

KsComparison permutation_ks(std::span<const std::int64_t> a, std::span<const std::int64_t> b,
                            std::size_t permutations, std::uint64_t seed, double level) {
  if (permutations == 0) throw std::invalid_argument("need at least one permutation");
  KsComparison out;
  out.size_a = a.size();
  out.size_b = b.size();
  out.statistic = ks_distance(a, b);

  std::vector<std::int64_t> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  auto [mn, mx] = std::minmax_element(pooled.begin(), pooled.end());
  const std::int64_t lo = *mn;
  const auto width = static_cast<std::size_t>(*mx - lo + 1);
  std::vector<std::uint64_t> total(width, 0);
  for (auto v : pooled) ++total[static_cast<std::size_t>(v - lo)];

  CounterRng rng(seed, static_cast<std::uint32_t>(StreamDomain::Permutation) << 24, 0);
  std::vector<double> null_stats(permutations);
  std::vector<std::uint64_t> ha(width), hb(width);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  for (std::size_t p = 0; p < permutations; ++p) {
    std::fill(ha.begin(), ha.end(), 0);
    // partial Fisher-Yates: the first |a| slots become a uniform subset
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pooled.size() - i));
      std::swap(pooled[i], pooled[j]);
      ++ha[static_cast<std::size_t>(pooled[i] - lo)];
    }
    for (std::size_t v = 0; v < width; ++v) hb[v] = total[v] - ha[v];
    null_stats[p] = simd::max_abs_diff(cdf_on(ha, na), cdf_on(hb, nb));
  }
  std::size_t at_least = 0;
  for (double s : null_stats) at_least += s >= out.statistic - 1e-12 ? 1 : 0;
  out.p_value = (1.0 + static_cast<double>(at_least)) / (1.0 + static_cast<double>(permutations));
  std::sort(null_stats.begin(), null_stats.end());
  const auto q = static_cast<std::size_t>(std::ceil((1.0 - level) * static_cast<double>(permutations)));
  out.critical = null_stats[std::min(permutations - 1, q == 0 ? 0 : q - 1)];
  out.reject = out.statistic > out.critical;
  return out;
}

bool is_midpoint(const BetaParams& betas) {
  return std::abs(betas.beta1() - 0.5 * (betas.beta0() + betas.beta2())) < 1e-12;
}

MidpointReport midpoint_invariance(const BetaParams& betas, std::span<const std::size_t> n_list,
                                   std::size_t coordinate, double t, std::size_t replicas, std::uint64_t seed,
                                   const MidpointOptions& options) {
  const bool mid = is_midpoint(betas);
  if (options.enforce_midpoint && !mid) {
    throw std::invalid_argument("midpoint comparison requires beta1 = (beta0 + beta2) / 2");
  }
  if (n_list.size() < 2) throw std::invalid_argument("need at least two column counts to compare");
  if (replicas < 2) throw std::invalid_argument("need at least two replicas");
  for (auto n : n_list) {
    if (coordinate + 1 >= n) throw std::out_of_range("delta coordinate out of range for some n");
  }
  MidpointReport rep;
  rep.beta0 = betas.beta0();
  rep.beta1 = betas.beta1();
  rep.beta2 = betas.beta2();
  rep.midpoint = mid;
  rep.coordinate = coordinate;
  rep.t = t;
  rep.replicas = replicas;
  rep.n_list.assign(n_list.begin(), n_list.end());

  std::vector<std::vector<std::int64_t>> laws;
  for (std::size_t idx = 0; idx < n_list.size(); ++idx) {
    auto spec = ProcessSpec::from_zero(n_list[idx], Boundary::Zero, betas);
    auto deltas = sample_deltas(spec, t, replicas, seed, static_cast<std::uint32_t>(idx * replicas));
    std::vector<std::int64_t> col(replicas);
    for (std::size_t r = 0; r < replicas; ++r) col[r] = deltas[r][coordinate];
    laws.push_back(std::move(col));
  }
  for (std::size_t idx = 1; idx < laws.size(); ++idx) {
    auto cmp = permutation_ks(laws[0], laws[idx], options.permutations, seed + idx, options.level);
    cmp.label = "n=" + std::to_string(n_list[0]) + " vs n=" + std::to_string(n_list[idx]);
    rep.any_reject = rep.any_reject || cmp.reject;
    rep.comparisons.push_back(std::move(cmp));
  }
  return rep;
}

KsComparison stationarity_diagnostic(const ProcessSpec& spec, std::size_t coordinate, double t, std::size_t replicas,
                                     std::uint64_t seed, std::size_t permutations) {
  require_zero_start(spec);
  auto early = sample_deltas(spec, t, replicas, seed, 0);
  auto late = sample_deltas(spec, 2.0 * t, replicas, seed, static_cast<std::uint32_t>(replicas));
  std::vector<std::int64_t> a(replicas), b(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    a[r] = early[r].at(coordinate);
    b[r] = late[r].at(coordinate);
  }
  auto cmp = permutation_ks(a, b, permutations, seed ^ 0x5bd1e995u);
  cmp.label = "t vs 2t";
  return cmp;
}

}  // namespace crystal
