#include "crystal/drift_checker.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "crystal/counter_rng.hpp"
#include "crystal/parallel.hpp"
#include "crystal/simd/kernels.hpp"

namespace crystal {

namespace {

std::string show(std::span<const std::int64_t> y) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < y.size(); ++i) os << (i ? "," : "") << y[i];
  os << ')';
  return os.str();
}

void fail(Verdict& v, std::string detail, std::span<const std::int64_t> y) {
  if (!v.pass) return;  // keep the first witness
  v.pass = false;
  v.detail = std::move(detail);
  v.witness = YPoint(y.begin(), y.end());
}

// Smallest integer >= x, forgiving a few ulps of representation error in x.
double ceil_tolerant(double x) {
  if (!std::isfinite(x)) return x;
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return r;
  return std::ceil(x);
}

// Largest threshold whose states can still be built in 64-bit coordinates.
constexpr double kMaxSampleThreshold = 1e15;

void check_state(const Kernel& kernel, std::span<const std::int64_t> y, double delta, double margin, double tol,
                 ConditionReport& rep) {
  const GraphSpec& g = kernel.graph();
  const KernelRow row = kernel.row(y);
  const std::size_t n = g.n();

  bool stochastic = row.stay >= -tol && std::abs(row.total() - 1.0) <= tol;
  for (double q : row.grow) stochastic = stochastic && q >= -tol;
  if (!stochastic) fail(rep.support, "row is not a probability vector at " + show(y), y);

  for (std::size_t i = 0; i < n; ++i) {
    if (row.grow[i] < delta - tol) {
      std::ostringstream os;
      os << "Q(y, y+e_" << i + 1 << ") = " << row.grow[i] << " < delta = " << delta << " at " << show(y);
      fail(rep.lower_bound, os.str(), y);
    }
  }

  for (auto [a, b] : g.edges()) {
    const std::int64_t f = f_ij(y, a, b);
    if (f == 0) continue;
    const std::size_t hi = f > 0 ? a : b, lo = f > 0 ? b : a;
    if (row.grow[hi] > row.grow[lo] + tol) {
      std::ostringstream os;
      os << "higher column " << hi + 1 << " grows with " << row.grow[hi] << " > " << row.grow[lo]
         << " of lower neighbour " << lo + 1 << " at " << show(y);
      fail(rep.monotone, os.str(), y);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& nb = g.neighbours(i);
    if (nb.empty()) continue;
    const bool above_all = std::all_of(nb.begin(), nb.end(), [&](std::size_t l) { return f_ij(y, i, l) > 0; });
    const bool below_all = std::all_of(nb.begin(), nb.end(), [&](std::size_t l) { return f_ij(y, i, l) < 0; });
    for (std::size_t l : nb) {
      if (above_all && row.grow[i] > row.grow[l] - margin + tol) {
        std::ostringstream os;
        os << "peak column " << i + 1 << " not slower than neighbour " << l + 1 << " by M at " << show(y);
        fail(rep.above_slower, os.str(), y);
      }
      if (below_all && row.grow[i] < row.grow[l] + margin - tol) {
        std::ostringstream os;
        os << "valley column " << i + 1 << " not faster than neighbour " << l + 1 << " by M at " << show(y);
        fail(rep.below_faster, os.str(), y);
      }
    }
  }
  ++rep.states_checked;
}

std::vector<YPoint> window_states(std::size_t dim, std::int64_t w) {
  std::size_t side = static_cast<std::size_t>(2 * w + 1), count = 1;
  for (std::size_t d = 0; d < dim; ++d) {
    count *= side;
    if (count > 2'000'000) throw std::invalid_argument("scan window too large");
  }
  std::vector<YPoint> out;
  out.reserve(count);
  YPoint y(dim, -w);
  for (std::size_t c = 0; c < count; ++c) {
    out.push_back(y);
    for (std::size_t d = 0; d < dim; ++d) {
      if (++y[d] <= w) break;
      y[d] = -w;
    }
  }
  return out;
}

std::vector<std::int64_t> abs_edge_diffs(std::span<const std::int64_t> y, const GraphSpec& g) {
  std::vector<std::int64_t> a;
  a.reserve(g.p());
  for (auto [i, j] : g.edges()) a.push_back(std::llabs(f_ij(y, i, j)));
  return a;
}

std::string label_name(int m) { return "D" + std::to_string(m); }

}  // namespace

std::optional<MarginCondition> ConditionReport::margin() const {
  if (above_slower.pass) return MarginCondition::AboveSlower;
  if (below_faster.pass) return MarginCondition::BelowFaster;
  return std::nullopt;
}

ConditionReport check_conditions(const Kernel& kernel, double delta, double margin, std::int64_t window,
                                 double tolerance) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(margin > 0.0 && margin < 1.0)) throw std::invalid_argument("M must lie in (0, 1)");
  ConditionReport rep;
  rep.support.name = "(i) support";
  rep.lower_bound.name = "(ii) lower bound";
  rep.monotone.name = "(iii) monotone";
  rep.above_slower.name = "(iv) peak slower";
  rep.below_faster.name = "(iv') valley faster";
  rep.tolerance = tolerance;

  if (kernel.sign_constant()) {
    rep.exact = true;
    for (const auto& rp : enumerate_patterns(kernel.graph())) {
      check_state(kernel, rp.witness, delta, margin, tolerance, rep);
    }
  } else {
    rep.exact = false;
    for (const auto& y : window_states(kernel.n() - 1, window)) {
      check_state(kernel, y, delta, margin, tolerance, rep);
    }
  }
  for (Verdict* v : {&rep.support, &rep.lower_bound, &rep.monotone, &rep.above_slower, &rep.below_faster}) {
    if (v->pass) v->detail = rep.exact ? "holds on every realizable sign pattern" : "holds on the scanned window";
  }
  return rep;
}

bool DriftConstants::representable() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(C.begin(), C.end(), finite) && std::all_of(k.begin(), k.end(), finite);
}

DriftConstants constants_schedule(std::size_t p, double delta, double margin, MarginCondition variant) {
  if (p == 0) throw std::invalid_argument("schedule needs p >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(margin > 0.0 && margin < 1.0)) throw std::invalid_argument("M must lie in (0, 1)");
  DriftConstants c;
  c.delta = delta;
  c.margin = margin;
  c.p = p;
  c.variant = variant;
  const double pd = static_cast<double>(p);
  const bool reversed = variant == MarginCondition::BelowFaster;
  c.C.push_back(ceil_tolerant((1.0 + pd) / (2.0 * margin)));
  c.k.push_back(1.0);
  for (std::size_t m = 2; m <= p; ++m) {
    const double prev = c.C.back();
    const double exponent = reversed ? pd * pd * prev : pd * prev;
    const double numerator = 1.0 + pd + (reversed ? pd * pd * pd : pd * pd) * prev;
    const double log_bound = std::log(numerator) - std::log(margin) - exponent * std::log(delta);
    const double bound = log_bound > std::log(DBL_MAX) ? std::numeric_limits<double>::infinity()
                                                       : ceil_tolerant(numerator / (margin * std::pow(delta, exponent)));
    c.C.push_back(std::max(pd * prev, bound));
    c.k.push_back(1.0 + exponent);
  }
  return c;
}

DriftConstants user_constants(std::size_t p, double delta, double margin, std::vector<double> C,
                              MarginCondition variant) {
  if (C.size() != p) throw std::invalid_argument("need exactly p thresholds C_1..C_p");
  for (std::size_t m = 0; m < C.size(); ++m) {
    if (!(C[m] > 0.0) || (m > 0 && !(C[m] > C[m - 1]))) {
      throw std::invalid_argument("thresholds must be positive and strictly increasing");
    }
  }
  DriftConstants c;
  c.delta = delta;
  c.margin = margin;
  c.p = p;
  c.variant = variant;
  c.from_schedule = false;
  const double pd = static_cast<double>(p);
  c.C = std::move(C);
  c.k.push_back(1.0);
  for (std::size_t m = 1; m < p; ++m) {
    const double factor = variant == MarginCondition::BelowFaster ? pd * pd : pd;
    c.k.push_back(1.0 + factor * c.C[m - 1]);
  }
  return c;
}

std::vector<int> classify(std::span<const std::int64_t> y, const GraphSpec& graph, const DriftConstants& consts) {
  if (consts.C.size() != graph.p()) throw std::invalid_argument("constants do not match the graph's edge count");
  const auto a = abs_edge_diffs(y, graph);
  const std::size_t p = graph.p();
  auto val = [](std::int64_t v) { return static_cast<double>(v); };
  std::vector<int> labels;
  if (std::all_of(a.begin(), a.end(), [&](auto v) { return val(v) < consts.C[p - 1]; })) labels.push_back(0);
  if (std::all_of(a.begin(), a.end(), [&](auto v) { return val(v) >= consts.C[0]; })) labels.push_back(1);
  for (std::size_t m = 2; m <= p; ++m) {
    const double lo = consts.C[m - 2], hi = consts.C[m - 1];
    const bool reaches = std::any_of(a.begin(), a.end(), [&](auto v) { return val(v) >= hi; });
    const bool gap = std::none_of(a.begin(), a.end(), [&](auto v) { return val(v) >= lo && val(v) < hi; });
    if (reaches && gap) labels.push_back(static_cast<int>(m));
  }
  return labels;
}

int step_class(std::span<const std::int64_t> y, const GraphSpec& graph, const DriftConstants& consts) {
  auto labels = classify(y, graph, consts);
  if (labels.empty()) throw std::logic_error("partition does not cover state " + show(y));
  return labels.front();
}

DriftValue exact_drift(const Kernel& kernel, std::span<const std::int64_t> y, std::size_t steps, std::size_t budget) {
  if (steps == 0) throw std::invalid_argument("drift needs at least one step");
  const GraphSpec& g = kernel.graph();
  std::map<YPoint, long double> dist{{YPoint(y.begin(), y.end()), 1.0L}};
  DriftValue out;
  for (std::size_t s = 0; s < steps; ++s) {
    if (out.work + dist.size() > budget) {
      throw BudgetExceeded("exact drift needs more than " + std::to_string(budget) + " state expansions");
    }
    std::map<YPoint, long double> next;
    for (const auto& [z, pz] : dist) {
      const KernelRow row = kernel.row(z);
      ++out.work;
      if (row.stay > 0.0) next[z] += pz * row.stay;
      for (std::size_t i = 0; i < row.grow.size(); ++i) {
        if (row.grow[i] > 0.0) next[grow(z, i)] += pz * row.grow[i];
      }
    }
    dist = std::move(next);
  }
  const long double f0 = static_cast<long double>(lyapunov_f(y, g));
  long double total = 0.0L, magnitude = 0.0L;
  for (const auto& [z, pz] : dist) {
    const long double d = static_cast<long double>(lyapunov_f(z, g)) - f0;
    total += pz * d;
    magnitude += pz * std::fabs(d);
  }
  out.value = total;
  // each path weight is a product of `steps` factors summed over at most
  // `steps` merges; the final sum adds one more rounding per term
  const long double ops = 3.0L * static_cast<long double>(steps) + 4.0L;
  out.error_bound = magnitude * ops * LDBL_EPSILON;
  return out;
}

std::vector<long double> edge_increments(const Kernel& kernel, std::span<const std::int64_t> y) {
  const GraphSpec& g = kernel.graph();
  const KernelRow row = kernel.row(y);
  std::vector<long double> out;
  out.reserve(g.p());
  for (auto [a, b] : g.edges()) {
    const long double f0 = static_cast<long double>(f_ij(y, a, b));
    long double e = 0.0L;
    for (std::size_t i = 0; i < row.grow.size(); ++i) {
      const long double f1 = static_cast<long double>(f_ij(grow(y, i), a, b));
      e += row.grow[i] * (f1 * f1 - f0 * f0);
    }
    out.push_back(e);
  }
  return out;
}

EdgeMoveOdds edge_move_odds(const Kernel& kernel, std::span<const std::int64_t> y, std::size_t edge) {
  const GraphSpec& g = kernel.graph();
  const auto [a, b] = g.edges().at(edge);
  const KernelRow row = kernel.row(y);
  const std::int64_t f0 = std::llabs(f_ij(y, a, b));
  EdgeMoveOdds odds;
  for (std::size_t i = 0; i < row.grow.size(); ++i) {
    const std::int64_t f1 = std::llabs(f_ij(grow(y, i), a, b));
    if (f1 > f0) odds.grow += row.grow[i];
    if (f1 < f0) odds.shrink += row.grow[i];
  }
  return odds;
}

McDrift monte_carlo_drift(const Kernel& kernel, std::span<const std::int64_t> y, std::size_t steps,
                          std::size_t replicas, std::uint64_t seed) {
  if (replicas < 2) throw std::invalid_argument("Monte Carlo drift needs at least two replicas");
  const GraphSpec& g = kernel.graph();
  const double f0 = static_cast<double>(lyapunov_f(y, g));
  std::vector<double> values(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    CounterRng rng(seed, static_cast<std::uint32_t>(StreamDomain::DriftMonteCarlo) << 24, static_cast<std::uint32_t>(r));
    YPoint z(y.begin(), y.end());
    for (std::size_t s = 0; s < steps; ++s) {
      const KernelRow row = kernel.row(z);
      double u = rng.uniform();
      std::size_t chosen = row.grow.size();  // stay
      for (std::size_t i = 0; i < row.grow.size(); ++i) {
        if (u < row.grow[i]) {
          chosen = i;
          break;
        }
        u -= row.grow[i];
      }
      if (chosen < row.grow.size()) z = grow(z, chosen);
    }
    values[r] = static_cast<double>(lyapunov_f(z, g)) - f0;
  });
  const auto m = simd::moments(values);
  const double nr = static_cast<double>(replicas);
  const double mean = m.sum / nr;
  const double var = std::max(0.0, (m.sum_sq - m.sum * mean) / (nr - 1.0));
  return McDrift{mean, std::sqrt(var / nr), replicas};
}

DriftReport verify_foster(const Kernel& kernel, double delta, double margin, const FosterOptions& options) {
  const GraphSpec& g = kernel.graph();
  DriftReport rep;
  rep.kernel = kernel.name();
  rep.graph = g.describe();
  rep.conditions = check_conditions(kernel, delta, margin, options.window);

  if (!rep.conditions.pass()) {
    for (const Verdict* v : {&rep.conditions.support, &rep.conditions.lower_bound, &rep.conditions.monotone,
                             &rep.conditions.above_slower, &rep.conditions.below_faster}) {
      if (!v->pass && v->witness) rep.witnesses.push_back({v->name + ": " + v->detail, *v->witness, -1, 0.0});
    }
    rep.notes.push_back("hypotheses failed; drift evaluation skipped");
    return rep;
  }

  const std::size_t p = g.p();
  if (p == 0) {
    rep.notes.push_back("single column: the state space has one point");
    rep.pass = true;
    rep.certified = true;
    return rep;
  }

  const MarginCondition variant = *rep.conditions.margin();
  rep.constants = options.user_C ? user_constants(p, delta, margin, *options.user_C, variant)
                                 : constants_schedule(p, delta, margin, variant);
  const DriftConstants& consts = *rep.constants;
  if (!consts.from_schedule) rep.notes.push_back("NON-CERTIFIED: user-supplied thresholds");
  rep.notes.push_back("schedule denominator: M * delta^(k_m - 1)");

  // which classes can be sampled and evaluated at all
  std::vector<bool> feasible(p + 1, false);
  for (std::size_t m = 1; m <= p; ++m) {
    feasible[m] = std::isfinite(consts.C[m - 1]) && consts.C[m - 1] <= kMaxSampleThreshold &&
                  std::isfinite(consts.k[m - 1]) && consts.k[m - 1] <= options.max_steps;
  }

  // states grown along a BFS spanning tree with per-edge magnitudes drawn
  // from the threshold scales
  std::vector<std::pair<std::size_t, std::size_t>> tree;  // (parent, child)
  {
    std::vector<bool> seen(g.n(), false);
    std::vector<std::size_t> order{0};
    seen[0] = true;
    for (std::size_t h = 0; h < order.size(); ++h) {
      for (std::size_t w : g.neighbours(order[h])) {
        if (!seen[w]) {
          seen[w] = true;
          tree.emplace_back(order[h], w);
          order.push_back(w);
        }
      }
    }
  }
  std::size_t top_scale = 0;
  for (std::size_t m = 1; m <= p; ++m) {
    if (std::isfinite(consts.C[m - 1]) && consts.C[m - 1] <= kMaxSampleThreshold) top_scale = m;
  }

  std::vector<std::vector<YPoint>> bucket(p + 1);
  CounterRng rng(options.seed, (static_cast<std::uint32_t>(StreamDomain::DriftMonteCarlo) << 24) | 0xFFFFFFu, 0);
  auto draw = [&](std::size_t scale) -> std::int64_t {
    if (scale == 0) {
      const auto hi = static_cast<std::uint64_t>(std::max(1.0, std::ceil(consts.C[0])));
      return static_cast<std::int64_t>(rng.below(hi));
    }
    const auto lo = static_cast<std::uint64_t>(std::ceil(consts.C[scale - 1]));
    return static_cast<std::int64_t>(lo + rng.below(lo + 1));
  };
  std::size_t wanted = 0;
  for (std::size_t m = 1; m <= p; ++m) wanted += feasible[m] ? 1 : 0;
  const std::size_t max_attempts = options.samples_per_class * (p + 1) * 400;
  for (std::size_t attempt = 0; attempt < max_attempts && wanted > 0 && top_scale > 0; ++attempt) {
    const std::size_t target = 1 + rng.below(top_scale);
    std::vector<std::size_t> scales(tree.size());
    bool reached = false;
    for (auto& s : scales) {
      if (target == 1) {
        s = 1 + rng.below(top_scale);
      } else {
        do {
          s = rng.below(top_scale + 1);
        } while (s == target - 1);
      }
      reached = reached || s >= target;
    }
    if (!reached && !scales.empty()) scales[rng.below(scales.size())] = target + rng.below(top_scale - target + 1);
    std::vector<Height> h(g.n(), 0);
    for (std::size_t e = 0; e < tree.size(); ++e) {
      const std::int64_t mag = draw(scales[e]);
      h[tree[e].second] = h[tree[e].first] + (rng.below(2) ? mag : -mag);
    }
    YPoint y = to_y(h);
    // D_0 is finite but may be astronomically large; the class inequalities
    // hold on all of D_m, so states inside D_0 are kept
    int label = 0;
    for (int m : classify(y, g, consts)) {
      if (m > 0) {
        label = m;
        break;
      }
    }
    if (label == 0 || !feasible[static_cast<std::size_t>(label)]) continue;
    auto& b = bucket[static_cast<std::size_t>(label)];
    if (b.size() < options.samples_per_class) {
      b.push_back(std::move(y));
      if (b.size() == options.samples_per_class) --wanted;
    }
  }

  bool all_ok = true, all_exact_ok = true;
  for (std::size_t m = 1; m <= p; ++m) {
    ClassSummary cs;
    cs.label = static_cast<int>(m);
    cs.k = consts.k[m - 1];
    if (!feasible[m]) {
      cs.note = "not evaluated: thresholds or step count beyond desk scale";
      all_exact_ok = false;
      rep.classes.push_back(cs);
      continue;
    }
    const auto& states = bucket[m];
    cs.n_states = states.size();
    if (states.empty()) {
      cs.note = "no states sampled";
      all_exact_ok = false;
      rep.classes.push_back(cs);
      continue;
    }
    cs.min_drift = std::numeric_limits<double>::infinity();
    cs.max_drift = -std::numeric_limits<double>::infinity();
    bool ok = true;
    const auto steps = static_cast<std::size_t>(cs.k);
    for (std::size_t s = 0; s < states.size(); ++s) {
      double value, upper;
      try {
        const DriftValue dv = exact_drift(kernel, states[s], steps, options.path_budget);
        value = static_cast<double>(dv.value);
        upper = static_cast<double>(dv.value + dv.error_bound);
        ++cs.exact_states;
      } catch (const BudgetExceeded&) {
        const McDrift mc = monte_carlo_drift(kernel, states[s], steps, options.mc_replicas, options.seed + 1 + s);
        value = mc.estimate;
        upper = mc.estimate + options.mc_z * mc.std_error;
      }
      cs.min_drift = std::min(cs.min_drift, value);
      cs.max_drift = std::max(cs.max_drift, value);
      if (upper > -1.0) {
        ok = false;
        if (rep.witnesses.size() < 16) rep.witnesses.push_back({"drift above -1", states[s], cs.label, value});
      }
    }
    cs.drift_ok = ok;
    cs.certified = consts.from_schedule && ok && cs.exact_states == cs.n_states;
    if (cs.exact_states < cs.n_states) cs.note = "Monte Carlo used where enumeration exceeded the budget";
    all_ok = all_ok && ok;
    all_exact_ok = all_exact_ok && cs.certified;
    rep.classes.push_back(cs);
  }

  if (p == 1 && g.n() == 2 && kernel.sign_constant()) {
    // drift is affine in y on each ray where the kernel row is constant
    const auto c1 = static_cast<std::int64_t>(std::ceil(consts.C[0]));
    bool ray_ok = true;
    for (std::int64_t dir : {1, -1}) {
      const YPoint a{dir * c1}, b{dir * (c1 + 1)};
      const DriftValue da = exact_drift(kernel, a, 1), db = exact_drift(kernel, b, 1);
      const bool within = da.value + da.error_bound <= -1.0L;
      const bool non_increasing = db.value - da.value <= da.error_bound + db.error_bound;
      if (!(within && non_increasing)) {
        ray_ok = false;
        rep.witnesses.push_back({"ray certificate failed", a, 1, static_cast<double>(da.value)});
      }
    }
    rep.ray_certificate = ray_ok;
    if (ray_ok) rep.notes.push_back("D1 drift <= -1 proven on both rays |y| >= C_1 (affine drift)");
  }

  rep.pass = all_ok;
  rep.certified = consts.from_schedule && all_ok &&
                  (rep.ray_certificate ? *rep.ray_certificate : false) && all_exact_ok;
  if (!rep.certified && consts.from_schedule && p >= 2) {
    rep.notes.push_back("full certification is only attempted for p = 1; sampled classes reported");
  }
  return rep;
}

nlohmann::json to_json(const ConditionReport& report) {
  auto verdict = [](const Verdict& v) {
    nlohmann::json j{{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}};
    j["witness"] = v.witness ? nlohmann::json(*v.witness) : nlohmann::json(nullptr);
    return j;
  };
  nlohmann::json j;
  j["support"] = verdict(report.support);
  j["lower_bound"] = verdict(report.lower_bound);
  j["monotone"] = verdict(report.monotone);
  j["peak_slower"] = verdict(report.above_slower);
  j["valley_faster"] = verdict(report.below_faster);
  j["exact"] = report.exact;
  j["states_checked"] = report.states_checked;
  j["tolerance"] = report.tolerance;
  j["pass"] = report.pass();
  auto m = report.margin();
  j["margin_condition"] = !m ? "none" : (*m == MarginCondition::AboveSlower ? "iv" : "iv'");
  return j;
}

nlohmann::json to_json(const DriftConstants& c) {
  auto nums = [](const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json("inf"));
    return a;
  };
  return nlohmann::json{{"delta", c.delta},
                        {"M", c.margin},
                        {"p", c.p},
                        {"variant", c.variant == MarginCondition::AboveSlower ? "iv" : "iv'"},
                        {"C", nums(c.C)},
                        {"k", nums(c.k)},
                        {"from_schedule", c.from_schedule},
                        {"representable", c.representable()}};
}

nlohmann::json to_json(const DriftReport& r) {
  nlohmann::json j;
  j["kernel"] = r.kernel;
  j["graph"] = r.graph;
  j["conditions"] = to_json(r.conditions);
  j["constants"] = r.constants ? to_json(*r.constants) : nlohmann::json(nullptr);
  j["classes"] = nlohmann::json::array();
  for (const auto& c : r.classes) {
    nlohmann::json cj{{"label", label_name(c.label)},
                      {"k", c.k},
                      {"n_states", c.n_states},
                      {"exact_states", c.exact_states},
                      {"drift_ok", c.drift_ok},
                      {"certified", c.certified},
                      {"note", c.note}};
    cj["min_drift"] = c.n_states ? nlohmann::json(c.min_drift) : nlohmann::json(nullptr);
    cj["max_drift"] = c.n_states ? nlohmann::json(c.max_drift) : nlohmann::json(nullptr);
    j["classes"].push_back(cj);
  }
  j["witnesses"] = nlohmann::json::array();
  for (const auto& w : r.witnesses) {
    j["witnesses"].push_back({{"reason", w.reason}, {"y", w.y}, {"class", w.label}, {"drift", w.drift}});
  }
  j["ray_certificate"] = r.ray_certificate ? nlohmann::json(*r.ray_certificate) : nlohmann::json(nullptr);
  j["certified"] = r.certified;
  j["pass"] = r.pass;
  j["notes"] = r.notes;
  return j;
}

}  // namespace crystal
