#include "crystal/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "crystal/chain_kernels.hpp"
#include "crystal/drift_checker.hpp"
#include "crystal/experiments.hpp"
#include "crystal/parallel.hpp"
#include "crystal/simd/kernels.hpp"
#include "crystal/simulation.hpp"
#include "crystal/stationary_stats.hpp"

namespace crystal::cli {

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kOk = 0, kInvalid = 1, kRuntime = 2, kCheckFailed = 3;

using nlohmann::json;

// Validation problems found after parsing (missing seed, bad ranges).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::string betas = "1,2,3";
  std::size_t n = 2;
  std::string bc = "zero";
  double horizon = 100.0;
  std::size_t replicas = 1000;
  std::uint64_t seed = 0;
  std::int64_t truncation = 40;
  std::string out = "out";
  std::size_t threads = 0;
  CLI::Option* seed_opt = nullptr;
};

struct Outcome {
  json summary;
  bool check_failed = false;
};

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw ConfigError("empty entry in list '" + text + "'");
    std::size_t pos = 0;
    const long long v = std::stoll(item, &pos);
    if (pos != item.size() || v < 0) throw ConfigError("bad integer '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) throw ConfigError("bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

/// 1-based indices from the command line to 0-based.
std::vector<std::size_t> zero_based(const std::vector<std::size_t>& v) {
  std::vector<std::size_t> out;
  for (auto i : v) {
    if (i == 0) throw ConfigError("indices are 1-based");
    out.push_back(i - 1);
  }
  return out;
}

void require_seed(const Common& c) {
  if (c.seed_opt->count() == 0) throw ConfigError("--seed is required for stochastic runs");
}

ProcessSpec process(const Common& c) {
  auto spec = ProcessSpec::from_zero(c.n, parse_boundary(c.bc), BetaParams::parse(c.betas));
  spec.validate();
  return spec;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void write_json(const std::filesystem::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

json tally_json(const EventTally& t) {
  json rows = json::array();
  for (const auto& row : t.by_stream_level) rows.push_back({row[0], row[1], row[2]});
  return {{"events", t.events()}, {"jumps", t.jumps}, {"accepted", t.accepted()}, {"by_stream_level", rows}};
}

json aux_json(const AuxCheck& c) {
  return {{"events", c.events},
          {"ordering_violations", c.ordering_violations},
          {"constancy_violations", c.constancy_violations},
          {"implication_violations", c.implication_violations},
          {"u_value_violations", c.u_value_violations},
          {"double_fires", c.double_fires}};
}

json ks_json(const KsComparison& k) {
  return {{"label", k.label},       {"size_a", k.size_a},     {"size_b", k.size_b}, {"statistic", k.statistic},
          {"critical", k.critical}, {"p_value", k.p_value}, {"reject", k.reject}};
}

bool aux_clean(const AuxCheck& c) {
  return c.ordering_violations == 0 && c.constancy_violations == 0 && c.implication_violations == 0 &&
         c.u_value_violations == 0;
}

// --- subcommands -----------------------------------------------------------

struct SimulateOpts {
  std::size_t samples = 101;
  std::string initial;
  bool deltas = false;
  std::uint32_t replica = 0;
};

Outcome run_simulate(const Common& c, const SimulateOpts& o, const std::filesystem::path& dir) {
  require_seed(c);
  auto spec = process(c);
  if (!o.initial.empty()) {
    spec.initial.clear();
    for (auto h : parse_sizes(o.initial)) spec.initial.push_back(static_cast<Height>(h));
    spec.validate();
  }
  if (!(c.horizon >= 0.0)) throw ConfigError("horizon must be nonnegative");
  if (o.samples < 2) throw ConfigError("--samples must be at least 2");
  std::vector<double> times(o.samples);
  for (std::size_t i = 0; i < o.samples; ++i) {
    times[i] = c.horizon * static_cast<double>(i) / static_cast<double>(o.samples - 1);
  }
  times.back() = c.horizon;
  const ClockSource clocks(c.seed);
  auto traj = simulate(spec, c.horizon, clocks, times, o.replica, o.deltas ? SampleMode::Deltas : SampleMode::Heights);
  auto os = open_out(dir / "trajectory.csv");
  write_trajectory_csv(os, traj);
  json final_jumps = traj.jumps.back();
  Outcome out;
  out.summary = {{"tally", tally_json(traj.tally)}, {"final_jumps", final_jumps}};
  out.check_failed = traj.tally.accepted() != traj.tally.jumps;
  return out;
}

struct CoupleOpts {
  Height shift = 5;
  Height max_initial = 3;
};

Outcome run_couple(const Common& c, const CoupleOpts& o) {
  require_seed(c);
  if (c.n > 5) throw ConfigError("couple supports n <= 5");
  if (parse_boundary(c.bc) != Boundary::Zero) throw ConfigError("coupling checks use zero boundary conditions");
  CouplingOptions opt;
  opt.n = c.n;
  opt.betas = BetaParams::parse(c.betas);
  opt.horizon = c.horizon;
  opt.replicas = c.replicas;
  opt.seed = c.seed;
  opt.shift = o.shift;
  opt.max_initial = o.max_initial;
  auto res = coupling_experiment(opt);
  Outcome out;
  out.summary = {{"replicas", res.replicas},
                 {"events", res.events},
                 {"domination_violations", res.domination_violations},
                 {"shift_violations", res.shift_violations},
                 {"restriction_checks", res.restriction_checks},
                 {"restriction_violations", res.restriction_violations},
                 {"pass", res.pass()}};
  out.check_failed = !res.pass();
  return out;
}

Outcome run_aux(const Common& c, const std::string& r_list) {
  require_seed(c);
  const auto betas = BetaParams::parse(c.betas);
  Outcome out;
  out.summary["runs"] = json::array();
  bool ok = true;
  for (auto r : parse_sizes(r_list)) {
    if (r < 2) throw ConfigError("auxiliary process needs r >= 2");
    auto res = aux_experiment(r, betas, c.horizon, c.replicas, c.seed);
    json j = aux_json(res);
    j["r"] = r;
    j["pass"] = aux_clean(res);
    ok = ok && aux_clean(res);
    out.summary["runs"].push_back(j);
  }
  out.summary["replicas"] = c.replicas;
  out.summary["pass"] = ok;
  out.check_failed = !ok;
  return out;
}

struct TailsOpts {
  std::string coords = "1";
  std::size_t floor = 30;
  std::size_t k_min = 1;
  double tv_max = 0.02;
  double slope_tol = 0.1;
  double r2_min = 0.98;
};

Outcome run_tails(const Common& c, const TailsOpts& o, const std::filesystem::path& dir) {
  require_seed(c);
  auto spec = process(c);
  auto coords = zero_based(parse_sizes(o.coords));
  auto est = estimate_tails(spec, c.horizon, c.replicas, c.seed, coords, {o.floor, o.k_min});
  Outcome out;
  out.summary["coordinates"] = json::array();
  for (const auto& e : est) {
    auto os = open_out(dir / ("tails_delta_" + std::to_string(e.coordinate + 1) + ".csv"));
    os << "k,count,prob\n";
    for (std::size_t k = 0; k < e.counts.size(); ++k) os << k << ',' << e.counts[k] << ',' << format_double(e.probs[k]) << '\n';
    json j = {{"coordinate", e.coordinate + 1}, {"samples", e.samples}, {"slope", e.slope},
              {"intercept", e.intercept},       {"r2", e.r2},           {"fit_k", e.fit_k}};
    if (spec.n == 2 && spec.bc == Boundary::Zero) {
      // two columns: the stationary law is known in closed form
      auto law = birth_death_stationary(spec.betas, std::max<std::size_t>(e.abs_law.size(), 60));
      const double tv = total_variation(e.abs_law, law.pmf) + 0.5 * law.truncated_mass;
      const double slope_ref = std::log(law.rho);
      const bool ok = tv <= o.tv_max && std::abs(e.slope - slope_ref) <= o.slope_tol && e.r2 >= o.r2_min;
      j["oracle"] = {{"tv", tv}, {"slope", slope_ref}, {"pass", ok}};
      out.check_failed = out.check_failed || !ok;
    }
    out.summary["coordinates"].push_back(j);
  }
  return out;
}

Outcome run_speed(const Common& c, const std::string& columns) {
  require_seed(c);
  auto spec = process(c);
  const auto cols = columns.empty() ? std::vector<std::size_t>{c.n - 1} : zero_based(parse_sizes(columns));
  Outcome out;
  out.summary["columns"] = json::array();
  for (auto col : cols) {
    auto s = estimate_speed(spec, col, c.horizon, c.replicas, c.seed);
    json j = {{"column", col + 1}, {"t", s.t}, {"replicas", s.replicas}, {"mean", s.mean},
              {"std_error", s.std_error}, {"ci99_low", s.ci_low}, {"ci99_high", s.ci_high}};
    // one column grows at beta0; otherwise the last column stays below beta1
    bool ok;
    if (spec.n == 1) {
      ok = s.ci_low <= spec.betas.beta0() && spec.betas.beta0() <= s.ci_high;
      j["reference"] = spec.betas.beta0();
    } else {
      ok = s.ci_high < spec.betas.beta1();
      j["bound"] = spec.betas.beta1();
    }
    j["pass"] = ok;
    if (spec.bc == Boundary::Zero && col + 1 == spec.n) out.check_failed = out.check_failed || !ok;
    out.summary["columns"].push_back(j);
  }
  return out;
}

Outcome run_stationary(const Common& c, const std::filesystem::path& dir) {
  auto spec = process(c);
  auto st = truncated_stationary(spec, c.truncation);
  {
    auto os = open_out(dir / "stationary.csv");
    const std::size_t width = st.states.empty() ? 0 : st.states[0].size();
    for (std::size_t i = 0; i < width; ++i) os << "delta_" << i + 1 << ',';
    os << "pi\n";
    for (std::size_t s = 0; s < st.states.size(); ++s) {
      for (auto d : st.states[s]) os << d << ',';
      os << format_double(st.pi[s]) << '\n';
    }
  }
  double mass = 0.0, min_pi = 1.0, off_slice = 0.0;
  for (std::size_t s = 0; s < st.states.size(); ++s) {
    mass += st.pi[s];
    min_pi = std::min(min_pi, st.pi[s]);
    Height sum = 0;
    for (auto d : st.states[s]) sum += d;
    if (sum != 0) off_slice += std::abs(st.pi[s]);
  }
  Outcome out;
  out.summary = {{"states", st.states.size()}, {"residual", st.residual}, {"mass", mass},
                 {"min_pi", min_pi},           {"abs_delta_1", st.abs_marginal(0)}};
  bool ok = st.residual < 1e-8 && std::abs(mass - 1.0) < 1e-10 && min_pi >= -1e-14;
  if (spec.n == 2 && spec.bc == Boundary::Zero) {
    auto law = birth_death_stationary(spec.betas, static_cast<std::size_t>(c.truncation));
    // the window cuts the chain at K; compare against the law conditioned on it
    std::vector<double> cond = law.pmf;
    for (double& p : cond) p /= 1.0 - law.truncated_mass;
    const double tv = total_variation(st.abs_marginal(0), cond);
    out.summary["birth_death_tv"] = tv;
    ok = ok && tv < 1e-10;
  }
  if (spec.bc == Boundary::Periodic) {
    out.summary["off_slice_mass"] = off_slice;
    ok = ok && off_slice == 0.0;
  }
  out.summary["pass"] = ok;
  out.check_failed = !ok;
  return out;
}

struct DriftOpts {
  int example = 3;
  std::string graph = "path:2";
  double delta = 0.0;
  double margin = 0.0;
  std::string C;
  std::size_t samples_per_class = 200;
  double max_steps = 5000;
  std::int64_t window = 3;
};

Outcome run_drift(const Common& c, DriftOpts o, const std::filesystem::path& dir) {
  const auto betas = BetaParams::parse(c.betas);
  std::optional<Kernel> kernel;
  double n = 0;
  if (o.example == 3) {
    auto g = GraphSpec::parse(o.graph);
    kernel = example3_kernel(g, betas);
    n = static_cast<double>(g.n());
    if (o.delta == 0.0) o.delta = betas.beta0() / n;
    if (o.margin == 0.0) o.margin = (betas.beta1() - betas.beta0()) / n;
  } else if (o.example == 1 || o.example == 2) {
    kernel = embedded_jump_kernel(c.n, o.example == 1 ? Boundary::Zero : Boundary::Periodic, betas);
    n = static_cast<double>(c.n);
    if (o.delta == 0.0) o.delta = betas.beta0() / (n * betas.beta2());
    if (o.margin == 0.0) o.margin = (betas.beta1() - betas.beta0()) / (n * betas.beta2());
  } else {
    throw ConfigError("--example must be 1, 2 or 3");
  }
  FosterOptions fo;
  if (!o.C.empty()) fo.user_C = parse_doubles(o.C);
  fo.samples_per_class = o.samples_per_class;
  fo.seed = c.seed_opt->count() ? c.seed : 1;
  fo.max_steps = o.max_steps;
  fo.window = o.window;
  auto report = verify_foster(*kernel, o.delta, o.margin, fo);
  write_json(dir / "drift_report.json", to_json(report));
  if (kernel->graph().p() <= kMaxPatternEdges) {
    auto patterns = enumerate_patterns(kernel->graph());
    auto os = open_out(dir / "kernel_rows.csv");
    write_kernel_rows_csv(os, *kernel, patterns);
  }
  Outcome out;
  out.summary = {{"kernel", report.kernel}, {"graph", report.graph}, {"delta", o.delta}, {"margin", o.margin},
                 {"conditions_pass", report.conditions.pass()}, {"certified", report.certified},
                 {"pass", report.pass}};
  out.check_failed = !report.pass;
  return out;
}

struct MartingaleOpts {
  std::size_t r = 2;
  double alpha = 0.05;
  std::string times = "1,5,10";
  double alpha_cap = 0.1;
  double z = 4.0;
};

Outcome run_martingale(const Common& c, const MartingaleOpts& o, const std::filesystem::path& dir) {
  require_seed(c);
  if (o.alpha > o.alpha_cap) throw ConfigError("alpha above the cap (raise --alpha-cap to override)");
  auto res = martingale_mean(o.r, BetaParams::parse(c.betas), o.alpha, parse_doubles(o.times), c.replicas, c.seed);
  auto dump = [&](const MartingaleCheck& m, const std::string& file) {
    auto os = open_out(dir / file);
    os << "time,mean,se\n";
    for (std::size_t i = 0; i < m.times.size(); ++i) {
      os << format_double(m.times[i]) << ',' << format_double(m.mean[i]) << ',' << format_double(m.std_error[i]) << '\n';
    }
  };
  dump(res.gap, "martingale_gap.csv");
  dump(res.tip, "martingale_tip.csv");
  const double worst = std::max(res.gap.max_standardized_deviation(), res.tip.max_standardized_deviation());
  const bool ok = worst <= o.z && aux_clean(res.invariants);
  Outcome out;
  out.summary = {{"r", o.r},
                 {"alpha", o.alpha},
                 {"replicas", c.replicas},
                 {"gap_max_z", res.gap.max_standardized_deviation()},
                 {"tip_max_z", res.tip.max_standardized_deviation()},
                 {"z_limit", o.z},
                 {"invariants", aux_json(res.invariants)},
                 {"pass", ok}};
  out.check_failed = !ok;
  return out;
}

struct MidpointOpts {
  std::string n_list = "2,4";
  std::size_t coord = 1;
  std::size_t permutations = 1000;
  double level = 0.01;
  bool allow_off_midpoint = false;
};

Outcome run_midpoint(const Common& c, const MidpointOpts& o, const std::filesystem::path& dir) {
  require_seed(c);
  if (o.coord == 0) throw ConfigError("--coord is 1-based");
  const auto betas = BetaParams::parse(c.betas);
  auto ns = parse_sizes(o.n_list);
  MidpointOptions mo{o.permutations, o.level, !o.allow_off_midpoint};
  auto rep = midpoint_invariance(betas, ns, o.coord - 1, c.horizon, c.replicas, c.seed, mo);
  Outcome out;
  json cmp = json::array();
  for (const auto& k : rep.comparisons) cmp.push_back(ks_json(k));
  out.summary = {{"midpoint", rep.midpoint}, {"n_list", rep.n_list}, {"coordinate", o.coord},
                 {"t", rep.t},               {"replicas", rep.replicas}, {"comparisons", cmp},
                 {"any_reject", rep.any_reject}};
  auto os = open_out(dir / "midpoint.csv");
  os << "label,statistic,critical,p_value,reject\n";
  for (const auto& k : rep.comparisons) {
    os << k.label << ',' << format_double(k.statistic) << ',' << format_double(k.critical) << ','
       << format_double(k.p_value) << ',' << (k.reject ? 1 : 0) << '\n';
  }
  // rejection only counts as a failure where invariance is claimed
  out.check_failed = rep.midpoint && rep.any_reject;
  return out;
}

json echo_options(const CLI::App& app) {
  json j = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string key = opt->get_lnames().front();
    if (key == "help" || key == "version" || key == "config") continue;
    auto res = opt->results();
    if (opt->get_type_size() == 0) {
      j[key] = opt->count() > 0;
    } else if (!res.empty()) {
      j[key] = res.size() == 1 ? json(res[0]) : json(res);
    } else {
      j[key] = opt->get_default_str();
    }
  }
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Crystal-growth jump process simulator and stability toolkit", "crystal_drift"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags override it");
  app.set_version_flag("--version", kVersion);

  Common c;
  app.add_option("--betas", c.betas, "growth rates beta0,beta1,beta2 with 0 < beta0 < beta1 < beta2")->capture_default_str();
  app.add_option("--n", c.n, "number of columns")->capture_default_str();
  app.add_option("--bc", c.bc, "boundary condition: zero or periodic")->capture_default_str();
  app.add_option("--horizon,-t", c.horizon, "simulated time")->capture_default_str();
  app.add_option("--replicas", c.replicas, "independent replicas")->capture_default_str();
  c.seed_opt = app.add_option("--seed", c.seed, "RNG seed (required for stochastic runs)");
  app.add_option("--truncation", c.truncation, "window K for truncated solves")->capture_default_str();
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads (default: CRYSTAL_DRIFT_THREADS or all cores)");

  SimulateOpts sim;
  auto* s_sim = app.add_subcommand("simulate", "single trajectory to trajectory.csv");
  s_sim->add_option("--samples", sim.samples, "evenly spaced sample times")->capture_default_str();
  s_sim->add_option("--initial", sim.initial, "initial heights h1,...,hn (default all zero)");
  s_sim->add_flag("--deltas", sim.deltas, "record height differences instead of heights");
  s_sim->add_option("--replica", sim.replica, "replica index")->capture_default_str();

  CoupleOpts cpl;
  auto* s_cpl = app.add_subcommand("couple", "path-wise coupling checks on shared clocks");
  s_cpl->add_option("--shift", cpl.shift, "constant shift of the translated copy")->capture_default_str();
  s_cpl->add_option("--max-initial", cpl.max_initial, "initial heights drawn from 0..max")->capture_default_str();

  std::string r_list = "2,3";
  auto* s_aux = app.add_subcommand("aux", "auxiliary sandwich process invariants");
  s_aux->add_option("--r", r_list, "list of r values")->capture_default_str();

  TailsOpts tl;
  auto* s_tl = app.add_subcommand("tails", "empirical tails of height differences");
  s_tl->add_option("--coords", tl.coords, "1-based delta coordinates")->capture_default_str();
  s_tl->add_option("--floor", tl.floor, "minimum count for a tail point to enter the fit")->capture_default_str();
  s_tl->add_option("--k-min", tl.k_min, "smallest k in the fit")->capture_default_str();
  s_tl->add_option("--tv-max", tl.tv_max, "two-column oracle: TV tolerance")->capture_default_str();
  s_tl->add_option("--slope-tol", tl.slope_tol, "two-column oracle: slope tolerance")->capture_default_str();
  s_tl->add_option("--r2-min", tl.r2_min, "two-column oracle: minimum R^2")->capture_default_str();

  std::string speed_cols;
  auto* s_sp = app.add_subcommand("speed", "growth speed X_j(t)/t");
  s_sp->add_option("--columns", speed_cols, "1-based columns (default: last)");

  app.add_subcommand("stationary", "truncated stationary solve (n <= 4)");

  DriftOpts dr;
  auto* s_dr = app.add_subcommand("drift-check", "Foster-Lyapunov conditions and drift verification");
  s_dr->add_option("--example", dr.example, "kernel: 1 embedded zero-BC, 2 embedded periodic, 3 lazy graph kernel")
      ->capture_default_str();
  s_dr->add_option("--graph", dr.graph, "graph for the lazy kernel, e.g. path:3, cycle:4, edges:4:1-2,2-3")
      ->capture_default_str();
  s_dr->add_option("--delta", dr.delta, "lower bound delta (default: derived from the kernel)");
  s_dr->add_option("--margin", dr.margin, "margin M (default: derived from the kernel)");
  s_dr->add_option("--C", dr.C, "user thresholds C_1,...,C_p (result is not certified)");
  s_dr->add_option("--samples-per-class", dr.samples_per_class, "states sampled per class")->capture_default_str();
  s_dr->add_option("--max-steps", dr.max_steps, "largest step count evaluated")->capture_default_str();
  s_dr->add_option("--window", dr.window, "scan window for kernels that are not sign-constant")->capture_default_str();

  MartingaleOpts mg;
  auto* s_mg = app.add_subcommand("martingale", "exponential martingale means of the auxiliary process");
  s_mg->add_option("--r", mg.r, "auxiliary process index r >= 2")->capture_default_str();
  s_mg->add_option("--alpha", mg.alpha, "exponent alpha")->capture_default_str();
  s_mg->add_option("--times", mg.times, "sample times")->capture_default_str();
  s_mg->add_option("--alpha-cap", mg.alpha_cap, "largest accepted alpha")->capture_default_str();
  s_mg->add_option("--z", mg.z, "allowed standardized deviation from 1")->capture_default_str();

  MidpointOpts md;
  auto* s_md = app.add_subcommand("midpoint-check", "cross-n law comparison when beta1 = (beta0 + beta2)/2");
  s_md->add_option("--n-list", md.n_list, "column counts to compare")->capture_default_str();
  s_md->add_option("--coord", md.coord, "1-based delta coordinate")->capture_default_str();
  s_md->add_option("--permutations", md.permutations, "resamples for the KS null")->capture_default_str();
  s_md->add_option("--level", md.level, "test level")->capture_default_str();
  s_md->add_flag("--allow-off-midpoint", md.allow_off_midpoint, "run even when beta1 is not the midpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const auto started = std::chrono::steady_clock::now();
  try {
    if (c.threads > 0) set_default_threads(c.threads);
    const std::filesystem::path dir(c.out);
    std::filesystem::create_directories(dir);
    const std::string name = sub->get_name();

    Outcome res;
    if (name == "simulate") res = run_simulate(c, sim, dir);
    else if (name == "couple") res = run_couple(c, cpl);
    else if (name == "aux") res = run_aux(c, r_list);
    else if (name == "tails") res = run_tails(c, tl, dir);
    else if (name == "speed") res = run_speed(c, speed_cols);
    else if (name == "stationary") res = run_stationary(c, dir);
    else if (name == "drift-check") res = run_drift(c, dr, dir);
    else if (name == "martingale") res = run_martingale(c, mg, dir);
    else res = run_midpoint(c, md, dir);

    write_json(dir / (name + ".json"), res.summary);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json manifest = {{"tool", "crystal_drift"},
                     {"version", kVersion},
                     {"subcommand", name},
                     {"config", echo_options(app)},
                     {"subcommand_config", echo_options(*sub)},
                     {"threads", default_threads()},
                     {"isa", simd::to_string(simd::active_isa())},
                     {"wall_time_s", wall},
                     {"timestamp", utc_timestamp()},
                     {"check_failed", res.check_failed}};
    write_json(dir / "manifest.json", manifest);
    std::cout << res.summary.dump(2) << '\n';
    return res.check_failed ? kCheckFailed : kOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace crystal::cli
