#include "crystal/chain_kernels.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "crystal/simulation.hpp"

namespace crystal {

double KernelRow::total() const { return std::accumulate(grow.begin(), grow.end(), stay); }

Kernel::Kernel(GraphSpec graph, RowFn row, bool sign_constant, std::string name)
    : graph_(std::move(graph)), row_(std::move(row)), sign_constant_(sign_constant), name_(std::move(name)) {
  if (!row_) throw std::invalid_argument("kernel needs a row function");
}

KernelRow Kernel::row(std::span<const std::int64_t> y) const {
  if (y.size() + 1 != n()) throw std::invalid_argument("state has the wrong dimension for this kernel");
  KernelRow r = row_(y);
  if (r.grow.size() != n()) {
    throw std::invalid_argument("kernel '" + name_ + "' produced moves outside {stay, grow(1..n)}");
  }
  return r;
}

std::vector<RateLevel> column_levels(std::span<const std::int64_t> y, Boundary bc) {
  const std::size_t n = y.size() + 1;
  std::vector<RateLevel> levels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t h = y_height(y, i);
    std::int64_t u, v;
    if (bc == Boundary::Zero) {
      // the virtual zero-height neighbour is never above a column
      u = i > 0 ? y_height(y, i - 1) - h : 0;
      v = i + 1 < n ? y_height(y, i + 1) - h : 0;
    } else {
      u = y_height(y, (i + n - 1) % n) - h;
      v = y_height(y, (i + 1) % n) - h;
    }
    levels[i] = level_tilde(u, v);
  }
  return levels;
}

Kernel embedded_jump_kernel(std::size_t n, Boundary bc, const BetaParams& betas) {
  if (n == 0) throw std::invalid_argument("embedded chain needs n >= 1");
  GraphSpec graph = bc == Boundary::Zero ? GraphSpec::path(n) : GraphSpec::cycle(n);
  auto row = [bc, betas](std::span<const std::int64_t> y) {
    auto levels = column_levels(y, bc);
    KernelRow r;
    r.grow.resize(levels.size());
    double total = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) total += r.grow[i] = betas.at(levels[i]);
    for (double& q : r.grow) q /= total;
    return r;
  };
  std::string name = std::string("embedded-") + to_string(bc);
  return Kernel(std::move(graph), row, true, name);
}

Kernel embedded_jump_kernel(const ProcessSpec& spec) {
  if (spec.n == 0) throw std::invalid_argument("embedded chain needs n >= 1");
  return embedded_jump_kernel(spec.n, spec.bc, spec.betas);
}

Kernel example3_kernel(const GraphSpec& graph, const BetaParams& betas) {
  if (betas.beta2() > 1.0) throw std::invalid_argument("example 3 kernel requires beta2 <= 1");
  auto row = [graph, betas](std::span<const std::int64_t> y) {
    const std::size_t n = graph.n();
    KernelRow r;
    r.grow.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      bool all_above = true, none_above = true;
      for (std::size_t l : graph.neighbours(i)) {
        const bool above = f_ij(y, i, l) > 0;
        all_above = all_above && above;
        none_above = none_above && !above;
      }
      // an isolated vertex (n = 1) takes the first branch, matching the
      // vacuous "for all neighbours" reading
      const double beta = all_above ? betas.beta0() : (none_above ? betas.beta2() : betas.beta1());
      sum += r.grow[i] = beta / static_cast<double>(n);
    }
    r.stay = 1.0 - sum;
    return r;
  };
  return Kernel(graph, row, true, "example3");
}

int SignPattern::sign(const GraphSpec& g, std::size_t i, std::size_t l) const {
  const auto& e = g.edges();
  auto key = std::make_pair(std::min(i, l), std::max(i, l));
  auto it = std::lower_bound(e.begin(), e.end(), key);
  if (it == e.end() || *it != key) throw std::invalid_argument("not an edge of the graph");
  const int s = signs_.at(static_cast<std::size_t>(it - e.begin()));
  return i < l ? s : -s;
}

std::string SignPattern::to_string() const {
  std::string s;
  for (auto v : signs_) s += v > 0 ? '+' : (v < 0 ? '-' : '0');
  return s;
}

SignPattern sign_pattern_of(std::span<const std::int64_t> y, const GraphSpec& graph) {
  std::vector<std::int8_t> s;
  s.reserve(graph.p());
  for (auto [i, j] : graph.edges()) {
    const std::int64_t f = f_ij(y, i, j);
    s.push_back(static_cast<std::int8_t>((f > 0) - (f < 0)));
  }
  return SignPattern(std::move(s));
}

std::optional<YPoint> realize(const SignPattern& pattern, const GraphSpec& graph) {
  const std::size_t n = graph.n();
  const auto& edges = graph.edges();
  if (pattern.signs().size() != edges.size()) throw std::invalid_argument("pattern size differs from edge count");

  // equality classes
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (pattern.signs()[k] == 0) parent[find(edges[k].first)] = find(edges[k].second);
  }

  // arcs lower -> higher between classes
  std::vector<std::vector<std::size_t>> up(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const int s = pattern.signs()[k];
    if (s == 0) continue;
    std::size_t hi = find(edges[k].first), lo = find(edges[k].second);
    if (s < 0) std::swap(hi, lo);
    if (hi == lo) return std::nullopt;
    up[lo].push_back(hi);
    ++indegree[hi];
  }

  // longest-path layering from the lowest classes gives the smallest heights
  std::vector<std::int64_t> level(n, 0);
  std::vector<std::size_t> queue;
  std::size_t classes = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (find(v) != v) continue;
    ++classes;
    if (indegree[v] == 0) queue.push_back(v);
  }
  std::size_t processed = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t v = queue[head];
    ++processed;
    for (std::size_t w : up[v]) {
      level[w] = std::max(level[w], level[v] + 1);
      if (--indegree[w] == 0) queue.push_back(w);
    }
  }
  if (processed != classes) return std::nullopt;

  std::vector<Height> heights(n);
  for (std::size_t v = 0; v < n; ++v) heights[v] = level[find(v)];
  return to_y(heights);
}

std::vector<RealizedPattern> enumerate_patterns(const GraphSpec& graph, std::size_t max_edges) {
  const std::size_t p = graph.p();
  if (p > max_edges) {
    throw std::invalid_argument("sign-pattern enumeration limited to " + std::to_string(max_edges) + " edges");
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < p; ++k) total *= 3;
  std::vector<RealizedPattern> out;
  std::vector<std::int8_t> signs(p);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t k = 0; k < p; ++k) {
      signs[k] = static_cast<std::int8_t>(static_cast<int>(c % 3) - 1);
      c /= 3;
    }
    SignPattern pattern(signs);
    if (auto w = realize(pattern, graph)) out.push_back({std::move(pattern), std::move(*w)});
  }
  return out;
}

void write_kernel_rows_csv(std::ostream& os, const Kernel& kernel, std::span<const RealizedPattern> patterns) {
  os << "pattern_id,move,probability\n";
  for (std::size_t id = 0; id < patterns.size(); ++id) {
    KernelRow r = kernel.row(patterns[id].witness);
    os << id << ",stay," << format_double(r.stay) << '\n';
    for (std::size_t i = 0; i < r.grow.size(); ++i) {
      os << id << ",grow_" << i + 1 << ',' << format_double(r.grow[i]) << '\n';
    }
  }
}

}  // namespace crystal
