#include "crystal/core_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace crystal {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a count: '" + s + "'");
  }
  return v;
}

}  // namespace

BetaParams::BetaParams(double beta0, double beta1, double beta2) : b_{beta0, beta1, beta2} {
  if (!(std::isfinite(beta0) && std::isfinite(beta1) && std::isfinite(beta2))) {
    throw std::invalid_argument("rates must be finite");
  }
  if (!(0.0 < beta0 && beta0 < beta1 && beta1 < beta2)) {
    std::ostringstream os;
    os << "rates must satisfy 0 < beta0 < beta1 < beta2, got " << beta0 << ", " << beta1 << ", "
       << beta2;
    throw std::invalid_argument(os.str());
  }
}

BetaParams BetaParams::parse(const std::string& text) {
  auto parts = split(text, ',');
  if (parts.size() != 3) throw std::invalid_argument("expected three rates b0,b1,b2: '" + text + "'");
  double v[3];
  for (int i = 0; i < 3; ++i) {
    try {
      std::size_t used = 0;
      v[i] = std::stod(parts[i], &used);
      if (used != parts[i].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("bad rate '" + parts[i] + "'");
    }
  }
  return BetaParams(v[0], v[1], v[2]);
}

std::string to_string(Boundary bc) { return bc == Boundary::Zero ? "zero" : "periodic"; }

Boundary parse_boundary(const std::string& text) {
  if (text == "zero") return Boundary::Zero;
  if (text == "periodic") return Boundary::Periodic;
  throw std::invalid_argument("boundary must be 'zero' or 'periodic', got '" + text + "'");
}

RateLevel level_r(Height a, Height b, Height c) {
  if (b < std::min(a, c)) return 2;
  if (b < std::max(a, c)) return 1;
  return 0;
}

RateLevel level_tilde(Height u, Height v) {
  if (std::min(u, v) > 0) return 2;
  if (std::max(u, v) > 0) return 1;
  return 0;
}

Rate rate_r(Height a, Height b, Height c, const BetaParams& betas) {
  return betas.at(level_r(a, b, c));
}

Rate rate_tilde(Height u, Height v, const BetaParams& betas) {
  return betas.at(level_tilde(u, v));
}

HeightState::HeightState(std::vector<Height> h) : heights(std::move(h)) {
  for (Height x : heights) {
    if (x < 0) throw std::invalid_argument("heights must be nonnegative");
  }
}

std::pair<Height, Height> neighbours(std::span<const Height> heights, std::size_t j, Boundary bc) {
  const std::size_t n = heights.size();
  if (j >= n) throw std::out_of_range("site index out of range");
  if (bc == Boundary::Zero) {
    return {j == 0 ? 0 : heights[j - 1], j + 1 == n ? 0 : heights[j + 1]};
  }
  return {heights[(j + n - 1) % n], heights[(j + 1) % n]};
}

RateLevel site_level(std::span<const Height> heights, std::size_t j, Boundary bc) {
  auto [left, right] = neighbours(heights, j, bc);
  return level_r(left, heights[j], right);
}

Rate site_rate(const HeightState& state, std::size_t j, Boundary bc, const BetaParams& betas) {
  return betas.at(site_level(state.heights, j, bc));
}

DeltaState DeltaState::of(std::span<const Height> heights, Boundary bc) {
  DeltaState d;
  d.bc = bc;
  const std::size_t n = heights.size();
  if (n == 0) return d;
  const std::size_t len = bc == Boundary::Zero ? n - 1 : n;
  d.deltas.resize(len);
  for (std::size_t i = 0; i < len; ++i) d.deltas[i] = heights[i] - heights[(i + 1) % n];
  return d;
}

Height DeltaState::sum() const { return std::accumulate(deltas.begin(), deltas.end(), Height{0}); }

Height DeltaState::running_max(std::size_t j) const {
  if (j >= deltas.size()) throw std::out_of_range("delta index out of range");
  return *std::max_element(deltas.begin(), deltas.begin() + static_cast<std::ptrdiff_t>(j) + 1);
}

ProcessSpec ProcessSpec::from_zero(std::size_t n, Boundary bc, const BetaParams& betas) {
  ProcessSpec s{n, bc, betas, std::vector<Height>(n, 0)};
  s.validate();
  return s;
}

void ProcessSpec::validate() const {
  if (n == 0) throw std::invalid_argument("process needs at least one column");
  if (initial.size() != n) throw std::invalid_argument("initial heights must have n entries");
  for (Height h : initial) {
    if (h < 0) throw std::invalid_argument("initial heights must be nonnegative");
  }
}

GraphSpec::GraphSpec(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges)
    : n_(n), adj_(n) {
  if (n == 0) throw std::invalid_argument("graph needs at least one vertex");
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) throw std::invalid_argument("edge endpoint out of range");
    if (a == b) throw std::invalid_argument("self-loops are not allowed");
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [a, b] : edges_) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto& nb : adj_) std::sort(nb.begin(), nb.end());

  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto w : adj_[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  if (reached != n) throw std::invalid_argument("graph must be connected");
}

GraphSpec GraphSpec::path(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return GraphSpec(n, std::move(e));
}

GraphSpec GraphSpec::cycle(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  if (n >= 3) e.emplace_back(0, n - 1);
  return GraphSpec(n, std::move(e));
}

GraphSpec GraphSpec::complete(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return GraphSpec(n, std::move(e));
}

GraphSpec GraphSpec::star(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 1; i < n; ++i) e.emplace_back(0, i);
  return GraphSpec(n, std::move(e));
}

GraphSpec GraphSpec::parse(const std::string& text) {
  auto parts = split(text, ':');
  if (parts.size() < 2) throw std::invalid_argument("graph must look like kind:n, got '" + text + "'");
  const std::string& kind = parts[0];
  const std::size_t n = parse_size(parts[1]);
  if (kind == "path" && parts.size() == 2) return path(n);
  if (kind == "cycle" && parts.size() == 2) return cycle(n);
  if (kind == "complete" && parts.size() == 2) return complete(n);
  if (kind == "star" && parts.size() == 2) return star(n);
  if (kind == "edges" && parts.size() == 3) {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (const auto& item : split(parts[2], ',')) {
      auto ends = split(item, '-');
      if (ends.size() != 2) throw std::invalid_argument("bad edge '" + item + "'");
      std::size_t a = parse_size(ends[0]), b = parse_size(ends[1]);
      if (a == 0 || b == 0) throw std::invalid_argument("edge labels are 1-based");
      e.emplace_back(a - 1, b - 1);
    }
    return GraphSpec(n, std::move(e));
  }
  throw std::invalid_argument("unknown graph '" + text + "'");
}

bool GraphSpec::has_edge(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(i, j));
}

std::string GraphSpec::describe() const {
  std::ostringstream os;
  os << "n=" << n_ << " edges=";
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (k) os << ',';
    os << edges_[k].first + 1 << '-' << edges_[k].second + 1;
  }
  return os.str();
}

std::int64_t f_ij(std::span<const std::int64_t> y, std::size_t i, std::size_t j) {
  const std::size_t n = y.size() + 1;
  if (i >= n || j >= n) throw std::out_of_range("vertex out of range");
  if (i == j) throw std::invalid_argument("f_ij requires i != j");
  return y_height(y, i) - y_height(y, j);
}

YPoint growth_vector(std::size_t i, std::size_t n) {
  if (n == 0 || i >= n) throw std::out_of_range("vertex out of range");
  if (i + 1 == n) return YPoint(n - 1, -1);
  YPoint e(n - 1, 0);
  e[i] = 1;
  return e;
}

YPoint grow(std::span<const std::int64_t> y, std::size_t i) {
  YPoint out(y.begin(), y.end());
  if (i < out.size()) {
    ++out[i];
  } else {
    for (auto& v : out) --v;
  }
  return out;
}

std::int64_t lyapunov_f(std::span<const std::int64_t> y, const GraphSpec& g) {
  std::int64_t total = 0;
  for (auto [i, j] : g.edges()) {
    const std::int64_t d = y_height(y, i) - y_height(y, j);
    total += d * d;
  }
  return total;
}

YPoint to_y(std::span<const Height> heights) {
  if (heights.empty()) return {};
  YPoint y(heights.size() - 1);
  const Height ref = heights.back();
  for (std::size_t i = 0; i + 1 < heights.size(); ++i) y[i] = heights[i] - ref;
  return y;
}

}  // namespace crystal
