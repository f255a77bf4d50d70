#include "treejacobi/cover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace treejacobi {

namespace {

std::uint64_t saturating_add(std::uint64_t x, std::uint64_t y) {
  return x > std::numeric_limits<std::uint64_t>::max() - y ? std::numeric_limits<std::uint64_t>::max()
                                                           : x + y;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// Largest eigenvalue of the symmetric tridiagonal matrix (alpha, beta) by
// Sturm-sequence bisection.
double tridiagonal_top(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const std::size_t k = alpha.size();
  double lo = std::numeric_limits<double>::max(), hi = -lo;
  for (std::size_t i = 0; i < k; ++i) {
    double radius = (i > 0 ? std::abs(beta[i - 1]) : 0.0) + (i + 1 < k ? std::abs(beta[i]) : 0.0);
    lo = std::min(lo, alpha[i] - radius);
    hi = std::max(hi, alpha[i] + radius);
  }
  // Number of eigenvalues strictly greater than x.
  auto count_above = [&](double x) {
    std::size_t above = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      double off = i > 0 ? beta[i - 1] * beta[i - 1] : 0.0;
      d = alpha[i] - x - (i > 0 ? off / d : 0.0);
      if (d == 0.0) d = -std::numeric_limits<double>::epsilon() * (std::abs(x) + 1.0);
      if (d > 0.0) ++above;
    }
    return above;
  };
  const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * scale) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_above(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

int TreeBall::degree(std::size_t x) const {
  auto [first, last] = children(x);
  return static_cast<int>(last - first) + (nodes_[x].parent >= 0 ? 1 : 0);
}

std::uint64_t ball_node_count(const FiniteGraph& graph, int base, int radius) {
  const int q = graph.edge_count();
  // Directed edge 2e runs u -> v, 2e + 1 runs v -> u.
  auto head = [&](int d) { const auto& e = graph.edge(d / 2); return d % 2 == 0 ? e.v : e.u; };
  std::vector<std::uint64_t> paths(2 * q, 0);
  for (int e : graph.incident(base)) paths[graph.edge(e).u == base ? 2 * e : 2 * e + 1] = 1;
  std::uint64_t total = 1;
  for (int level = 1; level <= radius; ++level) {
    for (auto c : paths) total = saturating_add(total, c);
    if (level == radius) break;
    std::vector<std::uint64_t> next(2 * q, 0);
    for (int d = 0; d < 2 * q; ++d) {
      if (paths[d] == 0) continue;
      int v = head(d);
      for (int e : graph.incident(v)) {
        if (e == d / 2) continue;
        int out = graph.edge(e).u == v ? 2 * e : 2 * e + 1;
        next[out] = saturating_add(next[out], paths[d]);
      }
    }
    paths = std::move(next);
  }
  return total;
}

TreeBall build_ball(const FiniteGraph& graph, const JacobiParams& params, int base, int radius,
                    const BallOptions& options) {
  if (radius < 0) throw std::invalid_argument("build_ball: radius must be >= 0");
  if (base < 0 || base >= graph.vertex_count())
    throw std::invalid_argument("build_ball: base vertex index out of range");
  validate_params(graph, params);
  const auto count = ball_node_count(graph, base, radius);
  if (count > options.node_budget)
    throw std::length_error("build_ball: radius " + std::to_string(radius) + " needs " +
                            std::to_string(count) + " nodes, budget is " +
                            std::to_string(options.node_budget));

  TreeBall ball;
  ball.radius_ = radius;
  ball.nodes_.reserve(count);
  ball.a_up_.reserve(count);
  ball.b_.reserve(count);
  ball.child_offsets_.reserve(count + 1);

  ball.nodes_.push_back({base, -1, -1, 0});
  ball.a_up_.push_back(0.0);
  ball.b_.push_back(params.b[base]);
  for (std::size_t x = 0; x < ball.nodes_.size(); ++x) {
    ball.child_offsets_.push_back(ball.nodes_.size());
    const TreeNode node = ball.nodes_[x];
    if (node.depth == radius) continue;
    for (int e : graph.incident(node.vertex)) {
      if (e == node.via_edge) continue;
      int w = graph.other_end(e, node.vertex);
      ball.nodes_.push_back({w, static_cast<int>(x), e, node.depth + 1});
      ball.a_up_.push_back(params.a[e]);
      ball.b_.push_back(params.b[w]);
    }
  }
  ball.child_offsets_.push_back(ball.nodes_.size());
  return ball;
}

std::vector<std::size_t> LiftedVector::support() const {
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < values.size(); ++x)
    if (values[x] != 0.0) out.push_back(x);
  return out;
}

int LiftedVector::support_depth(const TreeBall& ball) const {
  int depth = -1;
  for (std::size_t x = 0; x < values.size(); ++x)
    if (values[x] != 0.0) depth = std::max(depth, ball.node(x).depth);
  return depth;
}

void apply_compressed(const TreeBall& ball, std::span<const double> v, std::span<double> out) {
  const auto& nodes = ball.nodes();
  for (std::size_t x = 0; x < nodes.size(); ++x) {
    double s = ball.b(x) * v[x];
    if (nodes[x].parent >= 0) s += ball.a_to_parent(x) * v[static_cast<std::size_t>(nodes[x].parent)];
    auto [first, last] = ball.children(x);
    for (std::size_t c = first; c < last; ++c) s += ball.a_to_parent(c) * v[c];
    out[x] = s;
  }
}

LiftedVector apply_H(const TreeBall& ball, const LiftedVector& v) {
  if (v.values.size() != ball.size())
    throw std::invalid_argument("apply_H: vector size does not match the ball");
  if (v.support_depth(ball) >= ball.radius())
    throw std::invalid_argument("apply_H: support touches the boundary shell at depth " +
                                std::to_string(ball.radius()));
  LiftedVector out{std::vector<double>(ball.size(), 0.0)};
  apply_compressed(ball, v.values, out.values);
  return out;
}

LiftedVector lift_psi(const TreeBall& ball, const Eigen::VectorXd& psi) {
  LiftedVector out{std::vector<double>(ball.size())};
  for (std::size_t x = 0; x < ball.size(); ++x) out.values[x] = psi[ball.node(x).vertex];
  return out;
}

double lanczos_top(const TreeBall& ball, const LanczosOptions& options) {
  const std::size_t n = ball.size();
  const auto steps = static_cast<std::size_t>(std::max(1, options.max_iterations));
  const std::size_t limit = std::min(n, steps);

  std::vector<std::vector<double>> basis;
  basis.reserve(limit);
  basis.emplace_back(n, 0.0);
  basis[0][0] = 1.0;

  std::vector<double> alpha, beta;
  std::vector<double> w(n);
  double previous = std::numeric_limits<double>::quiet_NaN();
  double top = 0.0;
  int stable = 0;
  double scale = 0.0;
  for (std::size_t k = 0; k < limit; ++k) {
    const auto& qk = basis[k];
    apply_compressed(ball, qk, w);
    const double a = dot(qk, w);
    alpha.push_back(a);
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * qk[i];
    if (k > 0)
      for (std::size_t i = 0; i < n; ++i) w[i] -= beta[k - 1] * basis[k - 1][i];
    // Full reorthogonalisation, two passes.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qj : basis) {
        const double c = dot(qj, w);
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * qj[i];
      }
    const double b = std::sqrt(dot(w, w));
    scale = std::max({scale, std::abs(a), b});

    top = tridiagonal_top(alpha, beta);
    if (!std::isnan(previous) && std::abs(top - previous) < options.ritz_tolerance)
      ++stable;
    else
      stable = 0;
    previous = top;
    // Invariant subspace reached, or the top Ritz value has settled.
    if (b <= 1e-12 * std::max(scale, 1.0) || stable >= 2 || k + 1 == limit) break;
    beta.push_back(b);
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / b;
    basis.push_back(std::move(next));
  }
  return top;
}

IdentitySides ground_state_identity(const TreeBall& ball, const LiftedVector& psi,
                                    const LiftedVector& f, double sigma) {
  if (psi.values.size() != ball.size() || f.values.size() != ball.size())
    throw std::invalid_argument("ground_state_identity: vector size does not match the ball");
  const int depth = f.support_depth(ball);
  if (depth > ball.radius() - 2)
    throw std::invalid_argument("ground_state_identity: f must be supported at depth <= R - 2 (R = " +
                                std::to_string(ball.radius()) + ", support depth " +
                                std::to_string(depth) + ")");
  IdentitySides sides;
  if (depth < 0) return sides;

  LiftedVector phi{std::vector<double>(ball.size(), 0.0)};
  const auto support = f.support();
  for (auto x : support) phi.values[x] = f.values[x] * psi.values[x];
  const auto h_phi = apply_H(ball, phi);
  double norm_sq = 0.0, form = 0.0;
  for (std::size_t x = 0; x < ball.size(); ++x) {
    norm_sq += phi.values[x] * phi.values[x];
    form += phi.values[x] * h_phi.values[x];
  }
  sides.lhs = sigma * norm_sq - form;

  const auto& nodes = ball.nodes();
  auto edge_term = [&](std::size_t child) {
    const auto parent = static_cast<std::size_t>(nodes[child].parent);
    const double diff = f.values[child] - f.values[parent];
    return ball.a_to_parent(child) * psi.values[child] * psi.values[parent] * diff * diff;
  };
  for (auto x : support) {
    if (nodes[x].parent >= 0) sides.rhs += edge_term(x);
    auto [first, last] = ball.children(x);
    for (std::size_t c = first; c < last; ++c)
      if (f.values[c] == 0.0) sides.rhs += edge_term(c);
  }
  return sides;
}

}  // namespace treejacobi
