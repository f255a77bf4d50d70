#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "treejacobi/graph.hpp"

namespace treejacobi {

struct TreeNode {
  int vertex = 0;     // projection to the base graph
  int parent = -1;    // -1 for the root
  int via_edge = -1;  // base edge used to reach this node from its parent
  int depth = 0;
};

struct BallOptions {
  std::size_t node_budget = 5'000'000;
};

/// Ball of radius R in the universal cover, i.e. the tree of non-backtracking
/// paths of length <= R from a base vertex. Nodes are in breadth-first order,
/// so the children of each node are contiguous and parents precede children.
class TreeBall {
 public:
  int radius() const noexcept { return radius_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& node(std::size_t x) const { return nodes_.at(x); }

  /// Children of node x as a contiguous index range [first, last).
  std::pair<std::size_t, std::size_t> children(std::size_t x) const {
    return {child_offsets_[x], child_offsets_[x + 1]};
  }
  bool interior(std::size_t x) const { return nodes_[x].depth < radius_; }
  /// Lifted a of the tree edge joining x to its parent (0 at the root).
  double a_to_parent(std::size_t x) const { return a_up_[x]; }
  double b(std::size_t x) const { return b_[x]; }
  /// Degree of x inside the ball.
  int degree(std::size_t x) const;

  friend TreeBall build_ball(const FiniteGraph&, const JacobiParams&, int, int, const BallOptions&);

 private:
  int radius_ = 0;
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> child_offsets_;
  std::vector<double> a_up_;
  std::vector<double> b_;
};

/// Number of non-backtracking paths of length <= radius from base (the ball size),
/// saturating at UINT64_MAX.
std::uint64_t ball_node_count(const FiniteGraph& graph, int base, int radius);

/// Throws std::invalid_argument for radius < 0 or an unknown base, and
/// std::length_error when the ball would exceed the node budget.
TreeBall build_ball(const FiniteGraph& graph, const JacobiParams& params, int base, int radius,
                    const BallOptions& options = {});

/// Real function on the nodes of a ball. Entries that are exactly zero are
/// outside the support.
struct LiftedVector {
  std::vector<double> values;

  std::vector<std::size_t> support() const;
  /// Largest depth carrying a nonzero value, or -1 for the zero vector.
  int support_depth(const TreeBall& ball) const;
};

/// (Hv)(x) = b(x) v(x) + sum over ball edges at x of a v(neighbour).
/// Throws std::invalid_argument when v touches the boundary shell (depth R),
/// where the compression differs from the tree operator.
LiftedVector apply_H(const TreeBall& ball, const LiftedVector& v);

/// Compression of H to the ball, no support check (used by Lanczos).
void apply_compressed(const TreeBall& ball, std::span<const double> v, std::span<double> out);

/// Value at each node = psi at its projection.
LiftedVector lift_psi(const TreeBall& ball, const Eigen::VectorXd& psi);

struct LanczosOptions {
  int max_iterations = 300;
  double ritz_tolerance = 1e-12;
};

/// Largest eigenvalue of the ball compression of H by Lanczos with full
/// reorthogonalisation, started from the root delta. A lower bound for sup spec(H).
double lanczos_top(const TreeBall& ball, const LanczosOptions& options = {});

struct IdentitySides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides of the ground state representation
///   <f psi, (sigma - H) f psi> = sum over edges a psi_x psi_y (f_x - f_y)^2
/// for f supported at depth <= R - 2. psi is the lifted eigenvector.
IdentitySides ground_state_identity(const TreeBall& ball, const LiftedVector& psi,
                                    const LiftedVector& f, double sigma);

}  // namespace treejacobi
