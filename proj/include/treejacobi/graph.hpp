#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace treejacobi {

struct EdgeSpec {
  std::string id;
  std::string u;
  std::string v;
};

struct Edge {
  std::string id;
  int u = 0;
  int v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Finite connected leafless multigraph.
///
/// Vertices are stored in lexicographic order of their ids, edges in
/// lexicographic order of theirs; all numeric indices refer to these orders.
/// Parallel edges are kept distinct.
class FiniteGraph {
 public:
  /// Builds and validates. Throws ValidationError on a duplicate id, an
  /// unknown endpoint, a self-loop, a vertex of degree < 2, or disconnection.
  FiniteGraph(std::vector<std::string> vertex_ids, std::vector<EdgeSpec> edges);

  /// Structural checks only (ids unique, endpoints known). Used to assemble
  /// matrices of graphs that are not admissible covers, e.g. a single edge.
  static FiniteGraph unvalidated(std::vector<std::string> vertex_ids,
                                 std::vector<EdgeSpec> edges);

  int vertex_count() const noexcept { return static_cast<int>(vertices_.size()); }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }

  const std::vector<std::string>& vertices() const noexcept { return vertices_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(int e) const { return edges_.at(e); }

  /// Edge indices incident to vertex v, ascending.
  std::span<const int> incident(int v) const;
  int degree(int v) const { return static_cast<int>(incident(v).size()); }
  int other_end(int e, int v) const;

  std::optional<int> find_vertex(std::string_view id) const;
  std::optional<int> find_edge(std::string_view id) const;

  friend bool operator==(const FiniteGraph&, const FiniteGraph&) = default;

 private:
  FiniteGraph() = default;
  void build_structure(std::vector<std::string> vertex_ids, std::vector<EdgeSpec> edges);
  void validate() const;

  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
  std::vector<int> incidence_offsets_;
  std::vector<int> incidence_;
};

/// Edge weights a (indexed by edge) and vertex potentials b (indexed by vertex).
struct JacobiParams {
  std::vector<double> a;
  std::vector<double> b;

  friend bool operator==(const JacobiParams&, const JacobiParams&) = default;
};

/// Throws ValidationError unless sizes match the graph and every a is > 0.
void validate_params(const FiniteGraph& graph, const JacobiParams& params);

struct GraphWithParams {
  FiniteGraph graph;
  JacobiParams params;
};

/// Parses the line-based graph format:
///   vertex <id> b=<float>
///   edge <id> <u-id> <v-id> a=<float>
/// '#' starts a comment. Declaration order is free.
GraphWithParams parse_graph(std::string_view text);

/// Inverse of parse_graph; numbers are written with round-trip precision.
std::string serialize_graph(const FiniteGraph& graph, const JacobiParams& params);

/// Two-colouring with colours 1 and 2, or nullopt when the graph has an odd cycle.
struct Bipartition {
  std::optional<std::vector<int>> coloring;

  bool bipartite() const noexcept { return coloring.has_value(); }
  /// +1 on colour 1, -1 on colour 2. Requires bipartite().
  Eigen::VectorXd sign_vector() const;
};

/// BFS from vertex 0 with colour 1 at the root.
Bipartition is_bipartite(const FiniteGraph& graph);

/// Dense symmetric p x p matrix: b on the diagonal, summed a over parallel edges off it.
Eigen::MatrixXd assemble_jacobi(const FiniteGraph& graph, const JacobiParams& params);

/// (a, b) -> (a, -b).
JacobiParams negate_b(JacobiParams params);

}  // namespace treejacobi
