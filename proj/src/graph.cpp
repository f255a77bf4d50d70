#include "treejacobi/graph.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <map>
#include <queue>
#include <sstream>

#include "treejacobi/errors.hpp"

namespace treejacobi {

FiniteGraph::FiniteGraph(std::vector<std::string> vertex_ids, std::vector<EdgeSpec> edges) {
  build_structure(std::move(vertex_ids), std::move(edges));
  validate();
}

FiniteGraph FiniteGraph::unvalidated(std::vector<std::string> vertex_ids,
                                     std::vector<EdgeSpec> edges) {
  FiniteGraph g;
  g.build_structure(std::move(vertex_ids), std::move(edges));
  return g;
}

void FiniteGraph::build_structure(std::vector<std::string> vertex_ids,
                                  std::vector<EdgeSpec> edges) {
  std::sort(vertex_ids.begin(), vertex_ids.end());
  if (auto dup = std::adjacent_find(vertex_ids.begin(), vertex_ids.end()); dup != vertex_ids.end())
    throw ValidationError("duplicate vertex id '" + *dup + "'");
  vertices_ = std::move(vertex_ids);

  std::sort(edges.begin(), edges.end(),
            [](const EdgeSpec& x, const EdgeSpec& y) { return x.id < y.id; });
  edges_.clear();
  edges_.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i > 0 && edges[i].id == edges[i - 1].id)
      throw ValidationError("duplicate edge id '" + edges[i].id + "'");
    auto u = find_vertex(edges[i].u);
    auto v = find_vertex(edges[i].v);
    if (!u) throw ValidationError("edge '" + edges[i].id + "' names unknown vertex '" + edges[i].u + "'");
    if (!v) throw ValidationError("edge '" + edges[i].id + "' names unknown vertex '" + edges[i].v + "'");
    edges_.push_back({std::move(edges[i].id), *u, *v});
  }

  const auto p = vertices_.size();
  std::vector<int> counts(p, 0);
  for (const auto& e : edges_) {
    ++counts[e.u];
    if (e.v != e.u) ++counts[e.v];
  }
  incidence_offsets_.assign(p + 1, 0);
  for (std::size_t v = 0; v < p; ++v) incidence_offsets_[v + 1] = incidence_offsets_[v] + counts[v];
  incidence_.assign(incidence_offsets_.back(), 0);
  std::vector<int> fill(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
  for (int e = 0; e < edge_count(); ++e) {
    incidence_[fill[edges_[e].u]++] = e;
    if (edges_[e].v != edges_[e].u) incidence_[fill[edges_[e].v]++] = e;
  }
}

void FiniteGraph::validate() const {
  for (const auto& e : edges_)
    if (e.u == e.v)
      throw ValidationError("self-loop: edge '" + e.id + "' joins vertex '" + vertices_[e.u] +
                            "' to itself");
  if (vertices_.empty()) throw ValidationError("empty graph: at least one vertex is required");
  for (int v = 0; v < vertex_count(); ++v)
    if (degree(v) < 2)
      throw ValidationError("leafless violated: vertex '" + vertices_[v] + "' has degree " +
                            std::to_string(degree(v)));
  if (edges_.empty()) throw ValidationError("no edges: at least one edge is required");

  std::vector<char> seen(vertices_.size(), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  while (!frontier.empty()) {
    int v = frontier.front();
    frontier.pop();
    for (int e : incident(v)) {
      int w = other_end(e, v);
      if (!seen[w]) {
        seen[w] = 1;
        frontier.push(w);
      }
    }
  }
  for (int v = 0; v < vertex_count(); ++v)
    if (!seen[v])
      throw ValidationError("disconnected: vertex '" + vertices_[v] + "' is unreachable from '" +
                            vertices_[0] + "'");
}

std::span<const int> FiniteGraph::incident(int v) const {
  const auto begin = incidence_offsets_.at(v);
  const auto end = incidence_offsets_.at(v + 1);
  return {incidence_.data() + begin, static_cast<std::size_t>(end - begin)};
}

int FiniteGraph::other_end(int e, int v) const {
  const auto& edge = edges_.at(e);
  return edge.u == v ? edge.v : edge.u;
}

std::optional<int> FiniteGraph::find_vertex(std::string_view id) const {
  auto it = std::lower_bound(vertices_.begin(), vertices_.end(), id);
  if (it == vertices_.end() || *it != id) return std::nullopt;
  return static_cast<int>(it - vertices_.begin());
}

std::optional<int> FiniteGraph::find_edge(std::string_view id) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), id,
                             [](const Edge& e, std::string_view key) { return e.id < key; });
  if (it == edges_.end() || it->id != id) return std::nullopt;
  return static_cast<int>(it - edges_.begin());
}

void validate_params(const FiniteGraph& graph, const JacobiParams& params) {
  if (params.b.size() != static_cast<std::size_t>(graph.vertex_count()))
    throw ValidationError("missing parameter: expected " + std::to_string(graph.vertex_count()) +
                          " b values, got " + std::to_string(params.b.size()));
  if (params.a.size() != static_cast<std::size_t>(graph.edge_count()))
    throw ValidationError("missing parameter: expected " + std::to_string(graph.edge_count()) +
                          " a values, got " + std::to_string(params.a.size()));
  for (int e = 0; e < graph.edge_count(); ++e)
    if (!(params.a[e] > 0.0))
      throw ValidationError("nonpositive a on edge '" + graph.edge(e).id + "'");
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_assignment(std::string_view token, std::string_view key, int line) {
  if (token.size() <= key.size() + 1 || token.substr(0, key.size()) != key ||
      token[key.size()] != '=')
    throw ParseError(line, "expected " + std::string(key) + "=<float>, got '" +
                               std::string(token) + "'");
  auto number = token.substr(key.size() + 1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
  if (ec != std::errc() || ptr != number.data() + number.size())
    throw ParseError(line, "invalid number '" + std::string(number) + "'");
  return value;
}

}  // namespace

GraphWithParams parse_graph(std::string_view text) {
  struct VertexDecl {
    std::optional<double> b;
    int line;
  };
  struct EdgeDecl {
    std::string u, v;
    std::optional<double> a;
    int line;
  };
  std::map<std::string, VertexDecl, std::less<>> vertices;
  std::map<std::string, EdgeDecl, std::less<>> edges;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    if (tokens[0] == "vertex") {
      if (tokens.size() < 2 || tokens.size() > 3)
        throw ParseError(line_no, "expected 'vertex <id> b=<float>'");
      std::string id(tokens[1]);
      if (vertices.contains(id))
        throw ParseError(line_no, "duplicate vertex id '" + id + "' (first declared on line " +
                                      std::to_string(vertices.find(id)->second.line) + ")");
      VertexDecl decl{std::nullopt, line_no};
      if (tokens.size() == 3) decl.b = parse_assignment(tokens[2], "b", line_no);
      vertices.emplace(std::move(id), decl);
    } else if (tokens[0] == "edge") {
      if (tokens.size() < 4 || tokens.size() > 5)
        throw ParseError(line_no, "expected 'edge <id> <u-id> <v-id> a=<float>'");
      std::string id(tokens[1]);
      if (edges.contains(id))
        throw ParseError(line_no, "duplicate edge id '" + id + "' (first declared on line " +
                                      std::to_string(edges.find(id)->second.line) + ")");
      EdgeDecl decl{std::string(tokens[2]), std::string(tokens[3]), std::nullopt, line_no};
      if (tokens.size() == 5) decl.a = parse_assignment(tokens[4], "a", line_no);
      edges.emplace(std::move(id), std::move(decl));
    } else {
      throw ParseError(line_no, "unknown declaration '" + std::string(tokens[0]) +
                                    "' (expected 'vertex' or 'edge')");
    }
  }

  std::vector<std::string> vertex_ids;
  for (const auto& [id, decl] : vertices) {
    if (!decl.b)
      throw ValidationError("missing parameter: vertex '" + id + "' (line " +
                            std::to_string(decl.line) + ") has no b value");
    vertex_ids.push_back(id);
  }
  std::vector<EdgeSpec> edge_specs;
  for (const auto& [id, decl] : edges) {
    if (!decl.a)
      throw ValidationError("missing parameter: edge '" + id + "' (line " +
                            std::to_string(decl.line) + ") has no a value");
    if (!vertices.contains(decl.u) || !vertices.contains(decl.v)) {
      const auto& missing = vertices.contains(decl.u) ? decl.v : decl.u;
      throw ParseError(decl.line, "edge '" + id + "' names undeclared vertex '" + missing + "'");
    }
    edge_specs.push_back({id, decl.u, decl.v});
  }

  FiniteGraph graph(std::move(vertex_ids), std::move(edge_specs));
  JacobiParams params;
  params.b.resize(graph.vertex_count());
  params.a.resize(graph.edge_count());
  for (int v = 0; v < graph.vertex_count(); ++v)
    params.b[v] = *vertices.find(graph.vertices()[v])->second.b;
  for (int e = 0; e < graph.edge_count(); ++e) params.a[e] = *edges.find(graph.edge(e).id)->second.a;
  validate_params(graph, params);
  return {std::move(graph), std::move(params)};
}

std::string serialize_graph(const FiniteGraph& graph, const JacobiParams& params) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (int v = 0; v < graph.vertex_count(); ++v)
    out << "vertex " << graph.vertices()[v] << " b=" << params.b.at(v) << '\n';
  for (int e = 0; e < graph.edge_count(); ++e) {
    const auto& edge = graph.edge(e);
    out << "edge " << edge.id << ' ' << graph.vertices()[edge.u] << ' ' << graph.vertices()[edge.v]
        << " a=" << params.a.at(e) << '\n';
  }
  return out.str();
}

Eigen::VectorXd Bipartition::sign_vector() const {
  const auto& colors = coloring.value();
  Eigen::VectorXd s(static_cast<Eigen::Index>(colors.size()));
  for (std::size_t i = 0; i < colors.size(); ++i) s[static_cast<Eigen::Index>(i)] = colors[i] == 1 ? 1.0 : -1.0;
  return s;
}

Bipartition is_bipartite(const FiniteGraph& graph) {
  std::vector<int> color(graph.vertex_count(), 0);
  for (int start = 0; start < graph.vertex_count(); ++start) {
    if (color[start]) continue;
    color[start] = 1;
    std::queue<int> frontier;
    frontier.push(start);
    while (!frontier.empty()) {
      int v = frontier.front();
      frontier.pop();
      for (int e : graph.incident(v)) {
        int w = graph.other_end(e, v);
        if (!color[w]) {
          color[w] = 3 - color[v];
          frontier.push(w);
        } else if (color[w] == color[v]) {
          return {};
        }
      }
    }
  }
  return {std::move(color)};
}

Eigen::MatrixXd assemble_jacobi(const FiniteGraph& graph, const JacobiParams& params) {
  const auto p = graph.vertex_count();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p, p);
  for (int v = 0; v < p; ++v) J(v, v) = params.b.at(v);
  for (int e = 0; e < graph.edge_count(); ++e) {
    const auto& edge = graph.edge(e);
    if (edge.u == edge.v) throw ValidationError("self-loop: edge '" + edge.id + "' cannot be assembled");
    J(edge.u, edge.v) += params.a.at(e);
    J(edge.v, edge.u) = J(edge.u, edge.v);
  }
  return J;
}

JacobiParams negate_b(JacobiParams params) {
  for (auto& b : params.b) b = -b;
  return params;
}

}  // namespace treejacobi
