#include "treejacobi/models.hpp"

#include <charconv>
#include <string>
#include <vector>

#include "treejacobi/errors.hpp"

namespace treejacobi {

namespace {

// Zero-padded so that lexicographic order matches numeric order.
std::string label(std::string_view prefix, int i, int count) {
  auto digits = std::to_string(count > 0 ? count - 1 : 0).size();
  auto n = std::to_string(i);
  return std::string(prefix) + std::string(digits - n.size(), '0') + n;
}

GraphWithParams uniform(std::vector<std::string> vertices, std::vector<EdgeSpec> edges) {
  FiniteGraph graph(std::move(vertices), std::move(edges));
  JacobiParams params{std::vector<double>(graph.edge_count(), 1.0),
                      std::vector<double>(graph.vertex_count(), 0.0)};
  return {std::move(graph), std::move(params)};
}

template <typename T>
T parse_number(std::string_view text, std::string_view spec) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ValidationError("malformed model spec '" + std::string(spec) + "'");
  return value;
}

}  // namespace

GraphWithParams free_model(int d) {
  if (d < 2) throw ValidationError("free model needs degree d >= 2");
  std::vector<EdgeSpec> edges;
  for (int i = 0; i < d; ++i) edges.push_back({label("e", i, d), "v0", "v1"});
  return uniform({"v0", "v1"}, std::move(edges));
}

GraphWithParams rg_model(int r, int g) {
  if (r < 2 || g < 2) throw ValidationError("rg model needs r >= 2 and g >= 2");
  std::vector<std::string> vertices;
  for (int i = 0; i < r; ++i) vertices.push_back(label("r", i, r));
  for (int j = 0; j < g; ++j) vertices.push_back(label("g", j, g));
  std::vector<EdgeSpec> edges;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < g; ++j)
      edges.push_back({label("e", i * g + j, r * g), label("r", i, r), label("g", j, g)});
  return uniform(std::move(vertices), std::move(edges));
}

GraphWithParams alternating_model(double b) {
  auto model = free_model(3);
  model.params.b = {b, -b};
  return model;
}

GraphWithParams cube_model() {
  std::vector<std::string> vertices;
  for (int i = 0; i < 8; ++i) vertices.push_back(label("v", i, 8));
  std::vector<EdgeSpec> edges;
  int n = 0;
  for (int i = 0; i < 8; ++i)
    for (int bit = 0; bit < 3; ++bit) {
      int j = i ^ (1 << bit);
      if (i < j) {
        edges.push_back({label("e", n, 12), vertices[i], vertices[j]});
        ++n;
      }
    }
  return uniform(std::move(vertices), std::move(edges));
}

GraphWithParams petersen_model() {
  std::vector<std::string> vertices;
  for (int i = 0; i < 10; ++i) vertices.push_back(label("v", i, 10));
  std::vector<EdgeSpec> edges;
  int n = 0;
  auto add = [&](int i, int j) {
    edges.push_back({label("e", n, 15), vertices[i], vertices[j]});
    ++n;
  };
  for (int i = 0; i < 5; ++i) {
    add(i, (i + 1) % 5);          // outer cycle
    add(i, i + 5);                // spokes
    add(5 + i, 5 + (i + 2) % 5);  // inner pentagram
  }
  return uniform(std::move(vertices), std::move(edges));
}

GraphWithParams complete_model(int n) {
  if (n < 3) throw ValidationError("complete model needs n >= 3");
  std::vector<std::string> vertices;
  for (int i = 0; i < n; ++i) vertices.push_back(label("v", i, n));
  std::vector<EdgeSpec> edges;
  int m = n * (n - 1) / 2, k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({label("e", k++, m), vertices[i], vertices[j]});
  return uniform(std::move(vertices), std::move(edges));
}

GraphWithParams model_from_spec(std::string_view spec) {
  auto colon = spec.find(':');
  auto name = spec.substr(0, colon);
  auto args = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (name == "free") return free_model(parse_number<int>(args, spec));
  if (name == "rg") {
    auto comma = args.find(',');
    if (comma == std::string_view::npos)
      throw ValidationError("malformed model spec '" + std::string(spec) + "' (expected rg:r,g)");
    return rg_model(parse_number<int>(args.substr(0, comma), spec),
                    parse_number<int>(args.substr(comma + 1), spec));
  }
  if (name == "altb") return alternating_model(parse_number<double>(args, spec));
  if (name == "cube" && args.empty()) return cube_model();
  if (name == "petersen" && args.empty()) return petersen_model();
  if (name == "complete") return complete_model(parse_number<int>(args, spec));
  throw ValidationError("unknown model '" + std::string(spec) +
                        "' (expected free:d, rg:r,g, altb:b, cube, petersen, complete:n)");
}

}  // namespace treejacobi
