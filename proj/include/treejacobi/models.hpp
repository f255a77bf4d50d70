#pragma once

#include <string_view>

#include "treejacobi/graph.hpp"

namespace treejacobi {

/// Two vertices v0, v1 joined by d parallel edges, a = 1, b = 0.
/// Its universal cover is the homogeneous tree of degree d.
GraphWithParams free_model(int d);

/// Complete bipartite graph with r red vertices r0.. and g green vertices g0..,
/// a = 1, b = 0.
GraphWithParams rg_model(int r, int g);

/// Two vertices v0 (b) and v1 (-b) joined by three parallel edges, a = 1.
GraphWithParams alternating_model(double b);

/// 3-cube Q3, a = 1, b = 0.
GraphWithParams cube_model();

/// Petersen graph, a = 1, b = 0.
GraphWithParams petersen_model();

/// Complete graph K_n, a = 1, b = 0.
GraphWithParams complete_model(int n);

/// Parses "free:d", "rg:r,g", "altb:b", "cube", "petersen", "complete:n".
/// Throws ValidationError on an unknown or malformed spec.
GraphWithParams model_from_spec(std::string_view spec);

}  // namespace treejacobi
