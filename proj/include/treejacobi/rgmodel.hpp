#pragma once

#include <vector>

namespace treejacobi {

/// Radial zero-energy eigenfunction of the (r, g)-biregular tree centred at a
/// red vertex: 0 on odd levels, (-1/(r-1))^k on level 2k.
struct RgEigenfunction {
  int r = 0;
  int g = 0;
  int depth_pairs = 0;                      // K: levels 0 .. 2K
  std::vector<double> level_values;         // u(level)
  std::vector<double> level_population;  // exact below 2^53
};

/// Throws std::invalid_argument unless r > g >= 2 and K >= 1.
RgEigenfunction build_u(int r, int g, int depth_pairs);

struct NormSquared {
  double partial = 0.0;  // sum over levels 0 .. 2K of population * u^2
  double limit = 0.0;    // r / (r - g)
};

NormSquared u_norm_sq(int r, int g, int depth_pairs);

/// Builds the ball of radius 2K + 1 in the cover of the complete bipartite
/// graph (a = 1, b = 0) around a red vertex, places u on it and returns
/// max |Hu| over nodes of depth <= 2K - 2. Requires K >= 2.
double verify_Hu_zero(int r, int g, int depth_pairs);

struct ResidueCheck {
  double residue = 0.0;   // lim z G_r(z) along z = i 10^-k
  double expected = 0.0;  // -|u(0)|^2 / ||u||^2 = -(r - g) / r
};

ResidueCheck residue_check(int r, int g);

/// lim z G_g(z) along the imaginary axis (zero: G_g is regular at 0).
double green_site_residue(int r, int g);

/// Weight of the atom at 0 in the density of states,
/// (r * (-Res G_r) + g * (-Res G_g)) / (r + g).
double dos_zero_weight(int r, int g);

}  // namespace treejacobi
