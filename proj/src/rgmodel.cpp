#include "treejacobi/rgmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "treejacobi/cover.hpp"
#include "treejacobi/green_models.hpp"
#include "treejacobi/models.hpp"

namespace treejacobi {

namespace {

void require_rg(int r, int g) {
  if (g < 2 || r <= g) throw std::invalid_argument("rg model needs r > g >= 2");
}

double site_residue(int r, int g, RgSite site) {
  const ModelGreen model = RgModel{r, g, site};
  return richardson_limit(
             [&](cplx z) { return z * evaluate(model, {z, Sheet::I}); }, cplx{0.0, 0.0}, 1e-10)
      .real();
}

}  // namespace

RgEigenfunction build_u(int r, int g, int depth_pairs) {
  require_rg(r, g);
  if (depth_pairs < 1) throw std::invalid_argument("build_u: K must be >= 1");
  RgEigenfunction u{r, g, depth_pairs, {}, {}};
  const int levels = 2 * depth_pairs + 1;
  u.level_values.assign(levels, 0.0);
  u.level_population.assign(levels, 0.0);
  u.level_values[0] = 1.0;
  u.level_population[0] = 1.0;
  const double branching = (r - 1.0) * (g - 1.0);
  double block = 1.0;  // [(r-1)(g-1)]^(k-1)
  double value = 1.0;
  for (int k = 1; k <= depth_pairs; ++k) {
    value *= -1.0 / (r - 1);
    u.level_population[2 * k - 1] = g * block;
    u.level_population[2 * k] = g * (r - 1.0) * block;
    u.level_values[2 * k] = value;
    block *= branching;
  }
  return u;
}

NormSquared u_norm_sq(int r, int g, int depth_pairs) {
  const auto u = build_u(r, g, depth_pairs);
  NormSquared out;
  for (std::size_t level = 0; level < u.level_values.size(); ++level)
    out.partial += u.level_population[level] * u.level_values[level] * u.level_values[level];
  out.limit = static_cast<double>(r) / static_cast<double>(r - g);
  return out;
}

double verify_Hu_zero(int r, int g, int depth_pairs) {
  if (depth_pairs < 2) throw std::invalid_argument("verify_Hu_zero: K must be >= 2");
  const auto u = build_u(r, g, depth_pairs);
  const auto model = rg_model(r, g);
  const auto& ids = model.graph.vertices();
  const auto red = static_cast<int>(
      std::find_if(ids.begin(), ids.end(), [](const std::string& id) { return id.front() == 'r'; }) -
      ids.begin());
  const auto ball = build_ball(model.graph, model.params, red, 2 * depth_pairs + 1);

  LiftedVector lifted{std::vector<double>(ball.size(), 0.0)};
  for (std::size_t x = 0; x < ball.size(); ++x) {
    const int depth = ball.node(x).depth;
    if (depth <= 2 * depth_pairs) lifted.values[x] = u.level_values[static_cast<std::size_t>(depth)];
  }
  const auto hu = apply_H(ball, lifted);
  double residual = 0.0;
  for (std::size_t x = 0; x < ball.size(); ++x)
    if (ball.node(x).depth <= 2 * depth_pairs - 2) residual = std::max(residual, std::abs(hu.values[x]));
  return residual;
}

ResidueCheck residue_check(int r, int g) {
  require_rg(r, g);
  const auto norm = u_norm_sq(r, g, 1);
  return {site_residue(r, g, RgSite::red), -1.0 / norm.limit};
}

double green_site_residue(int r, int g) {
  require_rg(r, g);
  return site_residue(r, g, RgSite::green);
}

double dos_zero_weight(int r, int g) {
  require_rg(r, g);
  const double red = -site_residue(r, g, RgSite::red);
  const double green = -site_residue(r, g, RgSite::green);
  return (r * red + g * green) / static_cast<double>(r + g);
}

}  // namespace treejacobi
