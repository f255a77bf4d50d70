#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support/oracles.hpp"
#include "treejacobi/cover.hpp"
#include "treejacobi/errors.hpp"
#include "treejacobi/mfunction.hpp"
#include "treejacobi/models.hpp"
#include "treejacobi/spectral.hpp"

using namespace treejacobi;

namespace {

// Root Green's function of the ball compression by leaf-to-root elimination.
cplx ball_root_green(const TreeBall& ball, cplx z) {
  std::vector<cplx> pivot(ball.size());
  for (std::size_t x = 0; x < ball.size(); ++x) pivot[x] = ball.b(x) - z;
  for (std::size_t k = ball.size(); k-- > 1;) {
    const double a = ball.a_to_parent(k);
    pivot[static_cast<std::size_t>(ball.node(k).parent)] -= a * a / pivot[k];
  }
  return 1.0 / pivot[0];
}

int loops(const FiniteGraph& g) { return g.edge_count() - g.vertex_count() + 1; }

}  // namespace

TEST_CASE("free tree: m solves the quadratic and G matches the explicit root") {
  for (int d : {3, 4, 6}) {
    const auto gp = free_model(d);
    for (cplx z : {cplx{0.3, 0.5}, cplx{-2.0, 0.01}, cplx{5.0, 2.0}, cplx{0.0, 1e-3}}) {
      const auto m = solve_m(gp.graph, gp.params, z);
      for (auto v : m.m) {
        CHECK(std::abs((d - 1.0) * v * v + z * v + 1.0) < 1e-12 * std::max(1.0, std::abs(v)));
        CHECK(std::abs(v - m.m[0]) < 1e-12);
      }
      CHECK(std::abs(green_diag(gp.graph, gp.params, m, 0) - testsupport::free_tree_green(d, z)) < 1e-11);
    }
  }
}

TEST_CASE("free tree of degree 3 at z = 4") {
  const auto gp = free_model(3);
  const double expected = (-4.0 + 3.0 * std::sqrt(8.0)) / (2.0 * (9.0 - 16.0));
  const cplx g = green_diag(gp.graph, gp.params, cplx{4.0, 0.0}, 0);
  CHECK(std::abs(g - expected) < 1e-12);
  CHECK(g.real() == doctest::Approx(-0.3203772).epsilon(1e-7));
}

TEST_CASE("Herglotz property on random instances") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> re(-6.0, 6.0), im_exp(-3.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testsupport::random_graph(rng, 2 + trial % 6, trial % 3);
    const auto p = testsupport::random_params(rng, g, 0.3, 2.0, 1.5);
    const MFunctionSolver solver(g, p);
    for (int k = 0; k < 5; ++k) {
      const cplx z{re(rng), std::pow(10.0, im_exp(rng))};
      const auto m = solver.solve(z);
      for (auto v : m.m) CHECK(v.imag() > 0.0);
      for (int v = 0; v < g.vertex_count(); ++v) CHECK(solver.green(m, v).imag() > 0.0);
      CHECK(solver.residual(m) < 1e-12);
    }
    const auto far = solver.solve(cplx{0.0, 10.0});
    for (auto v : far.m) CHECK(v.imag() > 0.0);
  }
}

TEST_CASE("green_diag agrees with the resolvent of a large ball") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = testsupport::random_graph(rng, 2 + trial % 5, trial % 2);
    const auto p = testsupport::random_params(rng, g, 0.3, 1.2, 1.0);
    const int base = trial % g.vertex_count();
    const cplx z{0.5 * (trial % 5) - 1.0, 4.0};
    int radius = 1;
    while (ball_node_count(g, base, radius + 1) < 300'000 && radius < 14) ++radius;
    const auto ball = build_ball(g, p, base, radius);
    CHECK(std::abs(green_diag(g, p, z, base) - ball_root_green(ball, z)) < 1e-9);
  }
}

TEST_CASE("large |z| asymptotics") {
  for (const auto& gp : {free_model(3), rg_model(3, 2), alternating_model(1.0), petersen_model()}) {
    const cplx z{1e6, 1.0};
    const cplx g = green_diag(gp.graph, gp.params, z, 0);
    CHECK(std::abs(g + 1.0 / z) < 1e-5 * std::abs(1.0 / z));
  }
}

TEST_CASE("rg model has one m value per direction") {
  const auto gp = rg_model(3, 2);
  const MFunctionSolver solver(gp.graph, gp.params);
  const auto m = solver.solve(cplx{0.7, 0.2});
  cplx into_red{}, into_green{};
  bool seen_red = false, seen_green = false;
  for (int d = 0; d < solver.directed_edge_count(); ++d) {
    const bool red = gp.graph.vertices()[solver.head(d)].front() == 'r';
    auto& slot = red ? into_red : into_green;
    bool& seen = red ? seen_red : seen_green;
    if (!seen) slot = m.m[d];
    seen = true;
    CHECK(std::abs(m.m[d] - slot) < 1e-12);
  }
  CHECK(std::abs(into_red - into_green) > 1e-3);
}

TEST_CASE("solve_m preconditions") {
  const auto gp = free_model(3);
  CHECK_THROWS_AS(solve_m(gp.graph, gp.params, cplx{0.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_m(gp.graph, gp.params, cplx{1.0, 0.0}), std::invalid_argument);
  CHECK_NOTHROW(solve_m(gp.graph, gp.params, cplx{3.5, 0.0}));
  CHECK_THROWS_AS(dos_density(gp.graph, gp.params, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("density of states") {
  const auto free3 = free_model(3);
  CHECK(dos_density(free3.graph, free3.params, 5.0, 1e-3) < 1e-3);
  // Im G(0 + i0) / pi = sqrt(8) / (6 pi) for the degree-3 tree.
  const double exact = std::sqrt(8.0) / (6.0 * std::numbers::pi);
  const double d3 = dos_density(free3.graph, free3.params, 0.0, 1e-3);
  const double d4 = dos_density(free3.graph, free3.params, 0.0, 1e-4);
  CHECK(std::abs(extrapolate_to_zero(1e-3, d3, 1e-4, d4) - exact) < 1e-7);

  const auto rg = rg_model(3, 2);
  int red = 0;
  while (rg.graph.vertices()[red].front() != 'r') ++red;
  for (double eps : {1e-6, 1e-8}) {
    const cplx g = green_diag(rg.graph, rg.params, cplx{0.0, eps}, red);
    CHECK(std::abs(eps * g.imag() - 1.0 / 3.0) < 10 * eps);
  }
}

TEST_CASE("extrapolation is exact for linear data") {
  CHECK(extrapolate_to_zero(1e-2, 3.0 + 2e-2, 1e-3, 3.0 + 2e-3) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("spectrum_scan on the explicit models") {
  SUBCASE("free tree") {
    const auto gp = free_model(3);
    const auto r = spectrum_scan(gp.graph, gp.params).report;
    REQUIRE(r.bands.size() == 1);
    CHECK(std::abs(r.bands[0].lo + 2.0 * std::sqrt(2.0)) < 1e-5);
    CHECK(std::abs(r.bands[0].hi - 2.0 * std::sqrt(2.0)) < 1e-5);
    CHECK(r.point_masses.empty());
  }
  SUBCASE("rg") {
    const auto gp = rg_model(3, 2);
    const auto r = spectrum_scan(gp.graph, gp.params).report;
    REQUIRE(r.bands.size() == 2);
    const double lo = std::sqrt(2.0) - 1.0, hi = std::sqrt(2.0) + 1.0;
    CHECK(std::abs(r.bands[0].lo + hi) < 1e-5);
    CHECK(std::abs(r.bands[0].hi + lo) < 1e-5);
    CHECK(std::abs(r.bands[1].lo - lo) < 1e-5);
    CHECK(std::abs(r.bands[1].hi - hi) < 1e-5);
    REQUIRE(r.point_masses.size() == 1);
    CHECK(std::abs(r.point_masses[0].energy) < 1e-6);
    CHECK(std::abs(r.point_masses[0].weight - 0.2) < 1e-3);
  }
  SUBCASE("alternating potential") {
    const auto gp = alternating_model(1.0);
    const auto r = spectrum_scan(gp.graph, gp.params).report;
    REQUIRE(r.bands.size() == 2);
    CHECK(std::abs(r.bands[0].lo + 3.0) < 1e-5);
    // The density diverges like |x - b|^(-1/2) at the inner edges; the
    // eps extrapolation leaves a bias of order 1e-5 there.
    CHECK(std::abs(r.bands[0].hi + 1.0) < 1e-4);
    CHECK(std::abs(r.bands[1].lo - 1.0) < 1e-4);
    CHECK(std::abs(r.bands[1].hi - 3.0) < 1e-5);
    CHECK(r.sigma_top == doctest::Approx(r.bands[1].hi));
    CHECK(r.sigma_bottom == doctest::Approx(r.bands[0].lo));
  }
}

TEST_CASE("spectrum_scan output structure and determinism") {
  const auto gp = petersen_model();
  ScanOptions one;
  one.threads = 1;
  one.resolution = 201;
  ScanOptions many = one;
  many.threads = 4;
  const auto a = spectrum_scan(gp.graph, gp.params, one);
  const auto b = spectrum_scan(gp.graph, gp.params, many);
  REQUIRE(a.samples.size() == 201 * 4);
  CHECK(a.samples[3].eps_used == 0.0);
  CHECK(a.samples[0].eps_used == 1e-2);
  REQUIRE(a.report.bands.size() == b.report.bands.size());
  for (std::size_t k = 0; k < a.report.bands.size(); ++k) {
    CHECK(a.report.bands[k].lo == b.report.bands[k].lo);
    CHECK(a.report.bands[k].hi == b.report.bands[k].hi);
  }
  for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k].density == b.samples[k].density);
  for (std::size_t k = 0; k + 1 < a.report.bands.size(); ++k) CHECK(a.report.bands[k].hi < a.report.bands[k + 1].lo);
}

TEST_CASE("spectrum_scan range precondition") {
  const auto gp = free_model(3);
  ScanOptions o;
  o.lo = -2.0;
  o.hi = 5.0;
  CHECK_THROWS_AS(spectrum_scan(gp.graph, gp.params, o), std::invalid_argument);
}

TEST_CASE("bipartite graphs with b = 0 have symmetric bands") {
  for (const auto& gp : {rg_model(3, 2), cube_model(), rg_model(4, 2)}) {
    const auto r = spectrum_scan(gp.graph, gp.params).report;
    const auto n = r.bands.size();
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(r.bands[k].lo + r.bands[n - 1 - k].hi) < 1e-9);
    }
  }
}

TEST_CASE("scan agrees with ball lower bounds and the gap is positive") {
  std::mt19937_64 rng(43);
  int checked = 0;
  for (int trial = 0; checked < 8; ++trial) {
    const auto g = testsupport::random_graph(rng, 3 + trial % 4, 1 + trial % 2);
    if (loops(g) < 2) continue;
    ++checked;
    const auto p = testsupport::random_params(rng, g, 0.5, 1.5, 0.5);
    const double sigma = perron(g, p).sigma;
    const double top = spectrum_scan(g, p).report.sigma_top;
    CHECK(top < sigma);
    double previous_gap = 1e300;
    for (int radius = 1; radius <= 8; ++radius) {
      if (ball_node_count(g, 0, radius) > 100'000) break;
      const double lower = lanczos_top(build_ball(g, p, 0, radius));
      CHECK(top >= lower - 1e-9);
      CHECK(top - lower <= previous_gap + 1e-12);
      previous_gap = top - lower;
    }
  }
}
