#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "support/oracles.hpp"
#include "treejacobi/models.hpp"
#include "treejacobi/spectral.hpp"

using namespace treejacobi;

TEST_CASE("eigen_sym on small matrices") {
  Eigen::Matrix2d m;
  m << 1, 3, 3, -1;
  const auto s = eigen_sym(m);
  CHECK(s.eigenvalues[0] == doctest::Approx(-std::sqrt(10.0)).epsilon(1e-15));
  CHECK(s.eigenvalues[1] == doctest::Approx(std::sqrt(10.0)).epsilon(1e-15));

  Eigen::MatrixXd d = Eigen::Vector3d(2.0, -1.0, 0.5).asDiagonal();
  CHECK(eigen_sym(d).eigenvalues == std::vector<double>{-1.0, 0.5, 2.0});

  const auto rg = rg_model(3, 2);
  const auto e = eigen_sym(assemble_jacobi(rg.graph, rg.params)).eigenvalues;
  REQUIRE(e.size() == 5);
  CHECK(e[0] == doctest::Approx(-std::sqrt(6.0)).epsilon(1e-14));
  for (int k = 1; k <= 3; ++k) CHECK(std::abs(e[k]) < 1e-13);
  CHECK(e[4] == doctest::Approx(std::sqrt(6.0)).epsilon(1e-14));
}

TEST_CASE("eigen_sym rejects non-symmetric input") {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 2, 0;
  CHECK_THROWS_AS(eigen_sym(m), std::invalid_argument);
  CHECK_THROWS_AS(eigen_sym(Eigen::MatrixXd(2, 3)), std::invalid_argument);
}

TEST_CASE("eigen_sym: trace, Frobenius norm, orthonormal vectors, agreement with Eigen") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 1 + trial % 25;
    Eigen::MatrixXd m(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = n(rng);
    const auto s = eigen_sym(m);
    const double norm = m.norm();
    double sum = 0.0, squares = 0.0;
    for (double l : s.eigenvalues) {
      sum += l;
      squares += l * l;
    }
    CHECK(std::abs(sum - m.trace()) <= 1e-11 * norm);
    CHECK(std::abs(squares - norm * norm) <= 1e-11 * norm * norm);
    CHECK(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    REQUIRE(s.eigenvectors);
    const Eigen::MatrixXd& v = *s.eigenvectors;
    CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((m * v - v * Eigen::Map<const Eigen::VectorXd>(s.eigenvalues.data(), p).asDiagonal())
              .cwiseAbs()
              .maxCoeff() < 1e-11 * std::max(1.0, norm));

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(m, Eigen::EigenvaluesOnly);
    for (int k = 0; k < p; ++k) CHECK(std::abs(s.eigenvalues[k] - ref.eigenvalues()[k]) < 1e-12 * std::max(1.0, norm));
  }
}

TEST_CASE("perron on regular graphs gives sigma = d and a constant vector") {
  for (const auto& gp : {cube_model(), petersen_model(), complete_model(4)}) {
    const auto pair = perron(gp.graph, gp.params);
    const int d = gp.graph.degree(0);
    CHECK(pair.sigma == doctest::Approx(d).epsilon(1e-13));
    const double c = 1.0 / std::sqrt(gp.graph.vertex_count());
    for (int v = 0; v < gp.graph.vertex_count(); ++v) CHECK(std::abs(pair.psi[v] - c) < 1e-12);
  }
}

TEST_CASE("perron on the rg graph: sigma = sqrt(rg), psi proportional to sqrt(g) on red, sqrt(r) on green") {
  const auto gp = rg_model(3, 2);
  const auto pair = perron(gp.graph, gp.params);
  CHECK(pair.sigma == doctest::Approx(std::sqrt(6.0)).epsilon(1e-14));
  const double norm = std::sqrt(3 * 2.0 + 2 * 3.0);
  for (int v = 0; v < gp.graph.vertex_count(); ++v) {
    const bool red = gp.graph.vertices()[v].front() == 'r';
    CHECK(std::abs(pair.psi[v] - (red ? std::sqrt(2.0) : std::sqrt(3.0)) / norm) < 1e-12);
  }
}

TEST_CASE("perron on the alternating model") {
  const auto gp = alternating_model(1.0);
  const auto pair = perron(gp.graph, gp.params);
  CHECK(std::abs(pair.sigma - std::sqrt(10.0)) < 1e-12);
  // Eigenvector of [[1,3],[3,-1]] for sqrt(10): (3, sqrt(10) - 1).
  const double ratio = 3.0 / (std::sqrt(10.0) - 1.0);
  CHECK(std::abs(pair.psi[0] / pair.psi[1] - ratio) < 1e-12);
}

TEST_CASE("perron agrees with eigen_sym and has a positive eigenvector") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = testsupport::random_graph(rng, 2 + trial % 10, trial % 4);
    const auto p = testsupport::random_params(rng, g, 0.2, 2.0, 1.5);
    const auto pair = perron(g, p);
    const auto j = assemble_jacobi(g, p);
    CHECK((j * pair.psi - pair.sigma * pair.psi).norm() < 1e-12);
    CHECK(pair.psi.minCoeff() > 0.0);
    CHECK(std::abs(pair.psi.norm() - 1.0) < 1e-14);
    CHECK(std::abs(pair.sigma - eigen_sym(j, {.compute_vectors = false}).eigenvalues.back()) < 1e-12);
  }
}

TEST_CASE("lowest eigenvalue: bipartite symmetry and the complete graph counterexample") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = testsupport::random_bipartite_graph(rng, 1 + trial % 4, 2 + trial % 3, trial % 4);
    const auto p = testsupport::random_params(rng, g, 0.2, 2.0, 1.5);
    const auto low = perron_minus(g, p);
    CHECK(std::abs(low.sigma_minus + perron(g, negate_b(p)).sigma) < 1e-12);
    const auto j = assemble_jacobi(g, p);
    CHECK((j * low.psi_minus - low.sigma_minus * low.psi_minus).norm() < 1e-11);
    const Eigen::VectorXd signed_psi = is_bipartite(g).sign_vector().cwiseProduct(low.psi_minus);
    CHECK(signed_psi.minCoeff() > 0.0);

    const auto plus = eigen_sym(j, {.compute_vectors = false}).eigenvalues;
    auto flipped = eigen_sym(assemble_jacobi(g, negate_b(p)), {.compute_vectors = false}).eigenvalues;
    for (auto& l : flipped) l = -l;
    std::sort(flipped.begin(), flipped.end());
    for (std::size_t k = 0; k < plus.size(); ++k) CHECK(std::abs(plus[k] - flipped[k]) < 1e-12);
  }

  const auto k4 = complete_model(4);
  CHECK(perron_minus(k4.graph, k4.params).sigma_minus == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(-perron(k4.graph, negate_b(k4.params)).sigma == doctest::Approx(-3.0).epsilon(1e-13));

  const auto cube = cube_model();
  CHECK(perron_minus(cube.graph, cube.params).sigma_minus ==
        doctest::Approx(-perron(cube.graph, cube.params).sigma).epsilon(1e-13));
}
