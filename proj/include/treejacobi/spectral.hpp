#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "treejacobi/graph.hpp"

namespace treejacobi {

struct SpectrumFinite {
  std::vector<double> eigenvalues;             // ascending, with multiplicity
  std::optional<Eigen::MatrixXd> eigenvectors;  // column k pairs with eigenvalues[k]
};

struct EigenOptions {
  double relative_tolerance = 1e-13;  // off-diagonal Frobenius norm / ||M||_F
  int max_sweeps = 100;
  bool compute_vectors = true;
};

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
/// Throws std::invalid_argument on a non-square or non-symmetric input and
/// NumericalError if the sweep limit is reached.
SpectrumFinite eigen_sym(const Eigen::MatrixXd& m, const EigenOptions& options = {});

struct PerronPair {
  double sigma = 0.0;
  Eigen::VectorXd psi;  // strictly positive, unit Euclidean norm
};

struct PowerOptions {
  double tolerance = 1e-14;
  long max_iterations = 1'000'000;
};

/// Top eigenvalue and positive eigenvector of J(a, b) by power iteration on
/// J + c I with c = max|b| + max weighted degree + 1, started from all ones.
PerronPair perron(const FiniteGraph& graph, const JacobiParams& params,
                  const PowerOptions& options = {});

struct LowestPair {
  double sigma_minus = 0.0;
  Eigen::VectorXd psi_minus;  // unit norm
};

/// Lowest eigenvalue of J(a, b) (from eigen_sym) and an eigenvector. On a
/// bipartite graph the eigenvector is U psi(a, -b) with U the bipartition signs.
LowestPair perron_minus(const FiniteGraph& graph, const JacobiParams& params);

}  // namespace treejacobi
