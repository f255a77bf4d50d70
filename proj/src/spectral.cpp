#include "treejacobi/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "treejacobi/errors.hpp"

namespace treejacobi {

SpectrumFinite eigen_sym(const Eigen::MatrixXd& m, const EigenOptions& options) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigen_sym: matrix is not square");
  const Eigen::Index n = m.rows();
  const double norm = m.norm();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-14 * std::max(norm, 1.0))
    throw std::invalid_argument("eigen_sym: matrix is not symmetric");

  Eigen::MatrixXd a = m;
  Eigen::MatrixXd v;
  if (options.compute_vectors) v = Eigen::MatrixXd::Identity(n, n);

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  const double target = options.relative_tolerance * norm;
  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > options.max_sweeps)
      throw NumericalError("eigen_sym: no convergence after " + std::to_string(options.max_sweeps) +
                           " sweeps");
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p, q); t is the smaller root of t^2 + 2 theta t - 1.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        if (options.compute_vectors) {
          for (Eigen::Index k = 0; k < n; ++k) {
            const double vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });

  SpectrumFinite out;
  out.eigenvalues.reserve(order.size());
  for (auto k : order) out.eigenvalues.push_back(a(k, k));
  if (options.compute_vectors) {
    Eigen::MatrixXd sorted(n, n);
    for (Eigen::Index j = 0; j < n; ++j) sorted.col(j) = v.col(order[static_cast<std::size_t>(j)]);
    out.eigenvectors = std::move(sorted);
  }
  return out;
}

PerronPair perron(const FiniteGraph& graph, const JacobiParams& params,
                  const PowerOptions& options) {
  validate_params(graph, params);
  const Eigen::MatrixXd J = assemble_jacobi(graph, params);
  const int p = graph.vertex_count();

  double max_b = 0.0, max_degree = 0.0;
  for (int v = 0; v < p; ++v) {
    max_b = std::max(max_b, std::abs(params.b[v]));
    double weighted = 0.0;
    for (int e : graph.incident(v)) weighted += params.a[e];
    max_degree = std::max(max_degree, weighted);
  }
  const double shift = max_b + max_degree + 1.0;
  const Eigen::MatrixXd shifted = J + shift * Eigen::MatrixXd::Identity(p, p);

  Eigen::VectorXd x = Eigen::VectorXd::Ones(p).normalized();
  for (long it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd y = (shifted * x).normalized();
    const double change = (y - x).cwiseAbs().maxCoeff();
    x = std::move(y);
    if (change < options.tolerance) {
      const double sigma = x.dot(J * x);
      if (x.minCoeff() <= 0.0)
        throw NumericalError("perron: eigenvector is not strictly positive (graph disconnected?)");
      return {sigma, x};
    }
  }
  throw NumericalError("perron: power iteration did not converge in " +
                       std::to_string(options.max_iterations) + " iterations");
}

LowestPair perron_minus(const FiniteGraph& graph, const JacobiParams& params) {
  validate_params(graph, params);
  auto spectrum = eigen_sym(assemble_jacobi(graph, params));
  LowestPair out;
  out.sigma_minus = spectrum.eigenvalues.front();
  auto parts = is_bipartite(graph);
  if (parts.bipartite()) {
    auto flipped = perron(graph, negate_b(params));
    out.psi_minus = parts.sign_vector().cwiseProduct(flipped.psi);
  } else {
    out.psi_minus = spectrum.eigenvectors->col(0);
  }
  return out;
}

}  // namespace treejacobi
