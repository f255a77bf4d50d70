#include "treejacobi/gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "treejacobi/errors.hpp"
#include "treejacobi/spectral.hpp"

namespace treejacobi {

namespace {

// (a_x psi_x(i) psi_x(j)) / (a_y psi_y(i) psi_y(j)), written once so that
// swapping the two parameter sets swaps S and S~ bit for bit.
double edge_ratio(double ax, double xi, double xj, double ay, double yi, double yj) {
  return (ax * xi * xj) / (ay * yi * yj);
}

double vertex_ratio(double x, double y) { return (x * x) / (y * y); }

}  // namespace

GapBounds comparison_bounds(const FiniteGraph& graph, std::span<const double> a,
                            const Eigen::VectorXd& psi, std::span<const double> a_tilde,
                            const Eigen::VectorXd& psi_tilde, double reference_gap) {
  if (psi.minCoeff() <= 0.0 || psi_tilde.minCoeff() <= 0.0)
    throw std::invalid_argument("comparison_bounds: eigenvectors must be strictly positive");
  GapBounds out;
  out.S = out.S_tilde = -std::numeric_limits<double>::infinity();
  out.I = out.I_tilde = std::numeric_limits<double>::infinity();
  for (int e = 0; e < graph.edge_count(); ++e) {
    const auto& edge = graph.edge(e);
    out.S = std::max(out.S, edge_ratio(a[e], psi[edge.u], psi[edge.v], a_tilde[e], psi_tilde[edge.u],
                                       psi_tilde[edge.v]));
    out.S_tilde = std::max(out.S_tilde, edge_ratio(a_tilde[e], psi_tilde[edge.u], psi_tilde[edge.v],
                                                   a[e], psi[edge.u], psi[edge.v]));
  }
  for (int v = 0; v < graph.vertex_count(); ++v) {
    out.I = std::min(out.I, vertex_ratio(psi[v], psi_tilde[v]));
    out.I_tilde = std::min(out.I_tilde, vertex_ratio(psi_tilde[v], psi[v]));
  }
  out.reference_gap = reference_gap;
  out.lower = out.I_tilde / out.S_tilde * reference_gap;
  out.upper = out.S / out.I * reference_gap;
  return out;
}

GapBounds gap_quantities(const FiniteGraph& graph, const JacobiParams& params,
                         const JacobiParams& params_tilde, std::optional<double> reference_gap,
                         const ScanOptions& scan) {
  const auto pair = perron(graph, params);
  const auto pair_tilde = perron(graph, params_tilde);
  const double reference = reference_gap.value_or(
      pair_tilde.sigma - spectrum_scan(graph, params_tilde, scan).report.sigma_top);
  return comparison_bounds(graph, params.a, pair.psi, params_tilde.a, pair_tilde.psi, reference);
}

GapBounds gap_minus_quantities(const FiniteGraph& graph, const JacobiParams& params,
                               const JacobiParams& params_tilde,
                               std::optional<double> reference_gap_minus, const ScanOptions& scan) {
  const auto parts = is_bipartite(graph);
  if (!parts.bipartite())
    throw ValidationError("gap_minus_quantities: graph is not bipartite");
  const Eigen::VectorXd signs = parts.sign_vector();
  const Eigen::VectorXd psi = signs.cwiseProduct(perron_minus(graph, params).psi_minus);
  const Eigen::VectorXd psi_tilde = signs.cwiseProduct(perron_minus(graph, params_tilde).psi_minus);
  double reference = 0.0;
  if (reference_gap_minus) {
    reference = *reference_gap_minus;
  } else {
    // G_-(a~, b~) = G(a~, -b~).
    const auto flipped = negate_b(params_tilde);
    reference = perron(graph, flipped).sigma - spectrum_scan(graph, flipped, scan).report.sigma_top;
  }
  return comparison_bounds(graph, params.a, psi, params_tilde.a, psi_tilde, reference);
}

ReferenceGap reference_gap_rg(int r, int g) {
  if (g < 2 || r <= g) throw std::invalid_argument("reference_gap_rg: needs r > g >= 2");
  ReferenceGap out;
  out.sigma = std::sqrt(static_cast<double>(r) * g);
  out.Sigma = std::sqrt(r - 1.0) + std::sqrt(g - 1.0);
  out.gap = out.sigma - out.Sigma;
  out.sigma_minus = -out.sigma;
  out.Sigma_minus = -out.Sigma;
  out.gap_minus = out.Sigma_minus - out.sigma_minus;
  return out;
}

double reference_gap_free(int d) {
  if (d < 2) throw std::invalid_argument("reference_gap_free: needs d >= 2");
  return d - 2.0 * std::sqrt(d - 1.0);
}

GapReport gap_report(const FiniteGraph& graph, const JacobiParams& params, const ScanOptions& scan) {
  GapReport out;
  out.sigma = perron(graph, params).sigma;
  const auto spectrum = spectrum_scan(graph, params, scan).report;
  out.Sigma = spectrum.sigma_top;
  out.gap = out.sigma - out.Sigma;
  out.bipartite = is_bipartite(graph).bipartite();
  if (out.bipartite) {
    out.sigma_minus = perron_minus(graph, params).sigma_minus;
    out.Sigma_minus = spectrum.sigma_bottom;
    out.gap_minus = out.Sigma_minus - out.sigma_minus;
  }
  return out;
}

}  // namespace treejacobi
