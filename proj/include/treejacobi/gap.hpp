#pragma once

#include <optional>
#include <span>

#include <Eigen/Dense>

#include "treejacobi/graph.hpp"
#include "treejacobi/mfunction.hpp"

namespace treejacobi {

/// Comparison constants between two Jacobi parameter sets on one graph and
/// the resulting two-sided bound on the gap:
///   (I~ / S~) G~  <=  G  <=  (S / I) G~.
struct GapBounds {
  double S = 0.0;        // max over edges (a psi_i psi_j) / (a~ psi~_i psi~_j)
  double I = 0.0;        // min over vertices psi_i^2 / psi~_i^2
  double S_tilde = 0.0;  // roles swapped
  double I_tilde = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double reference_gap = 0.0;  // G~
};

/// The bound from given positive vectors; they need not be normalised.
GapBounds comparison_bounds(const FiniteGraph& graph, std::span<const double> a,
                            const Eigen::VectorXd& psi, std::span<const double> a_tilde,
                            const Eigen::VectorXd& psi_tilde, double reference_gap);

/// Upper-gap bound. Without a reference gap, G~ = sigma~ - Sigma~ with Sigma~
/// from spectrum_scan.
GapBounds gap_quantities(const FiniteGraph& graph, const JacobiParams& params,
                         const JacobiParams& params_tilde,
                         std::optional<double> reference_gap = std::nullopt,
                         const ScanOptions& scan = {});

/// Lower-gap bound on a bipartite graph, from the sign-corrected lowest
/// eigenvectors U psi(a, -b). Without a reference, G~_- = G(a~, -b~) by scan.
/// Throws ValidationError on a non-bipartite graph.
GapBounds gap_minus_quantities(const FiniteGraph& graph, const JacobiParams& params,
                               const JacobiParams& params_tilde,
                               std::optional<double> reference_gap_minus = std::nullopt,
                               const ScanOptions& scan = {});

struct ReferenceGap {
  double sigma = 0.0;
  double Sigma = 0.0;
  double gap = 0.0;
  double sigma_minus = 0.0;
  double Sigma_minus = 0.0;
  double gap_minus = 0.0;
};

/// Closed-form values for the complete bipartite rg graph with a = 1, b = 0:
/// sigma = sqrt(rg), Sigma = sqrt(r-1) + sqrt(g-1). Throws std::invalid_argument
/// unless r > g >= 2.
ReferenceGap reference_gap_rg(int r, int g);

/// d - 2 sqrt(d - 1), the gap of a d-regular graph with a = 1, b = 0.
double reference_gap_free(int d);

struct GapReport {
  double sigma = 0.0;
  double Sigma = 0.0;
  double gap = 0.0;
  bool bipartite = false;
  double sigma_minus = 0.0;  // set when bipartite
  double Sigma_minus = 0.0;
  double gap_minus = 0.0;
};

/// sigma from perron, Sigma (and Sigma_-) from spectrum_scan.
GapReport gap_report(const FiniteGraph& graph, const JacobiParams& params,
                     const ScanOptions& scan = {});

}  // namespace treejacobi
