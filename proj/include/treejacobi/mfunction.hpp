#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "treejacobi/graph.hpp"

namespace treejacobi {

using cplx = std::complex<double>;

struct MSolverOptions {
  double damping = 0.5;
  double tolerance = 1e-13;           // max update, relative to max(1, |m|)
  long max_iterations = 100'000;      // fixed-point budget before the Newton fallback
  int newton_iterations = 100;
  double residual_tolerance = 1e-12;  // largest accepted backward error (see residual)
};

/// Half-tree Green's functions at energy z. Directed edge 2e runs from
/// edge(e).u to edge(e).v, 2e + 1 the other way; m[d] is the diagonal resolvent
/// at the head of d of the half-tree entered through d.
struct MVector {
  cplx z;
  std::vector<cplx> m;
};

/// Prepared recursion m_d = 1 / (b_head - z - sum_{d' after d} a_{d'}^2 m_{d'})
/// for one graph, where "after d" means every directed edge leaving the head of
/// d other than the reverse of d (parallel edges continue separately).
class MFunctionSolver {
 public:
  MFunctionSolver(const FiniteGraph& graph, const JacobiParams& params,
                  const MSolverOptions& options = {});

  /// Damped fixed point from m = -1/z, Newton fallback. Requires Im z > 0, or
  /// z real with |z| above every eigenvalue of J in absolute value.
  /// Throws NumericalError if neither route converges to a Herglotz solution.
  MVector solve(cplx z) const;

  /// Newton continuation from a solution at another energy, halving the step
  /// (geometrically in Im z) whenever Newton fails or leaves the upper half
  /// plane. Falls back to solve(z).
  MVector continue_from(const MVector& start, cplx z) const;

  cplx green(const MVector& m, int vertex) const;
  /// (1/p) sum_v Im G_v / pi for the solution m.
  double density(const MVector& m) const;
  /// Backward error of the system: max over d of |1/m_d - D_d(m)| divided by
  /// the magnitude of the terms of D_d = b - z - sum a^2 m (or |1/m_d| if larger).
  double residual(const MVector& m) const;

  int directed_edge_count() const noexcept { return static_cast<int>(head_.size()); }
  int head(int d) const { return head_.at(d); }
  /// Largest |eigenvalue| of J.
  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  void apply(cplx z, std::span<const cplx> m, std::span<cplx> out) const;
  std::optional<std::vector<cplx>> fixed_point(cplx z) const;
  std::optional<std::vector<cplx>> newton(cplx z, std::vector<cplx> m) const;
  bool acceptable(cplx z, std::span<const cplx> m) const;
  double backward_error(cplx z, std::span<const cplx> m) const;

  MSolverOptions options_;
  std::vector<double> b_;
  std::vector<int> out_offsets_;
  std::vector<int> out_;  // directed edges leaving each vertex
  std::vector<int> head_;
  std::vector<int> succ_offsets_;
  std::vector<int> succ_;  // directed edges continuing each directed edge
  std::vector<double> a2_;  // a^2 per directed edge
  double spectral_radius_ = 0.0;
};

MVector solve_m(const FiniteGraph& graph, const JacobiParams& params, cplx z,
                const MSolverOptions& options = {});

/// G_v(z) = 1 / (b_v - z - sum_{edges at v} a^2 m_{v -> w}).
cplx green_diag(const FiniteGraph& graph, const JacobiParams& params, const MVector& m, int vertex);
cplx green_diag(const FiniteGraph& graph, const JacobiParams& params, cplx z, int vertex,
                const MSolverOptions& options = {});

/// (1/p) sum_v Im G_v(x + i eps) / pi.
double dos_density(const FiniteGraph& graph, const JacobiParams& params, double x, double eps,
                   const MSolverOptions& options = {});

struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

struct PointMass {
  double energy = 0.0;
  double weight = 0.0;
};

struct SpectrumReport {
  std::vector<Band> bands;               // sorted, disjoint
  std::vector<PointMass> point_masses;   // sorted by energy
  double sigma_top = 0.0;                // sup spec(H)
  double sigma_bottom = 0.0;             // inf spec(H)
};

struct ScanSample {
  double x = 0.0;
  double density = 0.0;
  double eps_used = 0.0;  // 0 marks the extrapolated value
};

struct ScanOptions {
  std::optional<double> lo, hi;  // default [-rho - 1, rho + 1], rho the spectral radius of J
  int resolution = 801;
  std::vector<double> eps = {1e-2, 1e-3, 1e-4};
  std::vector<double> refine_eps = {1e-6, 1e-7, 1e-8};  // used when bisecting band edges
  double band_threshold = 1e-6;
  double edge_tolerance = 1e-6;
  double min_point_weight = 1e-6;
  double max_failure_fraction = 0.01;
  unsigned threads = 0;  // 0 = hardware concurrency
  MSolverOptions solver;
};

struct ScanResult {
  SpectrumReport report;
  std::vector<ScanSample> samples;  // per grid point: one row per eps, then the extrapolated row
};

/// Bands, point masses and extreme points of spec(H) from the density of
/// states on a grid. Throws std::invalid_argument if the range does not
/// contain [-sigma - 1, sigma + 1] and NumericalError if more than
/// max_failure_fraction of grid points fail.
ScanResult spectrum_scan(const FiniteGraph& graph, const JacobiParams& params,
                         const ScanOptions& options = {});

/// Extrapolation of densities at two broadenings to zero broadening, linear in eps.
double extrapolate_to_zero(double eps_large, double density_large, double eps_small,
                           double density_small);

}  // namespace treejacobi
