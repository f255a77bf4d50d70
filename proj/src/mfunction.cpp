#include "treejacobi/mfunction.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

#include "treejacobi/errors.hpp"
#include "treejacobi/spectral.hpp"

namespace treejacobi {

namespace {

double scaled(cplx m) { return std::max(1.0, std::abs(m)); }

bool all_finite(std::span<const cplx> m) {
  return std::all_of(m.begin(), m.end(),
                     [](cplx x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); });
}

std::string format_z(cplx z) {
  std::ostringstream out;
  out.precision(17);
  out << "z = " << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return out.str();
}

// Runs body(i) for i in [0, n) on up to `threads` workers; each index is
// written by exactly one worker, so the result does not depend on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    workers.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) body(i);
    });
  for (auto& w : workers) w.join();
}

}  // namespace

MFunctionSolver::MFunctionSolver(const FiniteGraph& graph, const JacobiParams& params,
                                 const MSolverOptions& options)
    : options_(options), b_(params.b) {
  validate_params(graph, params);
  const int q = graph.edge_count();
  const int p = graph.vertex_count();
  head_.resize(2 * q);
  a2_.resize(2 * q);
  std::vector<int> tail(2 * q);
  for (int e = 0; e < q; ++e) {
    const auto& edge = graph.edge(e);
    head_[2 * e] = edge.v;
    tail[2 * e] = edge.u;
    head_[2 * e + 1] = edge.u;
    tail[2 * e + 1] = edge.v;
    a2_[2 * e] = a2_[2 * e + 1] = params.a[e] * params.a[e];
  }
  out_offsets_.assign(p + 1, 0);
  for (int d = 0; d < 2 * q; ++d) ++out_offsets_[tail[d] + 1];
  for (int v = 0; v < p; ++v) out_offsets_[v + 1] += out_offsets_[v];
  out_.resize(2 * q);
  std::vector<int> fill(out_offsets_.begin(), out_offsets_.end() - 1);
  for (int d = 0; d < 2 * q; ++d) out_[fill[tail[d]]++] = d;

  succ_offsets_.assign(1, 0);
  for (int d = 0; d < 2 * q; ++d) {
    const int v = head_[d];
    for (int k = out_offsets_[v]; k < out_offsets_[v + 1]; ++k)
      if (out_[k] / 2 != d / 2) succ_.push_back(out_[k]);
    succ_offsets_.push_back(static_cast<int>(succ_.size()));
  }

  const auto spectrum = eigen_sym(assemble_jacobi(graph, params), {.compute_vectors = false});
  spectral_radius_ = std::max(std::abs(spectrum.eigenvalues.front()),
                              std::abs(spectrum.eigenvalues.back()));
}

void MFunctionSolver::apply(cplx z, std::span<const cplx> m, std::span<cplx> out) const {
  for (std::size_t d = 0; d < head_.size(); ++d) {
    cplx denom = b_[head_[d]] - z;
    for (int k = succ_offsets_[d]; k < succ_offsets_[d + 1]; ++k) denom -= a2_[succ_[k]] * m[succ_[k]];
    out[d] = 1.0 / denom;
  }
}

double MFunctionSolver::residual(const MVector& m) const { return backward_error(m.z, m.m); }

// |1/m_d - D_d(m)| relative to the size of the terms forming D_d, so that the
// measure stays meaningful where |m| grows and D_d is a cancellation.
double MFunctionSolver::backward_error(cplx z, std::span<const cplx> m) const {
  double r = 0.0;
  for (std::size_t d = 0; d < head_.size(); ++d) {
    cplx denom = b_[head_[d]] - z;
    double size = std::abs(denom);
    for (int k = succ_offsets_[d]; k < succ_offsets_[d + 1]; ++k) {
      denom -= a2_[succ_[k]] * m[succ_[k]];
      size += a2_[succ_[k]] * std::abs(m[succ_[k]]);
    }
    const cplx inverse = 1.0 / m[d];
    r = std::max(r, std::abs(inverse - denom) / std::max(size, std::abs(inverse)));
  }
  return r;
}

bool MFunctionSolver::acceptable(cplx z, std::span<const cplx> m) const {
  if (!all_finite(m)) return false;
  if (backward_error(z, m) > options_.residual_tolerance) return false;
  if (z.imag() > 0.0)
    return std::all_of(m.begin(), m.end(), [](cplx x) { return x.imag() > 0.0; });
  return true;
}

std::optional<std::vector<cplx>> MFunctionSolver::fixed_point(cplx z) const {
  const std::size_t n = head_.size();
  std::vector<cplx> m(n, -1.0 / z), f(n);
  const double theta = options_.damping;
  for (long it = 0; it < options_.max_iterations; ++it) {
    apply(z, m, f);
    double update = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      const cplx next = (1.0 - theta) * m[d] + theta * f[d];
      update = std::max(update, std::abs(next - m[d]) / scaled(next));
      m[d] = next;
    }
    if (!std::isfinite(update)) return std::nullopt;
    if (update < options_.tolerance) return m;
  }
  return m;  // unconverged; the caller decides whether Newton can finish it
}

std::optional<std::vector<cplx>> MFunctionSolver::newton(cplx z, std::vector<cplx> m) const {
  const auto n = static_cast<Eigen::Index>(head_.size());
  Eigen::MatrixXcd jac(n, n);
  Eigen::VectorXcd rhs(n);
  for (int it = 0; it < options_.newton_iterations; ++it) {
    // Residual R_d = m_d * D_d(m) - 1 with D_d = b - z - sum a^2 m_succ.
    jac.setZero();
    for (Eigen::Index d = 0; d < n; ++d) {
      cplx denom = b_[head_[d]] - z;
      for (int k = succ_offsets_[d]; k < succ_offsets_[d + 1]; ++k) {
        denom -= a2_[succ_[k]] * m[succ_[k]];
        jac(d, succ_[k]) -= m[d] * a2_[succ_[k]];
      }
      jac(d, d) += denom;
      rhs[d] = 1.0 - m[d] * denom;
    }
    Eigen::VectorXcd step = jac.partialPivLu().solve(rhs);
    double update = 0.0;
    for (Eigen::Index d = 0; d < n; ++d) {
      m[d] += step[d];
      update = std::max(update, std::abs(step[d]) / scaled(m[d]));
    }
    if (!std::isfinite(update)) return std::nullopt;
    if (update < options_.tolerance || backward_error(z, m) < 1e-2 * options_.residual_tolerance) return m;
  }
  return std::nullopt;
}

MVector MFunctionSolver::solve(cplx z) const {
  if (z.imag() < 0.0) throw std::invalid_argument("solve_m: Im z must be >= 0 (" + format_z(z) + ")");
  if (z.imag() == 0.0 && !(std::abs(z.real()) > spectral_radius_))
    throw std::invalid_argument("solve_m: real z must exceed the spectral radius of J (" +
                                format_z(z) + ")");
  auto m = fixed_point(z);
  if (m && acceptable(z, *m)) return {z, std::move(*m)};
  auto polished = newton(z, m ? std::move(*m) : std::vector<cplx>(head_.size(), -1.0 / z));
  if (polished && acceptable(z, *polished)) return {z, std::move(*polished)};
  throw NumericalError("solve_m: no convergence at " + format_z(z));
}

MVector MFunctionSolver::continue_from(const MVector& start, cplx z) const {
  if (start.m.size() != head_.size()) return solve(z);
  std::vector<cplx> m = start.m;
  cplx from = start.z, target = z;
  for (int attempt = 0; attempt < 200; ++attempt) {
    auto next = newton(target, m);
    if (next && acceptable(target, *next)) {
      if (target == z) return {z, std::move(*next)};
      m = std::move(*next);
      from = target;
      target = z;
      continue;
    }
    const double im = from.imag() > 0.0 && target.imag() > 0.0 ? std::sqrt(from.imag() * target.imag())
                                                               : 0.5 * (from.imag() + target.imag());
    target = {0.5 * (from.real() + target.real()), im};
    if (std::abs(target - from) <= 1e-14 * std::abs(z)) break;
  }
  return solve(z);
}

cplx MFunctionSolver::green(const MVector& m, int vertex) const {
  cplx denom = b_.at(vertex) - m.z;
  for (int k = out_offsets_[vertex]; k < out_offsets_[vertex + 1]; ++k)
    denom -= a2_[out_[k]] * m.m[out_[k]];
  return 1.0 / denom;
}

double MFunctionSolver::density(const MVector& m) const {
  double s = 0.0;
  for (int v = 0; v + 1 < static_cast<int>(out_offsets_.size()); ++v) s += green(m, v).imag();
  return s / (std::numbers::pi * static_cast<double>(b_.size()));
}

MVector solve_m(const FiniteGraph& graph, const JacobiParams& params, cplx z,
                const MSolverOptions& options) {
  return MFunctionSolver(graph, params, options).solve(z);
}

cplx green_diag(const FiniteGraph& graph, const JacobiParams& params, const MVector& m, int vertex) {
  return MFunctionSolver(graph, params).green(m, vertex);
}

cplx green_diag(const FiniteGraph& graph, const JacobiParams& params, cplx z, int vertex,
                const MSolverOptions& options) {
  MFunctionSolver solver(graph, params, options);
  return solver.green(solver.solve(z), vertex);
}

double dos_density(const FiniteGraph& graph, const JacobiParams& params, double x, double eps,
                   const MSolverOptions& options) {
  if (!(eps > 0.0)) throw std::invalid_argument("dos_density: eps must be > 0");
  MFunctionSolver solver(graph, params, options);
  return solver.density(solver.solve({x, eps}));
}

double extrapolate_to_zero(double eps_large, double density_large, double eps_small,
                           double density_small) {
  return (eps_large * density_small - eps_small * density_large) / (eps_large - eps_small);
}

// ---------------------------------------------------------------------------
// Spectrum scan

namespace {

constexpr double kGolden = 0.6180339887498949;

class DensityProbe {
 public:
  DensityProbe(const MFunctionSolver& solver, std::vector<PointMass> masses = {})
      : solver_(solver), masses_(std::move(masses)) {}

  // Densities at each eps (sorted descending) by continuation in eps: the
  // first value is a cold solve, each later one starts from its predecessor.
  std::vector<double> ladder(double x, const std::vector<double>& eps) const {
    std::vector<double> out;
    out.reserve(eps.size());
    std::optional<MVector> prev;
    for (double e : eps) {
      const cplx z{x, e};
      MVector m = prev ? solver_.continue_from(*prev, z) : solver_.solve(z);
      out.push_back(solver_.density(m) - lorentzians(x, e));
      prev = std::move(m);
    }
    return out;
  }

  // Continuation from `start_eps` down to each target in decade steps.
  std::vector<double> deep(double x, double start_eps, const std::vector<double>& targets) const {
    std::vector<double> steps;
    for (double e = start_eps; e > targets.back() * 1.0001; e /= 10.0) steps.push_back(e);
    steps.insert(steps.end(), targets.begin(), targets.end());
    std::sort(steps.begin(), steps.end(), std::greater<>());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    auto all = ladder(x, steps);
    std::vector<double> out;
    for (double t : targets) {
      auto it = std::find(steps.begin(), steps.end(), t);
      out.push_back(all[static_cast<std::size_t>(it - steps.begin())]);
    }
    return out;
  }

  double extrapolated(double x, double start_eps, const std::vector<double>& eps) const {
    auto rho = deep(x, start_eps, eps);
    if (eps.size() == 1) return rho[0];
    const auto n = eps.size();
    return extrapolate_to_zero(eps[n - 2], rho[n - 2], eps[n - 1], rho[n - 1]);
  }

  double lorentzians(double x, double eps) const {
    double s = 0.0;
    for (const auto& pm : masses_)
      s += pm.weight * eps / (std::numbers::pi * ((x - pm.energy) * (x - pm.energy) + eps * eps));
    return s;
  }

 private:
  const MFunctionSolver& solver_;
  std::vector<PointMass> masses_;
};

// Maximiser of f on [lo, hi] by golden-section search.
double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ScanResult spectrum_scan(const FiniteGraph& graph, const JacobiParams& params,
                         const ScanOptions& options) {
  const MFunctionSolver solver(graph, params, options.solver);
  const auto finite = eigen_sym(assemble_jacobi(graph, params), {.compute_vectors = false});
  const double sigma = finite.eigenvalues.back();
  const double rho = solver.spectral_radius();
  const double lo = options.lo.value_or(-rho - 1.0);
  const double hi = options.hi.value_or(rho + 1.0);
  if (lo > std::min(-sigma, finite.eigenvalues.front()) - 1.0 || hi < sigma + 1.0)
    throw std::invalid_argument("spectrum_scan: range must contain [-sigma - 1, sigma + 1] and the "
                                "lowest eigenvalue of J minus 1");
  if (options.resolution < 10) throw std::invalid_argument("spectrum_scan: resolution must be >= 10");
  if (options.eps.empty() || options.refine_eps.empty())
    throw std::invalid_argument("spectrum_scan: eps schedules must be non-empty");
  for (double e : options.eps)
    if (!(e > 0.0)) throw std::invalid_argument("spectrum_scan: eps must be > 0");
  for (double e : options.refine_eps)
    if (!(e > 0.0)) throw std::invalid_argument("spectrum_scan: refine eps must be > 0");

  auto eps = options.eps;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  auto refine_eps = options.refine_eps;
  std::sort(refine_eps.begin(), refine_eps.end(), std::greater<>());
  const std::size_t n = static_cast<std::size_t>(options.resolution);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  auto grid = [&](std::size_t i) { return i + 1 == n ? hi : lo + h * static_cast<double>(i); };

  // 1. Raw densities on the grid.
  std::vector<std::vector<double>> raw(n);
  std::vector<char> failed(n, 0);
  {
    const DensityProbe probe(solver);
    parallel_for(n, options.threads, [&](std::size_t i) {
      try {
        raw[i] = probe.ladder(grid(i), eps);
      } catch (const NumericalError&) {
        failed[i] = 1;
        raw[i].assign(eps.size(), 0.0);
      }
    });
  }
  const auto failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  if (static_cast<double>(failures) > options.max_failure_fraction * static_cast<double>(n)) {
    std::ostringstream msg;
    msg << "spectrum_scan: solver failed at " << failures << " of " << n << " grid points (first at x = ";
    msg << grid(static_cast<std::size_t>(std::find(failed.begin(), failed.end(), 1) - failed.begin()))
        << ")";
    throw NumericalError(msg.str());
  }

  // 2. Point masses: local maxima of the sharpest density, refined and kept
  // when eps * Im G settles to a positive limit.
  std::vector<PointMass> masses;
  {
    const DensityProbe probe(solver);
    const double coarse = eps.back();
    const std::vector<double> weight_eps = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (failed[i] || failed[i - 1] || failed[i + 1]) continue;
      const double c = raw[i].back();
      if (!(c >= raw[i - 1].back() && c >= raw[i + 1].back() &&
            (c > raw[i - 1].back() || c > raw[i + 1].back())))
        continue;
      try {
        double left = grid(i - 1), right = grid(i + 1), x0 = grid(i);
        for (double e = coarse; e >= 1e-8 * 0.999; e /= 100.0) {
          auto f = [&](double x) { return probe.deep(x, eps.front(), {e})[0]; };
          x0 = golden_max(f, left, right, 1e-3 * e);
          left = x0 - 10.0 * e / 100.0;
          right = x0 + 10.0 * e / 100.0;
        }
        auto rho_k = probe.deep(x0, eps.front(), weight_eps);
        std::vector<double> w(rho_k.size());
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::numbers::pi * weight_eps[k] * rho_k[k];
        const double last = w.back(), before = w[w.size() - 2];
        if (last > options.min_point_weight && std::abs(last - before) < 1e-3 * last) {
          if (masses.empty() || std::abs(masses.back().energy - x0) > 1e-9)
            masses.push_back({x0, last});
        }
      } catch (const NumericalError&) {
        // An unresolvable candidate is not reported as a point mass.
      }
    }
  }

  // 3. Band membership from the extrapolated, point-mass-corrected density.
  const DensityProbe corrected(solver, masses);
  std::vector<double> extrapolated(n, 0.0);
  std::vector<char> in_band(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> c(eps.size());
    for (std::size_t k = 0; k < eps.size(); ++k) c[k] = raw[i][k] - corrected.lorentzians(grid(i), eps[k]);
    const auto m = eps.size();
    extrapolated[i] = m == 1 ? c[0] : extrapolate_to_zero(eps[m - 2], c[m - 2], eps[m - 1], c[m - 1]);
    in_band[i] = !failed[i] && extrapolated[i] > options.band_threshold;
  }
  // Grid points sitting on a point mass or where the solver failed follow their neighbours.
  for (std::size_t i = 0; i < n; ++i) {
    bool on_mass = std::any_of(masses.begin(), masses.end(),
                               [&](const PointMass& pm) { return std::abs(pm.energy - grid(i)) < 1e-6 * h; });
    if (on_mass || failed[i])
      in_band[i] = i > 0 && i + 1 < n && in_band[i - 1] && in_band[i + 1];
  }

  // 4. Band edges by bisection with the fine eps schedule.
  auto fine_in = [&](double x) {
    return corrected.extrapolated(x, eps.front(), refine_eps) > options.band_threshold;
  };
  auto bisect = [&](double outside, double inside) {
    while (std::abs(inside - outside) > options.edge_tolerance) {
      const double mid = 0.5 * (inside + outside);
      (fine_in(mid) ? inside : outside) = mid;
    }
    return 0.5 * (inside + outside);
  };

  SpectrumReport report;
  for (std::size_t i = 0; i < n;) {
    if (!in_band[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && in_band[j + 1]) ++j;
    // Coarse runs may overshoot an edge by a grid step; walk inward until the
    // fine test agrees, then bisect.
    std::size_t first = i, last = j;
    double outside_lo = i == 0 ? grid(0) : grid(i - 1);
    while (first <= last && !fine_in(grid(first))) outside_lo = grid(first++);
    if (first > last) {
      i = j + 1;
      continue;
    }
    double outside_hi = j + 1 == n ? grid(n - 1) : grid(j + 1);
    while (last > first && !fine_in(grid(last))) outside_hi = grid(last--);
    const double band_lo = (i == 0 && first == 0) ? grid(0) : bisect(outside_lo, grid(first));
    const double band_hi = (j + 1 == n && last == n - 1) ? grid(n - 1) : bisect(outside_hi, grid(last));
    report.bands.push_back({band_lo, band_hi});
    i = j + 1;
  }
  report.point_masses = masses;

  double top = -std::numeric_limits<double>::infinity(), bottom = std::numeric_limits<double>::infinity();
  for (const auto& b : report.bands) {
    top = std::max(top, b.hi);
    bottom = std::min(bottom, b.lo);
  }
  for (const auto& pm : masses) {
    top = std::max(top, pm.energy);
    bottom = std::min(bottom, pm.energy);
  }
  report.sigma_top = top;
  report.sigma_bottom = bottom;

  ScanResult result;
  result.report = std::move(report);
  result.samples.reserve(n * (eps.size() + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < eps.size(); ++k) result.samples.push_back({grid(i), raw[i][k], eps[k]});
    result.samples.push_back({grid(i), extrapolated[i], 0.0});
  }
  return result;
}

}  // namespace treejacobi
