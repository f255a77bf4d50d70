#include "treejacobi/green_models.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "treejacobi/errors.hpp"

namespace treejacobi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

// z * sqrt(1 - c / z^2): the branch of sqrt(z^2 - c) analytic off [-sqrt c, sqrt c]
// and asymptotic to z. At z = 0 the upper half plane limit is used.
cplx radical1(cplx z, double c) {
  if (z == cplx{0.0, 0.0}) return c > 0.0 ? cplx{0.0, std::sqrt(c)} : cplx{0.0, 0.0};
  return z * std::sqrt(1.0 - c / (z * z));
}

// z^2 * sqrt(1 - c1 / z^2) * sqrt(1 - c2 / z^2): the branch of
// sqrt((z^2 - c1)(z^2 - c2)) analytic off the two real bands, asymptotic to z^2.
cplx radical2(cplx z, double c1, double c2) {
  if (z == cplx{0.0, 0.0}) return c1 > 0.0 && c2 > 0.0 ? cplx{-std::sqrt(c1 * c2), 0.0} : cplx{0.0, 0.0};
  const cplx w = z * z;
  return w * std::sqrt(1.0 - c1 / w) * std::sqrt(1.0 - c2 / w);
}

cplx combine(const GreenParts& parts, Sheet sheet) {
  const double s = sheet == Sheet::I ? 1.0 : -1.0;
  return (parts.rational + s * parts.radical) / parts.denominator;
}

double singular_scale(cplx z) { return std::pow(1.0 + std::abs(z), 3); }

}  // namespace

GreenParts green_parts(const ModelGreen& model, cplx z) {
  return std::visit(
      overloaded{
          [z](const FreeModel& m) -> GreenParts {
            if (m.d < 3) throw std::invalid_argument("free model needs d >= 3");
            const double d = m.d;
            return {(2.0 - d) * z, d * radical1(z, 4.0 * (d - 1.0)), 2.0 * (d * d - z * z)};
          },
          [z](const RgModel& m) -> GreenParts {
            if (m.g < 2 || m.r <= m.g) throw std::invalid_argument("rg model needs r > g >= 2");
            const double r = m.r, g = m.g;
            const double root = 2.0 * std::sqrt((r - 1.0) * (g - 1.0));
            const cplx phi_root = radical2(z, r + g - 2.0 + root, r + g - 2.0 - root);
            const cplx denom = 2.0 * z * (r * g - z * z);
            if (m.site == RgSite::red) return {(2.0 - g) * z * z - g * (r - g), g * phi_root, denom};
            return {(2.0 - r) * z * z - r * (g - r), r * phi_root, denom};
          },
          [z](const AltModel& m) -> GreenParts {
            const double b2 = m.b * m.b;
            const cplx delta_root = radical2(z, b2, b2 + 8.0);
            const double shift = m.site == AltSite::plus ? m.b : -m.b;
            return {b2 - z * z, 3.0 * delta_root, 2.0 * (z - shift) * (9.0 - z * z + b2)};
          },
      },
      model);
}

cplx richardson_limit(const std::function<cplx(cplx)>& f, cplx z0, double consistency, cplx direction) {
  std::vector<cplx> values;
  for (int k = 2; k <= 8; ++k) values.push_back(f(z0 + direction * std::pow(10.0, -k)));
  // The error is linear in the step; a step ratio of 10 removes it.
  std::vector<cplx> estimates;
  for (std::size_t k = 0; k + 1 < values.size(); ++k)
    estimates.push_back((10.0 * values[k + 1] - values[k]) / 9.0);
  std::size_t best = 1;
  double best_gap = std::abs(estimates[1] - estimates[0]);
  for (std::size_t k = 2; k < estimates.size(); ++k) {
    const double gap = std::abs(estimates[k] - estimates[k - 1]);
    if (gap < best_gap) {
      best_gap = gap;
      best = k;
    }
  }
  const cplx limit = estimates[best];
  if (!(best_gap < consistency * std::max(1.0, std::abs(limit))))
    throw NumericalError("inconsistent limit sequence near z0 = " + std::to_string(z0.real()) +
                         (z0.imag() != 0.0 ? " + " + std::to_string(z0.imag()) + "i" : std::string()) +
                         " (consecutive estimates differ by " + std::to_string(best_gap) + ")");
  return limit;
}

cplx evaluate(const ModelGreen& model, SheetedPoint p) {
  const auto parts = green_parts(model, p.z);
  const double scale = singular_scale(p.z);
  if (std::abs(parts.denominator) > 1e-12 * scale) return combine(parts, p.sheet);
  const double s = p.sheet == Sheet::I ? 1.0 : -1.0;
  if (std::abs(parts.rational + s * parts.radical) > 1e-8 * scale)
    throw NumericalError("evaluation at a pole on sheet " +
                         std::string(p.sheet == Sheet::I ? "I" : "II") +
                         " (z = " + std::to_string(p.z.real()) + ")");
  return richardson_limit([&](cplx z) { return combine(green_parts(model, z), p.sheet); }, p.z);
}

cplx eval_free(int d, SheetedPoint p) { return evaluate(FreeModel{d}, p); }

cplx eval_rg(int r, int g, RgSite site, SheetedPoint p) { return evaluate(RgModel{r, g, site}, p); }

cplx eval_alt(double b, AltSite site, SheetedPoint p) { return evaluate(AltModel{b, site}, p); }

PoleAudit pole_audit(const ModelGreen& model, double z0) {
  const cplx centre{z0, 0.0};
  const auto parts = green_parts(model, centre);
  // The radical vanishes like a square root, so rounding in z0 leaves ~1e-8.
  if (std::abs(parts.radical) <= 1e-6 * singular_scale(centre))
    throw std::invalid_argument("pole_audit: z0 = " + std::to_string(z0) + " is a branch point");
  const bool denominator_vanishes = std::abs(parts.denominator) <= 1e-9 * singular_scale(centre);

  auto classify = [&](Sheet sheet) {
    auto g = [&](cplx z) { return combine(green_parts(model, z), sheet); };
    SheetBehaviour out;
    out.residue = richardson_limit([&](cplx z) { return (z - centre) * g(z); }, centre, 1e-6, 1.0);
    if (std::abs(out.residue) > 1e-6) {
      out.kind = PointKind::pole;
      return out;
    }
    out.residue = 0.0;
    out.value = richardson_limit(g, centre, 1e-6, 1.0);
    out.kind = denominator_vanishes ? PointKind::removable : PointKind::regular;
    return out;
  };

  PoleAudit audit;
  audit.sheet_one = classify(Sheet::I);
  audit.sheet_two = classify(Sheet::II);
  if (audit.sheet_one.kind == PointKind::pole)
    audit.outcome = AuditOutcome::first_sheet_pole;
  else if (audit.sheet_one.kind == PointKind::removable && audit.sheet_two.kind == PointKind::pole)
    audit.outcome = AuditOutcome::antibound;
  else if (audit.sheet_two.kind != PointKind::pole)
    audit.outcome = AuditOutcome::regular;
  else
    audit.outcome = AuditOutcome::other;
  return audit;
}

std::string to_string(PointKind kind) {
  switch (kind) {
    case PointKind::regular: return "regular";
    case PointKind::removable: return "removable";
    case PointKind::pole: return "pole";
  }
  return "?";
}

std::string to_string(AuditOutcome outcome) {
  switch (outcome) {
    case AuditOutcome::antibound: return "removable-on-I, pole-on-II";
    case AuditOutcome::first_sheet_pole: return "pole-on-I";
    case AuditOutcome::regular: return "regular";
    case AuditOutcome::other: return "other";
  }
  return "?";
}

}  // namespace treejacobi
