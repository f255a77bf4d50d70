#pragma once

#include <complex>
#include <functional>
#include <string>
#include <variant>

namespace treejacobi {

using cplx = std::complex<double>;

/// Sheet I is the determination on which the radical behaves like +z^k as
/// z -> +infinity along the real axis; sheet II flips the radical's sign.
enum class Sheet { I, II };

struct SheetedPoint {
  cplx z;
  Sheet sheet = Sheet::I;
};

enum class RgSite { red, green };
enum class AltSite { plus, minus };

/// Free Laplacian on the homogeneous tree of degree d.
struct FreeModel {
  int d = 3;
};
/// (r, g)-biregular tree from the complete bipartite graph, a = 1, b = 0.
struct RgModel {
  int r = 3;
  int g = 2;
  RgSite site = RgSite::red;
};
/// Degree-3 tree with potential alternating between b and -b.
struct AltModel {
  double b = 1.0;
  AltSite site = AltSite::plus;
};

using ModelGreen = std::variant<FreeModel, RgModel, AltModel>;

/// G = (P(z) + s C(z) R(z)) / D(z) with s = +1 on sheet I and -1 on sheet II.
struct GreenParts {
  cplx rational;  // P
  cplx radical;   // C R, sheet-I determination
  cplx denominator;
};

/// Throws std::invalid_argument for d < 3, r <= g or g < 2.
GreenParts green_parts(const ModelGreen& model, cplx z);

/// Evaluates the closed form on the requested sheet. A removable 0/0 point is
/// filled by its limit; an exact pole throws NumericalError.
cplx evaluate(const ModelGreen& model, SheetedPoint p);

cplx eval_free(int d, SheetedPoint p);
cplx eval_rg(int r, int g, RgSite site, SheetedPoint p);
cplx eval_alt(double b, AltSite site, SheetedPoint p);

/// Limit of f(z0 + h * direction) as h -> 0 from h = 1e-2 .. 1e-8 with
/// Richardson extrapolation; throws NumericalError if consecutive estimates
/// differ by more than `consistency`.
cplx richardson_limit(const std::function<cplx(cplx)>& f, cplx z0, double consistency = 1e-6,
                      cplx direction = cplx{0.0, 1.0});

enum class PointKind { regular, removable, pole };

struct SheetBehaviour {
  PointKind kind = PointKind::regular;
  cplx value;    // finite limit of G (regular, removable)
  cplx residue;  // lim (z - z0) G (pole)
};

enum class AuditOutcome {
  antibound,         // removable on sheet I, pole on sheet II
  first_sheet_pole,  // genuine pole of the physical Green's function
  regular,           // finite on both sheets
  other,
};

struct PoleAudit {
  SheetBehaviour sheet_one;
  SheetBehaviour sheet_two;
  AuditOutcome outcome = AuditOutcome::other;
};

/// Classifies the real point z0 on both sheets from the sequences
/// (z - z0) G(z) and G(z) along z = z0 + 10^-k, k = 2..8. Throws
/// std::invalid_argument at a branch point of the radical.
PoleAudit pole_audit(const ModelGreen& model, double z0);

std::string to_string(PointKind kind);
std::string to_string(AuditOutcome outcome);

}  // namespace treejacobi
