#include "taperfold/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace taperfold {

namespace {

// Angle between two 2D vectors, in [0, pi].
double angle_between(const Vec2& u, const Vec2& v) {
    const double cross = u.x() * v.y() - u.y() * v.x();
    return std::atan2(std::abs(cross), u.dot(v));
}

// Numerically stable Heron area (Kahan): sides sorted a >= b >= c, with
// the parenthesization kept exactly as written.
double stable_triangle_area(double a, double b, double c) {
    if (a < b) std::swap(a, b);
    if (b < c) std::swap(b, c);
    if (a < b) std::swap(a, b);
    const double t0 = a + (b + c);
    const double t1 = c - (a - b);
    const double t2 = c + (a - b);
    const double t3 = a + (b - c);
    const double prod = t0 * t1 * t2 * t3;
    return 0.25 * std::sqrt(std::max(prod, 0.0));
}

}  // namespace

void MaterialSpec::validate() const {
    if (!(E > 0.0)) throw ValidationError("E", "Young's modulus must be positive");
    if (!(nu >= 0.0 && nu < 0.5)) throw ValidationError("nu", "Poisson's ratio must lie in [0, 0.5)");
}

void PanelParams::validate() const {
    if (!(l1 > 0.0)) throw ValidationError("l1", "must be positive");
    if (!(l2 > 0.0)) throw ValidationError("l2", "must be positive");
    if (!(H0 > 0.0)) throw ValidationError("H0", "must be positive");
    if (!(t_f > 0.0)) throw ValidationError("t_f", "must be positive");
    if (!(t_c > 0.0 && t_c <= t_f)) throw ValidationError("t_c", "must satisfy 0 < t_c <= t_f");
    if (!(dist >= 0.0)) throw ValidationError("dist", "must be non-negative");
    if (!(alpha_deg >= 0.0 && alpha_deg < 90.0)) throw ValidationError("alpha", "must lie in [0, 90)");
    if (!(n > 0.0)) throw ValidationError("n", "must be positive");
    if (material) material->validate();
}

double closed_form_h1(double dist, double H0, double theta) {
    const double s = std::sin(theta);
    return (2.0 * dist * dist + H0 * H0 * (1.0 - s)) / (2.0 * H0 * std::cos(theta));
}

double closed_form_h2(double dist, double H0, double theta) {
    const double s = std::sin(theta);
    return (2.0 * dist * dist + H0 * H0 * (1.0 + s)) / (2.0 * H0 * std::cos(theta));
}

double height_ratio(double dist, double H0, double theta) {
    const double s = std::sin(theta);
    const double denom = 2.0 * dist * dist + H0 * H0 * (1.0 - s);
    if (!(denom > 0.0)) throw InfeasibleGeometry("height ratio denominator is non-positive");
    return 1.0 + 2.0 * H0 * H0 * s / denom;
}

ApexSolution solve_exact_apex(double dist, double H0, double theta) {
    if (!(dist >= 0.0)) throw InfeasibleGeometry("dist must be non-negative");
    if (!(H0 > 0.0)) throw InfeasibleGeometry("H0 must be positive");
    if (!(theta >= 0.0 && theta < kPi / 2.0)) throw InfeasibleGeometry("theta must lie in [0, pi/2)");

    const double c = H0 / std::cos(theta);
    const double drop = H0 * std::tan(theta);  // required h2 - h1
    const double d2 = dist * dist;

    const auto f = [&](double x) {
        return std::sqrt((c - x) * (c - x) + d2) - std::sqrt(x * x + d2) - drop;
    };

    double lo = 0.0, hi = c;
    double flo = f(lo);
    const double scale = c + drop + dist;
    if (flo < -1e-12 * scale) {
        throw NoSolution("no apex projection in [0, |MN|] satisfies the height constraint");
    }
    if (flo < 0.0) flo = 0.0;  // boundary root within tolerance

    // f is strictly decreasing on [0, c]; bisection with Newton steps
    // whenever they stay inside the bracket.
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fx = f(x);
        if (std::abs(fx) < 1e-14 * scale) break;
        if (fx > 0.0) lo = x; else hi = x;

        const double r1 = std::sqrt((c - x) * (c - x) + d2);
        const double r2 = std::sqrt(x * x + d2);
        const double dfx = (r1 > 0.0 && r2 > 0.0) ? (-(c - x) / r1 - x / r2) : 0.0;
        double xn = (dfx != 0.0) ? x - fx / dfx : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) < 1e-16 * c) { x = xn; break; }
        x = xn;
    }

    ApexSolution sol;
    sol.x = x;
    sol.h1 = std::sqrt(x * x + d2);
    sol.h2 = std::sqrt((c - x) * (c - x) + d2);
    sol.residual = std::abs(sol.h2 - sol.h1 - drop);
    return sol;
}

double protrusion_from_heights(double h1, double h2, double H0, double theta) {
    if (!(h1 > 0.0) || !(h2 > 0.0) || !(H0 > 0.0)) {
        throw DegenerateTriangle("triangle sides must be positive");
    }
    const double L = H0 / std::cos(theta);
    const double p = 0.5 * (h1 + h2 + L);

    // Worst triangle-inequality violation: positive means sides cannot
    // close a triangle.
    double a = h1, b = h2, c = L;
    if (a < b) std::swap(a, b);
    if (b < c) std::swap(b, c);
    if (a < b) std::swap(a, b);
    const double violation = (a - b) - c;
    const double tol = 1e-12 * p;
    if (violation > tol) {
        throw DegenerateTriangle("triangle inequality fails for (h1, h2, |MN|)");
    }
    if (violation > -tol) return 0.0;  // apex on the midline

    const double area = stable_triangle_area(h1, h2, L);
    return 2.0 * area / L;
}

namespace {

// C from distances to three anchor points, picking the solution with the
// larger offset along plane_normal: the side kink bulges toward the apex
// side of the boundary plane, which keeps a circular array of panels
// clear of its neighbors.
Vec3 trilaterate(const Vec3& A, const Vec3& B, const Vec3& O,
                 double rA, double rB, double rO, const Vec3& plane_normal) {
    const Vec3 ab = B - A;
    const double dab = ab.norm();
    if (dab <= 0.0) throw InfeasibleGeometry("trilateration anchors coincide");
    const Vec3 ex = ab / dab;
    const Vec3 ao = O - A;
    const double i = ex.dot(ao);
    Vec3 eyv = ao - i * ex;
    const double j = eyv.norm();
    if (j <= 1e-12 * dab) throw InfeasibleGeometry("apex lies on the boundary edge");
    const Vec3 ey = eyv / j;
    const Vec3 ez = ex.cross(ey);

    const double cx = (rA * rA - rB * rB + dab * dab) / (2.0 * dab);
    const double cy = (rA * rA - rO * rO + i * i + j * j - 2.0 * cx * i) / (2.0 * j);
    double cz2 = rA * rA - cx * cx - cy * cy;
    if (cz2 < -1e-9 * rA * rA) {
        throw InfeasibleGeometry("no folded position reaches the required edge lengths");
    }
    const double cz = std::sqrt(std::max(cz2, 0.0));

    const Vec3 base = A + cx * ex + cy * ey;
    const Vec3 cand0 = base + cz * ez;
    const Vec3 cand1 = base - cz * ez;
    const double s0 = plane_normal.dot(cand0 - A);
    const double s1 = plane_normal.dot(cand1 - A);
    return (s0 > s1) ? cand0 : cand1;
}

}  // namespace

PanelGeometry derive_panel_geometry(const PanelParams& params, const GeometryOptions& opts) {
    params.validate();
    const double theta = params.theta();
    const double H0 = params.H0;
    const double c = H0 / std::cos(theta);

    ApexSolution exact;
    try {
        exact = solve_exact_apex(params.dist, H0, theta);
    } catch (const NoSolution& e) {
        throw InfeasibleGeometry(e.what());
    }
    const double h1c = closed_form_h1(params.dist, H0, theta);
    const double h2c = closed_form_h2(params.dist, H0, theta);

    PanelGeometry g;
    g.branch = opts.branch;
    g.theta = theta;
    g.dist_input = params.dist;
    g.closed_form_gap = std::abs(h1c - exact.h1) / exact.h1;

    if (opts.branch == GeometryBranch::Exact) {
        g.h1 = exact.h1;
        g.h2 = exact.h2;
    } else {
        g.h1 = h1c;
        g.h2 = h2c;
    }
    if (!(g.h1 > 0.0) || !(g.h2 > 0.0)) throw InfeasibleGeometry("derived apex height is non-positive");

    // Apex projection onto the midline and the realized offset; for the
    // closed-form branch the offset differs slightly from the request.
    const double x = (c * c + g.h1 * g.h1 - g.h2 * g.h2) / (2.0 * c);
    if (x < -1e-9 * c || x > c * (1.0 + 1e-9)) {
        throw InfeasibleGeometry("apex projection falls outside the midline segment");
    }
    double d2 = g.h1 * g.h1 - x * x;
    if (d2 < -1e-9 * g.h1 * g.h1) {
        throw InfeasibleGeometry("apex height is shorter than its midline projection");
    }
    g.apex_x = x;
    g.dist_realized = std::sqrt(std::max(d2, 0.0));
    g.t = g.h2 / g.h1;
    g.l_EM = g.h2 - g.h1;
    g.p = 0.5 * (g.h1 + g.h2 + c);

    // Folded frame: top midpoint M at the origin, top edge along x, the
    // midline descending at theta from vertical, apex offset along the
    // boundary-plane normal.
    const Vec3 u(0.0, std::sin(theta), -std::cos(theta));
    const Vec3 nrm(0.0, std::cos(theta), std::sin(theta));
    g.M = Vec3::Zero();
    g.N = c * u;
    g.A = Vec3(params.l2 / 2.0, 0.0, 0.0);
    g.A1 = Vec3(-params.l2 / 2.0, 0.0, 0.0);
    g.B = Vec3(params.l1 / 2.0, 0.0, 0.0) + g.N;
    g.B1 = Vec3(-params.l1 / 2.0, 0.0, 0.0) + g.N;
    g.O = x * u + g.dist_realized * nrm;

    // Developed pattern: trapezoid of height h1 + h2 with the apex on the
    // midline, so the fan on each side of M-O-N spans a straight angle.
    Pattern& pat = g.developed;
    pat.O = Vec2(0.0, 0.0);
    pat.M = Vec2(0.0, g.h1);
    pat.N = Vec2(0.0, -g.h2);
    pat.A = Vec2(params.l2 / 2.0, g.h1);
    pat.A1 = Vec2(-params.l2 / 2.0, g.h1);
    pat.B = Vec2(params.l1 / 2.0, -g.h2);
    pat.B1 = Vec2(-params.l1 / 2.0, -g.h2);

    double s = 0.5;
    if (opts.pattern_rule == PatternRule::PerpendicularFoot) {
        const Vec2 ab = pat.B - pat.A;
        s = -pat.A.dot(ab) / ab.squaredNorm();
    }
    if (!(s > 0.0 && s < 1.0)) {
        throw InfeasibleGeometry("crease endpoint C falls outside edge A-B");
    }
    pat.C = pat.A + s * (pat.B - pat.A);
    pat.C1 = Vec2(-pat.C.x(), pat.C.y());

    // Fold C by preserving its pattern distances to A, B and O.
    const double rA = (pat.C - pat.A).norm();
    const double rB = (pat.C - pat.B).norm();
    const double rO = pat.C.norm();
    g.C = trilaterate(g.A, g.B, g.O, rA, rB, rO, nrm);
    g.C1 = Vec3(-g.C.x(), g.C.y(), g.C.z());

    return g;
}

SectorAngles sector_angles(const PanelGeometry& geom) {
    const Pattern& p = geom.developed;
    SectorAngles a;
    a.gamma1 = angle_between(p.M - p.O, p.A - p.O);
    a.beta1 = angle_between(p.A - p.O, p.C - p.O);
    a.beta2 = angle_between(p.C - p.O, p.B - p.O);
    a.gamma2 = angle_between(p.B - p.O, p.N - p.O);
    return a;
}

FoldabilityReport validate_foldability(const SectorAngles& an, double tol) {
    FoldabilityReport r;
    r.alternating_residual = std::abs((an.gamma1 - an.gamma2) - (an.beta1 - an.beta2));
    r.sum_residual = std::abs(an.gamma1 + an.gamma2 + an.beta1 + an.beta2 - kPi);
    r.complement_residual = std::max(std::abs(an.gamma1 - (kPi / 2.0 - an.beta2)),
                                     std::abs(an.gamma2 - (kPi / 2.0 - an.beta1)));
    r.alternating_ok = r.alternating_residual <= tol;
    r.sum_ok = r.sum_residual <= tol;
    r.complement_ok = r.complement_residual <= tol;
    r.opening_ok = an.beta1 + an.beta2 > kPi / 2.0;
    r.interference_ok = an.gamma2 < an.beta2;
    return r;
}

double dihedral_angle(const Vec3& a, const Vec3& j, const Vec3& k, const Vec3& b) {
    const Vec3 e = k - j;
    const double len = e.norm();
    const Vec3 n1 = e.cross(a - j);
    const Vec3 n2 = (b - j).cross(e);
    if (n1.norm() < 2e-12 || n2.norm() < 2e-12) {
        throw DegenerateTriangle("hinge triangle area below tolerance");
    }
    const Vec3 eh = e / len;
    const Vec3 wa = (a - j) - (a - j).dot(eh) * eh;
    const Vec3 wb = (b - j) - (b - j).dot(eh) * eh;
    double phi = std::atan2(wa.cross(wb).dot(eh), wa.dot(wb));
    if (phi < 0.0) phi += 2.0 * kPi;
    return phi;
}

std::array<double, 8> spoke_dihedrals(const PanelGeometry& geom) {
    const std::array<Vec3, 8> ring = {geom.M, geom.A, geom.C, geom.B,
                                      geom.N, geom.B1, geom.C1, geom.A1};
    std::array<double, 8> out{};
    for (int i = 0; i < 8; ++i) {
        const Vec3& prev = ring[(i + 7) % 8];
        const Vec3& next = ring[(i + 1) % 8];
        out[i] = dihedral_angle(prev, geom.O, ring[i], next);
    }
    return out;
}

}  // namespace taperfold
