#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <optional>
#include <string>

#include "taperfold/errors.hpp"

namespace taperfold {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct MaterialSpec {
    double E = 26.0;   // Young's modulus, MPa (N/mm^2)
    double nu = 0.4;   // Poisson's ratio
    std::string name = "TPU95A";

    void validate() const;
};

// Full parameterization of one tapered panel. Lengths in mm, alpha in
// degrees (converted to radians only where geometry is computed).
struct PanelParams {
    double l1 = 50.0;       // lower base length
    double l2 = 45.0;       // upper base length
    double H0 = 43.0;       // module height
    double t_f = 1.5;       // facet thickness
    double t_c = 0.54;      // crease thickness
    double dist = 0.0;      // protrusion distance of the apex
    double alpha_deg = 0.0; // taper angle, alpha = 2*theta
    double n = 1.0;         // scaling ratio
    // Whether n scales the thicknesses (and the crease width) along with
    // the planar dimensions, i.e. full geometric similarity.
    bool scale_thickness = false;
    std::optional<MaterialSpec> material = MaterialSpec{};

    double theta() const { return deg_to_rad(alpha_deg) / 2.0; }
    void validate() const;
};

enum class GeometryBranch {
    Exact,       // apex heights from the bracketed solve; default
    ClosedForm,  // algebraic closed forms (approximate for dist > 0)
};

enum class PatternRule {
    PerpendicularFoot,  // C is the foot of the apex on edge A-B; default
    EdgeMidpoint,       // C is the midpoint of edge A-B
};

// Developed (flat) crease pattern. The apex sits at the origin with the
// midline M-O-N laid out along +y/-y, so the fan on either side of the
// midline spans a straight angle.
struct Pattern {
    Vec2 A, A1, B, B1, C, C1, O, M, N;
};

// Folded-state panel geometry in the panel frame: M at the origin, the
// top edge A-A1 along x, the midline M-N descending at theta from
// vertical, and the apex O offset from the boundary plane toward +.
struct PanelGeometry {
    Vec3 A, A1, B, B1, C, C1, O, M, N;

    double h1 = 0.0;     // |OM|
    double h2 = 0.0;     // |ON|
    double t = 1.0;      // height ratio h2/h1
    double theta = 0.0;  // panel inclination, rad
    double l_EM = 0.0;   // h2 - h1
    double p = 0.0;      // semi-perimeter of triangle OMN

    double dist_input = 0.0;     // requested protrusion distance
    double dist_realized = 0.0;  // perpendicular distance actually realized
    double apex_x = 0.0;         // projection of O onto MN, measured from M
    GeometryBranch branch = GeometryBranch::Exact;

    // Relative gap between the closed-form and exact apex heights,
    // |h1_closed - h1_exact| / h1_exact. Recorded at construction.
    double closed_form_gap = 0.0;

    Pattern developed;

    std::array<Vec3, 9> folded_points() const { return {O, M, A, C, B, N, B1, C1, A1}; }
};

struct SectorAngles {
    double gamma1 = 0.0;  // angle M-O-A
    double gamma2 = 0.0;  // angle B-O-N
    double beta1 = 0.0;   // angle A-O-C
    double beta2 = 0.0;   // angle C-O-B
};

// One entry per foldability constraint; violations are reported, not thrown.
struct FoldabilityReport {
    bool alternating_ok = false;   // gamma1 - gamma2 = beta1 - beta2
    bool sum_ok = false;           // gamma1 + gamma2 + beta1 + beta2 = pi
    bool complement_ok = false;    // gamma1 = pi/2 - beta2 and gamma2 = pi/2 - beta1
    bool opening_ok = false;       // beta1 + beta2 > pi/2
    bool interference_ok = false;  // gamma2 < beta2

    double alternating_residual = 0.0;
    double sum_residual = 0.0;
    double complement_residual = 0.0;

    bool all_pass() const {
        return alternating_ok && sum_ok && complement_ok && opening_ok && interference_ok;
    }
};

struct ApexSolution {
    double h1 = 0.0;
    double h2 = 0.0;
    double x = 0.0;         // projection of the apex onto MN, from M
    double residual = 0.0;  // |h2 - h1 - H0*tan(theta)| at the root
};

// Apex heights from the closed-form expressions. Exact at dist = 0; for
// dist > 0 they deviate from the true triangle geometry by O((dist/H0)^2).
double closed_form_h1(double dist, double H0, double theta);
double closed_form_h2(double dist, double H0, double theta);

// Height ratio t = h2/h1 in closed form; t >= 1, equal to 1 iff theta = 0.
double height_ratio(double dist, double H0, double theta);

// Unique (h1, h2, x) with h1 = sqrt(x^2 + dist^2),
// h2 = sqrt((H0/cos(theta) - x)^2 + dist^2) and h2 - h1 = H0*tan(theta),
// found by a bracketed 1D root solve on x in [0, H0/cos(theta)].
// Throws NoSolution if no root exists in the bracket.
ApexSolution solve_exact_apex(double dist, double H0, double theta);

// Protrusion distance of the apex from triangle sides via Heron's formula:
// dist = 2*Area(OMN) / |MN| with |MN| = H0/cos(theta). Returns 0 when the
// triangle degenerates exactly (apex on the midline); throws
// DegenerateTriangle when the triangle inequality fails beyond 1e-12.
double protrusion_from_heights(double h1, double h2, double H0, double theta);

struct GeometryOptions {
    GeometryBranch branch = GeometryBranch::Exact;
    PatternRule pattern_rule = PatternRule::PerpendicularFoot;
};

// Folded-state vertices plus the developed pattern for one panel.
// Throws InfeasibleGeometry when the apex projection leaves the midline
// segment or a derived length is non-positive.
PanelGeometry derive_panel_geometry(const PanelParams& params,
                                    const GeometryOptions& opts = {});

// Sector angles measured in the developed pattern on the +x half of the
// fan (the mirror half is identical by construction).
SectorAngles sector_angles(const PanelGeometry& geom);

FoldabilityReport validate_foldability(const SectorAngles& angles,
                                       double tol = 1e-9);

// Dihedral angle in (0, 2pi) about the edge j->k, with wings a and b;
// pi means coplanar and reversing the quadruple maps phi -> 2pi - phi.
// Throws DegenerateTriangle when either wing triangle collapses.
double dihedral_angle(const Vec3& a, const Vec3& j, const Vec3& k, const Vec3& b);

// Rest dihedral angles of the eight fan creases, ordered as the spokes
// O-M, O-A, O-C, O-B, O-N, O-B1, O-C1, O-A1. pi means coplanar.
std::array<double, 8> spoke_dihedrals(const PanelGeometry& geom);

}  // namespace taperfold
