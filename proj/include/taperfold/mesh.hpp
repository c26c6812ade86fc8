#pragma once

#include <string>
#include <vector>

#include "taperfold/geometry.hpp"

namespace taperfold {

struct Bar {
    int i = -1;
    int j = -1;
    double ea = 0.0;           // axial stiffness E*A, N
    double rest_length = 0.0;  // mm
};

enum class HingeKind { Crease, Facet };

// Rotational spring about the edge j->k shared by triangles (j,k,a) and
// (j,k,b). Stiffness in N*mm/rad, rest angle in rad.
struct Hinge {
    int a = -1, j = -1, k = -1, b = -1;
    double stiffness = 0.0;
    double rest_angle = kPi;
    HingeKind kind = HingeKind::Crease;
};

struct Triangle {
    int v0 = -1, v1 = -1, v2 = -1;
};

// Node set slaved to one 6-dof reference frame.
struct RigidGroup {
    std::string name;
    std::vector<int> nodes;
    Vec3 ref_point = Vec3::Zero();
};

struct PanelSpan {
    std::string name;
    int node_begin = 0, node_end = 0;
    int tri_begin = 0, tri_end = 0;
};

// Bar-and-hinge simulation model for a panel or a full module. The node
// coordinates are the as-built (stress-free) reference configuration.
struct BarHingeModel {
    std::vector<Vec3> nodes;
    std::vector<Bar> bars;
    std::vector<Triangle> triangles;
    std::vector<Hinge> hinges;
    std::vector<RigidGroup> groups;
    std::vector<PanelSpan> panels;
    PanelParams provenance;

    double total_bar_length() const;
    const RigidGroup* find_group(const std::string& name) const;
};

struct ModuleModel {
    BarHingeModel model;
    double radius = 30.0;  // distance of each panel's bottom center from the axis
};

struct MeshOptions {
    double c_EA = 1.0;  // global calibration factor on bar areas
    double w_c = 2.8;   // crease hinge width, mm
};

// Fan triangulation of the panel around the apex: 9 nodes in the order
// (O, M, A, C, B, N, B1, C1, A1), 16 bars, 8 triangles, 8 crease hinges.
// Boundary groups "top" = {A, M, A1} and "bottom" = {B, N, B1}.
// Requires params.material.
BarHingeModel triangulate_panel(const PanelGeometry& geom, const PanelParams& params,
                                const MeshOptions& opts = {});

// Four copies of the panel at 90-degree spacing, each panel's bottom
// center at the given radius from the module axis; top/bottom groups
// merged onto two disk frames on the axis. Throws InvalidRadius when the
// panel bounding boxes overlap at the given radius.
ModuleModel assemble_module(const BarHingeModel& panel, double radius);

// Multiplies the planar dimensions (l1, l2, H0, dist) by n; thicknesses
// are unchanged unless scale_thickness is set. Throws InvalidScale for
// n <= 0.
PanelParams scale_params(const PanelParams& params, double n, bool scale_thickness = false);

// Params with the design's own scaling ratio applied to the dimensions
// (the builders consume dimensions only, so n is applied exactly once).
PanelParams apply_scaling(const PanelParams& params);

// Convenience: geometry + panel model (+ module assembly) from params.
BarHingeModel build_panel(const PanelParams& params, const GeometryOptions& gopts = {},
                          const MeshOptions& mopts = {});
ModuleModel build_module(const PanelParams& params, double radius,
                         const GeometryOptions& gopts = {}, const MeshOptions& mopts = {});

}  // namespace taperfold
