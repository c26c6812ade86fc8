#include "taperfold/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

namespace taperfold {

double BarHingeModel::total_bar_length() const {
    double sum = 0.0;
    for (const Bar& b : bars) sum += b.rest_length;
    return sum;
}

const RigidGroup* BarHingeModel::find_group(const std::string& name) const {
    for (const RigidGroup& g : groups) {
        if (g.name == name) return &g;
    }
    return nullptr;
}

namespace {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

// Exact rotation about z by k*90 degrees.
Vec3 rotate90(const Vec3& p, int k) {
    switch (((k % 4) + 4) % 4) {
        case 1: return Vec3(-p.y(), p.x(), p.z());
        case 2: return Vec3(-p.x(), -p.y(), p.z());
        case 3: return Vec3(p.y(), -p.x(), p.z());
        default: return p;
    }
}

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
    Vec3 hi = Vec3::Constant(std::numeric_limits<double>::lowest());
    void grow(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    bool overlaps(const Aabb& o) const {
        for (int d = 0; d < 3; ++d) {
            if (hi[d] <= o.lo[d] || o.hi[d] <= lo[d]) return false;
        }
        return true;
    }
};

// Separating-axis triangle intersection: face normals plus the nine
// edge-pair cross products. Touching does not count as overlap.
bool triangles_intersect(const std::array<Vec3, 3>& ta, const std::array<Vec3, 3>& tb) {
    const auto separated = [&](const Vec3& axis) {
        const double n = axis.norm();
        if (n < 1e-12) return false;  // degenerate axis, no information
        double alo = std::numeric_limits<double>::max(), ahi = -alo;
        double blo = alo, bhi = -alo;
        for (const Vec3& p : ta) {
            const double v = axis.dot(p) / n;
            alo = std::min(alo, v);
            ahi = std::max(ahi, v);
        }
        for (const Vec3& p : tb) {
            const double v = axis.dot(p) / n;
            blo = std::min(blo, v);
            bhi = std::max(bhi, v);
        }
        const double tol = 1e-9;
        return ahi <= blo + tol || bhi <= alo + tol;
    };

    const Vec3 ea[3] = {ta[1] - ta[0], ta[2] - ta[1], ta[0] - ta[2]};
    const Vec3 eb[3] = {tb[1] - tb[0], tb[2] - tb[1], tb[0] - tb[2]};
    if (separated(ea[0].cross(ea[1]))) return false;
    if (separated(eb[0].cross(eb[1]))) return false;
    for (const Vec3& u : ea) {
        for (const Vec3& v : eb) {
            if (separated(u.cross(v))) return false;
        }
    }
    return true;
}

}  // namespace

BarHingeModel triangulate_panel(const PanelGeometry& geom, const PanelParams& params,
                                const MeshOptions& opts) {
    if (!params.material) {
        throw ValidationError("material", "panel model requires a material (E, nu)");
    }
    const MaterialSpec& mat = *params.material;
    mat.validate();
    if (!(opts.w_c > 0.0)) throw ValidationError("w_c", "crease width must be positive");
    if (!(opts.c_EA > 0.0)) throw ValidationError("c_EA", "bar area factor must be positive");

    BarHingeModel m;
    m.provenance = params;
    m.nodes = {geom.O, geom.M, geom.A, geom.C, geom.B,
               geom.N, geom.B1, geom.C1, geom.A1};

    // Ring of boundary nodes around the apex (node 0).
    const std::array<int, 8> ring = {1, 2, 3, 4, 5, 6, 7, 8};
    for (int i = 0; i < 8; ++i) {
        m.triangles.push_back({0, ring[i], ring[(i + 1) % 8]});
    }

    // Spoke bars then ring bars. Axial stiffness lumps the facet sheet
    // onto each edge: EA = E * t_f * w_trib with the tributary width equal
    // to half the sum of adjacent triangle heights over the edge.
    auto add_bar = [&](int i, int j) {
        Bar b;
        b.i = i;
        b.j = j;
        b.rest_length = (m.nodes[j] - m.nodes[i]).norm();
        double heights = 0.0;
        for (const Triangle& t : m.triangles) {
            const bool has_i = (t.v0 == i || t.v1 == i || t.v2 == i);
            const bool has_j = (t.v0 == j || t.v1 == j || t.v2 == j);
            if (has_i && has_j) {
                const double area = triangle_area(m.nodes[t.v0], m.nodes[t.v1], m.nodes[t.v2]);
                heights += 2.0 * area / b.rest_length;
            }
        }
        const double w_trib = 0.5 * heights;
        b.ea = mat.E * params.t_f * w_trib * opts.c_EA;
        m.bars.push_back(b);
    };
    for (int i = 0; i < 8; ++i) add_bar(0, ring[i]);
    for (int i = 0; i < 8; ++i) add_bar(ring[i], ring[(i + 1) % 8]);

    // Crease hinges on the eight spokes. Per-length plate rigidity of the
    // thinned crease strip, divided by the strip width.
    const double D = mat.E * params.t_c * params.t_c * params.t_c /
                     (12.0 * (1.0 - mat.nu * mat.nu));
    for (int i = 0; i < 8; ++i) {
        Hinge h;
        h.a = ring[(i + 7) % 8];
        h.j = 0;
        h.k = ring[i];
        h.b = ring[(i + 1) % 8];
        const double length = (m.nodes[h.k] - m.nodes[h.j]).norm();
        h.stiffness = D * length / opts.w_c;
        h.rest_angle = dihedral_angle(m.nodes[h.a], m.nodes[h.j], m.nodes[h.k], m.nodes[h.b]);
        h.kind = HingeKind::Crease;
        m.hinges.push_back(h);
    }

    m.groups.push_back({"top", {2, 1, 8}, geom.M});     // A, M, A1
    m.groups.push_back({"bottom", {4, 5, 6}, geom.N});  // B, N, B1
    m.panels.push_back({"panel_0", 0, 9, 0, 8});
    return m;
}

ModuleModel assemble_module(const BarHingeModel& panel, double radius) {
    if (!(radius > 0.0)) throw InvalidRadius("array radius must be positive");

    const PanelParams& p = panel.provenance;
    const PanelParams dims = apply_scaling(p);
    const double theta = p.theta();
    // Panel frame -> module frame: bottom midpoint N lands at distance
    // `radius` from the axis with the bottom plane at z = 0.
    const Vec3 shift(0.0, radius - dims.H0 * std::tan(theta), dims.H0);

    ModuleModel mod;
    mod.radius = radius;
    BarHingeModel& m = mod.model;
    m.provenance = p;

    const int nn = static_cast<int>(panel.nodes.size());
    std::vector<Aabb> boxes(4);
    for (int k = 0; k < 4; ++k) {
        for (const Vec3& x : panel.nodes) {
            const Vec3 world = rotate90(x + shift, k);
            m.nodes.push_back(world);
            boxes[k].grow(world);
        }
        for (const Triangle& t : panel.triangles) {
            m.triangles.push_back({t.v0 + k * nn, t.v1 + k * nn, t.v2 + k * nn});
        }
        for (Bar b : panel.bars) {
            b.i += k * nn;
            b.j += k * nn;
            m.bars.push_back(b);
        }
        for (Hinge h : panel.hinges) {
            h.a += k * nn;
            h.j += k * nn;
            h.k += k * nn;
            h.b += k * nn;
            m.hinges.push_back(h);
        }
        m.panels.push_back({"panel_" + std::to_string(k), k * nn, (k + 1) * nn,
                            k * 8, (k + 1) * 8});
    }

    // Bounding boxes prescreen panel pairs; close pairs are confirmed by
    // exact triangle-triangle tests.
    const auto tri_points = [&](int panel_idx, const Triangle& t) {
        const int off = panel_idx * nn;
        return std::array<Vec3, 3>{m.nodes[t.v0 + off], m.nodes[t.v1 + off],
                                   m.nodes[t.v2 + off]};
    };
    for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
            if (!boxes[a].overlaps(boxes[b])) continue;
            for (const Triangle& t1 : panel.triangles) {
                for (const Triangle& t2 : panel.triangles) {
                    if (triangles_intersect(tri_points(a, t1), tri_points(b, t2))) {
                        throw InvalidRadius("panels overlap at radius " +
                                            std::to_string(radius));
                    }
                }
            }
        }
    }

    RigidGroup top{"top", {}, Vec3(0.0, 0.0, dims.H0)};
    RigidGroup bottom{"bottom", {}, Vec3(0.0, 0.0, 0.0)};
    for (int k = 0; k < 4; ++k) {
        for (const RigidGroup& g : panel.groups) {
            RigidGroup& target = (g.name == "top") ? top : bottom;
            for (int idx : g.nodes) target.nodes.push_back(idx + k * nn);
        }
    }
    m.groups.push_back(top);
    m.groups.push_back(bottom);
    return mod;
}

PanelParams scale_params(const PanelParams& params, double n, bool scale_thickness) {
    if (!(n > 0.0)) throw InvalidScale("scaling ratio must be positive");
    PanelParams out = params;
    out.l1 *= n;
    out.l2 *= n;
    out.H0 *= n;
    out.dist *= n;
    if (scale_thickness) {
        out.t_f *= n;
        out.t_c *= n;
    }
    return out;
}

PanelParams apply_scaling(const PanelParams& params) {
    if (params.n == 1.0) return params;
    PanelParams out = scale_params(params, params.n, params.scale_thickness);
    out.n = 1.0;
    return out;
}

BarHingeModel build_panel(const PanelParams& params, const GeometryOptions& gopts,
                          const MeshOptions& mopts) {
    const PanelParams dims = apply_scaling(params);
    const PanelGeometry geom = derive_panel_geometry(dims, gopts);
    MeshOptions scaled = mopts;
    if (params.scale_thickness) scaled.w_c *= params.n;
    BarHingeModel m = triangulate_panel(geom, dims, scaled);
    m.provenance = params;
    return m;
}

ModuleModel build_module(const PanelParams& params, double radius,
                         const GeometryOptions& gopts, const MeshOptions& mopts) {
    return assemble_module(build_panel(params, gopts, mopts), radius);
}

}  // namespace taperfold
