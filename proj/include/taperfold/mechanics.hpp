#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "taperfold/mesh.hpp"

namespace taperfold {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

enum class StrainMeasure { Engineering, Green };

struct MechanicsOptions {
    StrainMeasure strain = StrainMeasure::Engineering;
    // Any hinge closing below this dihedral (or its mirror above 2pi - it)
    // flags the state as interpenetrating; it is reported, not resisted.
    double contact_flag_deg = 5.0;
};

// Dihedral angle about the edge j->k with wings a, b; see geometry.hpp.
inline double hinge_angle(const Vec3& a, const Vec3& j, const Vec3& k, const Vec3& b) {
    return dihedral_angle(a, j, k, b);
}

// Per-frame boundary condition: each of (tx, ty, tz, wx, wy, wz) is either
// prescribed to a value or free. Rotations are total rotation-vector
// components, applied about the frame reference point.
struct FrameConstraint {
    std::array<std::optional<double>, 6> dof{};
    static FrameConstraint fixed() {
        FrameConstraint c;
        for (auto& d : c.dof) d = 0.0;
        return c;
    }
};

struct DrivenDof {
    std::string group;
    int dof = 2;  // index into (tx, ty, tz, wx, wy, wz)
};

struct ConstraintSet {
    std::map<std::string, FrameConstraint> frames;  // unnamed groups are fully free
    std::optional<DrivenDof> driven;                // value supplied per evaluation
    bool all_nodes_free = false;                    // ignore rigid groups entirely
};

// Maps the free-coordinate vector to node positions. Free nodes carry 3
// displacement dofs; slaved nodes follow their frame by translation plus a
// rotation-vector (Rodrigues) map about the frame reference point.
//
// A frame rotation component with no lever grip (all group nodes on that
// axis through the reference point) is a gauge direction and is pinned to
// zero at construction.
class DofMap {
public:
    DofMap(const BarHingeModel& model, const ConstraintSet& constraints);

    int size() const { return nfree_; }
    bool has_driven() const { return driven_frame_ >= 0; }
    bool fully_free() const;

    std::vector<Vec3> positions(const VecX& q, double driven_value = 0.0) const;

    // Jacobian of node positions w.r.t. (free coords, driven value):
    // 3N x (nfree + 1); the last column is zero when nothing is driven.
    MatX jacobian(const VecX& q, double driven_value = 0.0) const;

    // Adds the frame-rotation curvature term (nodal forces contracted with
    // the second derivative of the slaving map) into the augmented tangent.
    void add_rotation_curvature(const VecX& q, double driven_value,
                                const VecX& nodal_gradient, MatX& tangent_aug) const;

    struct FrameState {
        Vec3 t = Vec3::Zero();
        Vec3 w = Vec3::Zero();
    };
    FrameState frame_state(const VecX& q, double driven_value, const std::string& group) const;

    // Orthonormal-izable rigid-body basis over the free coordinates; only
    // meaningful (non-empty) when the map has no constraints at all.
    MatX rigid_basis() const;

    const std::vector<std::pair<std::string, int>>& gauge_fixed() const { return gauge_fixed_; }
    const BarHingeModel& model() const { return *model_; }

    // Base free-coordinate index of a free node, -1 for slaved nodes.
    int node_dof(int node) const { return node_dof_[node]; }

private:
    struct Frame {
        std::string name;
        Vec3 ref = Vec3::Zero();
        std::vector<int> nodes;
        std::array<int, 6> qidx{};     // >=0 free index, -1 prescribed, -2 driven
        std::array<double, 6> value{}; // prescribed values
    };

    void frame_coords(const Frame& f, const VecX& q, double driven_value,
                      Vec3& t, Vec3& w) const;

    const BarHingeModel* model_;
    std::vector<int> node_dof_;    // base free index per node, -1 if slaved
    std::vector<int> node_frame_;  // frame index per node, -1 if free
    std::vector<Frame> frames_;
    int nfree_ = 0;
    int driven_frame_ = -1;
    int driven_dof_ = -1;
    std::vector<std::pair<std::string, int>> gauge_fixed_;
};

enum class EvalOrder { Energy, Gradient, Hessian };

struct Evaluation {
    double energy = 0.0;
    VecX residual;                  // dE/dq over free coordinates
    MatX tangent;                   // d2E/dq2, symmetric
    VecX driven_column;             // d(residual)/d(driven value)
    double driven_gradient = 0.0;   // dE/d(driven value)
    VecX nodal_gradient;            // dE/dX over all node coordinates (3N)
    double min_hinge_closure = 0.0; // min over hinges of min(phi, 2pi - phi)
    bool contact_flag = false;
};

Evaluation evaluate(const BarHingeModel& model, const DofMap& dofs, const VecX& q,
                    double driven_value, EvalOrder order,
                    const MechanicsOptions& opts = {});

// Total elastic energy: bar stretching plus hinge bending; zero at rest.
double system_energy(const BarHingeModel& model, const DofMap& dofs, const VecX& q,
                     double driven_value = 0.0, const MechanicsOptions& opts = {});

std::pair<VecX, MatX> residual_and_tangent(const BarHingeModel& model, const DofMap& dofs,
                                           const VecX& q, double driven_value = 0.0,
                                           const MechanicsOptions& opts = {});

struct FrameReaction {
    Vec3 force = Vec3::Zero();   // N
    Vec3 torque = Vec3::Zero();  // N*mm, about the group reference point
};

// Net internal force and moment carried into a rigid group (the constraint
// reaction when the frame is held).
FrameReaction group_reaction(const BarHingeModel& model, const std::vector<Vec3>& positions,
                             const VecX& nodal_gradient, const RigidGroup& group);

}  // namespace taperfold
