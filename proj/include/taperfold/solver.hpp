#pragma once

#include <functional>
#include <string>
#include <vector>

#include "taperfold/eigensolve.hpp"
#include "taperfold/mechanics.hpp"

namespace taperfold {

enum class LoadKind { Compression, Torsion };

struct StepPolicy {
    // Control units: strain, or degrees of twist. The initial step is kept
    // small so the seeded imperfection can deflect the path onto the
    // buckled branch before membrane stress builds up.
    double initial_step = 0.002;
    double min_step = 1e-5;
    double max_step = 0.02;
    int max_steps = 200;
    double newton_rel_tol = 1e-6;
    double newton_abs_floor = 1e-8;  // N
    int max_newton_iters = 25;
    bool enable_arc_length = true;
    bool record_states = true;

    void validate() const;
};

enum class ModeFilter {
    Fold,  // modes that move the panel apexes (skips edge-flutter modes)
    Any,
};

struct Imperfection {
    int mode_index = 1;  // 1-based, counted within the filtered list
    double xi = 0.1;     // amplitude as a fraction of the facet thickness
    ModeFilter filter = ModeFilter::Fold;
};

struct LoadCase {
    LoadKind kind = LoadKind::Compression;
    double target_strain = 0.6;
    double twist_deg = 4.0;
    double pre_strain = 0.2;       // compression applied before twisting
    double preload_strain = 0.01;  // preload for the mode extraction
    StepPolicy step;
    Imperfection imperfection;

    void validate() const;
};

enum class TerminalStatus { Completed, StepCollapse, MaxSteps };

struct PathSample {
    double control = 0.0;   // strain (compression) or twist in degrees (torsion)
    double reaction = 0.0;  // N (compression) or N*mm (torsion)
    int newton_iters = 0;
    bool converged = true;
    bool flagged = false;   // facet interpenetration detected at this state
    double residual_norm = 0.0;
};

struct EquilibriumPath {
    LoadKind kind = LoadKind::Compression;
    std::vector<PathSample> samples;
    TerminalStatus status = TerminalStatus::Completed;
    std::string message;

    bool completed() const { return status == TerminalStatus::Completed; }
    double max_control() const;
    // Piecewise-linear reaction at the given control value.
    double reaction_at(double control) const;
};

struct RunResult {
    EquilibriumPath path;
    std::vector<VecX> states;  // one free-coordinate vector per sample, if recorded
    VecX final_q;
    double final_control = 0.0;
    ConstraintSet constraints;
};

struct Mode {
    double eigenvalue = 0.0;
    VecX free_vector;         // eigenvector in the free-coordinate space
    std::vector<Vec3> nodal;  // nodal field, normalized to unit max node norm
};

// Boundary conditions for a compression run: the bottom frame is fully
// fixed, the top frame is driven vertically and otherwise free.
ConstraintSet compression_constraints(const BarHingeModel& model);

// k smallest eigenpairs of the constrained tangent at (q, driven_value);
// rigid-body modes are deflated away when the map is fully unconstrained.
std::vector<Mode> lowest_modes(const BarHingeModel& model, const DofMap& dofs, const VecX& q,
                               double driven_value, int k, const MechanicsOptions& mech = {},
                               const EigenOptions& eig = {});

// Linearized buckling from two preloaded states: modes are ranked by the
// estimated critical strain (Mode::eigenvalue) and oriented so the apex
// motion deepens the fold.
std::vector<Mode> buckling_modes(const BarHingeModel& model, const LoadCase& lc, int k,
                                 const MechanicsOptions& mech = {});

// Net apex participation of a unit-max nodal field: how much the panel
// apexes move along their outward normals. Near zero for edge-flutter and
// purely in-plane modes.
double fold_participation(const BarHingeModel& model, const std::vector<Vec3>& field);

// Offsets the reference coordinates by xi * t_f * mode and recomputes the
// rest lengths/angles, so the perturbed model is stress-free at its new
// reference. xi = 0 returns an identical model.
BarHingeModel seed_imperfection(const BarHingeModel& model, const std::vector<Vec3>& mode_nodal,
                                double xi);

// Displacement-controlled continuation of the top frame from 0 to
// target_strain * H0, Newton-corrected with adaptive steps; an arc-length
// corrector engages when plain stepping collapses at a limit point.
RunResult run_compression(const BarHingeModel& model, const LoadCase& lc,
                          const MechanicsOptions& mech = {});

// Pre-compresses the module to lc.pre_strain, then holds the top frame and
// drives its rotation about the module axis up to lc.twist_deg.
RunResult run_torsion(const ModuleModel& module, const LoadCase& lc,
                      const MechanicsOptions& mech = {});

struct Pipeline {
    std::vector<Mode> modes;
    BarHingeModel seeded;
    RunResult run;
};

// Full workflow: preload, mode extraction, imperfection seeding, run.
Pipeline simulate_compression(const BarHingeModel& model, const LoadCase& lc,
                              const MechanicsOptions& mech = {});
Pipeline simulate_torsion(const ModuleModel& module, const LoadCase& lc,
                          const MechanicsOptions& mech = {});

}  // namespace taperfold
