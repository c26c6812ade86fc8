#include "taperfold/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace taperfold {

void StepPolicy::validate() const {
    if (max_steps <= 0) throw ValidationError("max_steps", "must be positive");
    if (!(initial_step > 0.0)) throw ValidationError("initial_step", "must be positive");
    if (!(min_step > 0.0 && min_step <= initial_step))
        throw ValidationError("min_step", "must satisfy 0 < min_step <= initial_step");
    if (!(max_step >= initial_step)) throw ValidationError("max_step", "must be >= initial_step");
    if (!(newton_rel_tol > 0.0)) throw ValidationError("newton_rel_tol", "must be positive");
    if (!(newton_abs_floor > 0.0)) throw ValidationError("newton_abs_floor", "must be positive");
    if (max_newton_iters <= 0) throw ValidationError("max_newton_iters", "must be positive");
}

void LoadCase::validate() const {
    step.validate();
    if (kind == LoadKind::Compression) {
        if (!(target_strain > 0.0 && target_strain <= 0.9))
            throw ValidationError("target_strain", "must lie in (0, 0.9]");
    } else {
        if (!(twist_deg > 0.0 && twist_deg <= 10.0))
            throw ValidationError("twist_deg", "must lie in (0, 10]");
        if (!(pre_strain >= 0.0 && pre_strain <= 0.9))
            throw ValidationError("pre_strain", "must lie in [0, 0.9]");
    }
    if (!(preload_strain >= 0.0 && preload_strain < 1.0))
        throw ValidationError("preload_strain", "must lie in [0, 1)");
    if (!(imperfection.xi >= 0.0)) throw ValidationError("xi", "must be non-negative");
    if (imperfection.mode_index < 1) throw ValidationError("mode_index", "is 1-based");
}

double EquilibriumPath::max_control() const {
    return samples.empty() ? 0.0 : samples.back().control;
}

double EquilibriumPath::reaction_at(double control) const {
    if (samples.empty()) throw EmptyPath("path has no samples");
    if (control < samples.front().control || control > samples.back().control) {
        throw BaselineOutOfDomain("control value outside the sampled path");
    }
    for (size_t i = 1; i < samples.size(); ++i) {
        if (control <= samples[i].control) {
            const double c0 = samples[i - 1].control, c1 = samples[i].control;
            const double f0 = samples[i - 1].reaction, f1 = samples[i].reaction;
            if (c1 == c0) return f1;
            const double s = (control - c0) / (c1 - c0);
            return f0 + s * (f1 - f0);
        }
    }
    return samples.back().reaction;
}

ConstraintSet compression_constraints(const BarHingeModel& model) {
    if (!model.find_group("top") || !model.find_group("bottom")) {
        throw Error("model needs 'top' and 'bottom' rigid groups for a compression run");
    }
    ConstraintSet cs;
    cs.frames["bottom"] = FrameConstraint::fixed();
    // The loading plate moves only along the axis: leaving its translation
    // free would admit a zero-energy rigid swing of a tapered panel about
    // its fixed bottom edge. Plate rotations stay free so lateral folding
    // branches remain representable (degenerate axes are gauge-pinned).
    FrameConstraint top;
    top.dof[0] = 0.0;
    top.dof[1] = 0.0;
    cs.frames["top"] = top;
    cs.driven = DrivenDof{"top", 2};
    return cs;
}

namespace {

// Effective module height of the model (its provenance with the design
// scaling applied); converts strain to the driven vertical displacement.
double effective_height(const BarHingeModel& model) {
    return apply_scaling(model.provenance).H0;
}

struct NewtonReport {
    bool converged = false;
    int iters = 0;
    double residual_norm = std::numeric_limits<double>::infinity();
};

// Newton with backtracking on the residual norm. Returns the evaluation at
// the final iterate (tangent included) when converged.
NewtonReport newton_solve(const BarHingeModel& model, const DofMap& dofs, VecX& q,
                          double driven, double tol, const StepPolicy& policy,
                          const MechanicsOptions& mech, Evaluation& ev_out) {
    NewtonReport rep;
    try {
        for (int it = 0; it <= policy.max_newton_iters; ++it) {
            Evaluation ev = evaluate(model, dofs, q, driven, EvalOrder::Hessian, mech);
            const double rn = ev.residual.norm();
            rep.iters = it;
            rep.residual_norm = rn;
            if (!std::isfinite(rn)) return rep;
            if (rn <= tol) {
                rep.converged = true;
                ev_out = std::move(ev);
                return rep;
            }
            if (it == policy.max_newton_iters) return rep;

            Eigen::LDLT<MatX> ldlt(ev.tangent);
            VecX step;
            if (ldlt.info() == Eigen::Success) {
                step = ldlt.solve(-ev.residual);
            }
            if (step.size() == 0 || !step.allFinite()) {
                step = Eigen::PartialPivLU<MatX>(ev.tangent).solve(-ev.residual);
                if (!step.allFinite()) return rep;
            }

            double alpha = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 10; ++ls) {
                const VecX q_try = q + alpha * step;
                double rn_try = std::numeric_limits<double>::infinity();
                try {
                    Evaluation g = evaluate(model, dofs, q_try, driven, EvalOrder::Gradient, mech);
                    rn_try = g.residual.norm();
                } catch (const DegenerateTriangle&) {
                    // fall through to a shorter step
                }
                if (std::isfinite(rn_try) && rn_try < (1.0 - 1e-4 * alpha) * rn) {
                    q = q_try;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) return rep;  // stagnated
        }
    } catch (const DegenerateTriangle&) {
        return rep;
    }
    return rep;
}

struct ControlSchedule {
    // driven value and its derivative as functions of the control value
    std::function<double(double)> driven;
    double ddriven_dcontrol = 1.0;
    double metric_weight = 1.0;  // converts control to the arc-length metric
};

double reaction_of(LoadKind kind, const BarHingeModel& model, const DofMap& dofs,
                   const VecX& q, double driven, const Evaluation& ev) {
    if (kind == LoadKind::Torsion) return ev.driven_gradient;
    const RigidGroup* bottom = model.find_group("bottom");
    const std::vector<Vec3> x = dofs.positions(q, driven);
    return group_reaction(model, x, ev.nodal_gradient, *bottom).force.z();
}

// One Crisfield-style arc-length step on (q, control). Returns true and
// updates (q, control) on convergence.
bool arc_length_step(const BarHingeModel& model, const DofMap& dofs, VecX& q, double& control,
                     const ControlSchedule& sched, double ds, const VecX& secant_q,
                     double secant_c, double tol, const StepPolicy& policy,
                     const MechanicsOptions& mech, Evaluation& ev_out) {
    const int n = dofs.size();
    const double w = sched.metric_weight;
    const VecX q0 = q;
    const double c0 = control;

    try {
        // Predictor along the path tangent, oriented by the last secant.
        Evaluation ev = evaluate(model, dofs, q0, sched.driven(c0), EvalOrder::Hessian, mech);
        VecX rc = ev.driven_column * sched.ddriven_dcontrol;
        VecX v = Eigen::PartialPivLU<MatX>(ev.tangent).solve(-rc);
        if (!v.allFinite()) return false;
        double denom = std::sqrt(v.squaredNorm() + w * w);
        double dir = v.dot(secant_q) + w * w * secant_c;
        if (dir == 0.0) dir = 1.0;
        dir = (dir > 0.0) ? 1.0 : -1.0;

        VecX qk = q0 + dir * ds * v / denom;
        double ck = c0 + dir * ds / denom;

        for (int it = 0; it < policy.max_newton_iters; ++it) {
            Evaluation e = evaluate(model, dofs, qk, sched.driven(ck), EvalOrder::Hessian, mech);
            const VecX dq = qk - q0;
            const double dc = ck - c0;
            const double g = dq.squaredNorm() + w * w * dc * dc - ds * ds;
            const double rn = e.residual.norm();
            if (rn <= tol && std::abs(g) <= 1e-8 * ds * ds + 1e-14) {
                q = qk;
                control = ck;
                ev_out = std::move(e);
                return true;
            }
            MatX B(n + 1, n + 1);
            B.topLeftCorner(n, n) = e.tangent;
            B.col(n).head(n) = e.driven_column * sched.ddriven_dcontrol;
            B.row(n).head(n) = 2.0 * dq.transpose();
            B(n, n) = 2.0 * w * w * dc;
            VecX rhs(n + 1);
            rhs.head(n) = -e.residual;
            rhs[n] = -g;
            const VecX delta = Eigen::PartialPivLU<MatX>(B).solve(rhs);
            if (!delta.allFinite()) return false;
            qk += delta.head(n);
            ck += delta[n];
        }
    } catch (const DegenerateTriangle&) {
        return false;
    }
    return false;
}

RunResult continue_path(const BarHingeModel& model, const ConstraintSet& cs, LoadKind kind,
                        const ControlSchedule& sched, const VecX& q_start, double control_start,
                        double control_target, const StepPolicy& policy,
                        const MechanicsOptions& mech) {
    DofMap dofs(model, cs);
    VecX q = q_start.size() ? q_start : VecX::Zero(dofs.size());
    double control = control_start;

    RunResult out;
    out.constraints = cs;
    out.path.kind = kind;
    out.path.status = TerminalStatus::Completed;

    double force_scale = 0.0;
    const auto tol_for = [&](double) {
        return std::max(policy.newton_abs_floor,
                        policy.newton_rel_tol * std::max(force_scale, 1e-3));
    };

    const auto record = [&](const Evaluation& ev, int iters, double residual) {
        PathSample s;
        s.control = control - control_start;
        s.reaction = reaction_of(kind, model, dofs, q, sched.driven(control), ev);
        s.newton_iters = iters;
        s.converged = true;
        s.flagged = ev.contact_flag;
        s.residual_norm = residual;
        out.path.samples.push_back(s);
        if (policy.record_states) out.states.push_back(q);
        force_scale = std::max(force_scale, std::abs(s.reaction));
    };

    // Starting point: a converged (or rest) state.
    {
        Evaluation ev0;
        NewtonReport rep = newton_solve(model, dofs, q, sched.driven(control),
                                        tol_for(control), policy, mech, ev0);
        if (!rep.converged) {
            out.path.status = TerminalStatus::StepCollapse;
            out.path.message = "initial state failed to converge";
            out.final_q = q;
            out.final_control = control;
            return out;
        }
        record(ev0, rep.iters, rep.residual_norm);
    }

    double step = policy.initial_step;
    VecX q_prev = q;
    double c_prev = control;
    bool have_prev = false;
    bool arc_mode = false;
    double arc_ds = 0.0;
    int arc_successes = 0;
    int steps_taken = 0;

    while (control < control_target - 1e-12) {
        if (++steps_taken > policy.max_steps) {
            out.path.status = TerminalStatus::MaxSteps;
            out.path.message = "step budget exhausted";
            break;
        }

        if (!arc_mode) {
            const double c_try = std::min(control + step, control_target);
            VecX q_try = q;
            if (have_prev && c_prev < control) {
                q_try += (q - q_prev) * ((c_try - control) / (control - c_prev));
            }
            Evaluation ev;
            NewtonReport rep = newton_solve(model, dofs, q_try, sched.driven(c_try),
                                            tol_for(c_try), policy, mech, ev);
            if (rep.converged) {
                q_prev = q;
                c_prev = control;
                have_prev = true;
                q = q_try;
                control = c_try;
                record(ev, rep.iters, rep.residual_norm);
                if (rep.iters <= 5) step = std::min(step * 1.5, policy.max_step);
                else if (rep.iters >= 15) step = std::max(step * 0.5, policy.min_step);
            } else {
                step *= 0.5;
                if (step < policy.min_step) {
                    if (policy.enable_arc_length) {
                        arc_mode = true;
                        arc_successes = 0;
                        const double dq_norm = have_prev ? (q - q_prev).norm() : 0.0;
                        const double dc = have_prev ? (control - c_prev) : policy.min_step;
                        arc_ds = std::max(std::sqrt(dq_norm * dq_norm +
                                                    sched.metric_weight * sched.metric_weight * dc * dc),
                                          sched.metric_weight * policy.min_step * 8.0);
                    } else {
                        out.path.status = TerminalStatus::StepCollapse;
                        out.path.message = "step size underflowed without convergence";
                        break;
                    }
                }
            }
        } else {
            VecX secant_q = have_prev ? VecX(q - q_prev) : VecX(VecX::Zero(dofs.size()));
            double secant_c = have_prev ? (control - c_prev) : 1.0;
            if (secant_c == 0.0 && secant_q.norm() == 0.0) secant_c = 1.0;
            Evaluation ev;
            VecX q_new = q;
            double c_new = control;
            const bool okstep = arc_length_step(model, dofs, q_new, c_new, sched, arc_ds,
                                                secant_q, secant_c, tol_for(control), policy,
                                                mech, ev);
            if (okstep) {
                q_prev = q;
                c_prev = control;
                have_prev = true;
                q = q_new;
                control = c_new;
                if (control - control_start >
                    (out.path.samples.empty() ? -1.0 : out.path.samples.back().control) + 1e-12) {
                    record(ev, policy.max_newton_iters, ev.residual.norm());
                }
                ++arc_successes;
                if (arc_successes >= 3 && control > c_prev) {
                    arc_mode = false;
                    step = std::max(policy.min_step * 4.0, policy.initial_step * 0.25);
                }
                if (control >= control_target - 1e-12) break;
            } else {
                arc_ds *= 0.5;
                if (arc_ds < sched.metric_weight * policy.min_step) {
                    out.path.status = TerminalStatus::StepCollapse;
                    out.path.message = "arc-length step underflowed at a limit point";
                    break;
                }
            }
        }
    }

    // Land exactly on the target when the arc corrector overshot it.
    if (out.path.status == TerminalStatus::Completed && control > control_target) {
        Evaluation ev;
        NewtonReport rep = newton_solve(model, dofs, q, sched.driven(control_target),
                                        tol_for(control_target), policy, mech, ev);
        if (rep.converged) {
            control = control_target;
            record(ev, rep.iters, rep.residual_norm);
        }
    }

    out.final_q = q;
    out.final_control = control;
    return out;
}

std::vector<Vec3> expand_mode(const DofMap& dofs, const VecX& q, double driven, const VecX& v) {
    const MatX J = dofs.jacobian(q, driven);
    const VecX field = J.leftCols(dofs.size()) * v;
    const int N = static_cast<int>(field.size() / 3);
    std::vector<Vec3> nodal(N);
    double peak = 0.0;
    for (int i = 0; i < N; ++i) {
        nodal[i] = field.segment<3>(3 * i);
        peak = std::max(peak, nodal[i].norm());
    }
    if (peak > 0.0) {
        for (Vec3& u : nodal) u /= peak;
    }
    return nodal;
}

double apex_outward_sum(const BarHingeModel& model, const std::vector<Vec3>& field) {
    double outward = 0.0;
    for (const PanelSpan& span : model.panels) {
        const int nb = span.node_begin;
        const Vec3& O = model.nodes[nb];
        const Vec3& M = model.nodes[nb + 1];
        const Vec3& A = model.nodes[nb + 2];
        const Vec3& N = model.nodes[nb + 5];
        const Vec3& A1 = model.nodes[nb + 8];
        Vec3 normal = (A - A1).cross(N - M);
        const double nn = normal.norm();
        if (nn <= 0.0) continue;
        normal /= nn;
        if (normal.dot(O - M) < 0.0) normal = -normal;
        outward += field[nb].dot(normal);
    }
    return outward;
}

// Eigenvector signs are arbitrary; orient the field so the net apex motion
// points outward (deepening the fold). Antisymmetric fields get a fixed
// sign from their largest component instead.
void orient_fold_mode(const BarHingeModel& model, std::vector<Vec3>& field) {
    const double outward = apex_outward_sum(model, field);
    if (std::abs(outward) > 1e-8) {
        if (outward < 0.0) {
            for (Vec3& u : field) u = -u;
        }
        return;
    }
    double best = 0.0;
    for (const Vec3& u : field) {
        for (int c = 0; c < 3; ++c) {
            if (std::abs(u[c]) > std::abs(best)) best = u[c];
        }
    }
    if (best < 0.0) {
        for (Vec3& u : field) u = -u;
    }
}

}  // namespace

double fold_participation(const BarHingeModel& model, const std::vector<Vec3>& field) {
    return std::abs(apex_outward_sum(model, field)) /
           static_cast<double>(std::max<size_t>(model.panels.size(), 1));
}

std::vector<Mode> lowest_modes(const BarHingeModel& model, const DofMap& dofs, const VecX& q,
                               double driven_value, int k, const MechanicsOptions& mech,
                               const EigenOptions& eig) {
    const Evaluation ev = evaluate(model, dofs, q, driven_value, EvalOrder::Hessian, mech);
    const MatX deflate = dofs.rigid_basis();
    const EigenPairs pairs = smallest_eigenpairs(ev.tangent, k, deflate, eig);
    std::vector<Mode> modes(k);
    for (int i = 0; i < k; ++i) {
        modes[i].eigenvalue = pairs.values[i];
        modes[i].free_vector = pairs.vectors.col(i);
        modes[i].nodal = expand_mode(dofs, q, driven_value, pairs.vectors.col(i));
    }
    return modes;
}

std::vector<Mode> buckling_modes(const BarHingeModel& model, const LoadCase& lc, int k,
                                 const MechanicsOptions& mech) {
    const ConstraintSet cs = compression_constraints(model);
    DofMap dofs(model, cs);
    k = std::min(k, dofs.size());

    if (!(lc.preload_strain > 0.0)) {
        std::vector<Mode> modes = lowest_modes(model, dofs, VecX::Zero(dofs.size()), 0.0, k, mech);
        for (Mode& m : modes) orient_fold_mode(model, m.nodal);
        return modes;
    }

    // Linearized buckling from two preloaded states: with K(e) ~ Ka +
    // (e - ea) dK, the load multiplier problem Ka u = mu (-dK) u ranks the
    // directions that loading destabilizes first; the reported eigenvalue
    // is the estimated critical strain ea + 1/mu.
    const double ea = lc.preload_strain;
    const double eb = 2.0 * lc.preload_strain;

    StepPolicy policy = lc.step;
    policy.initial_step = ea / 4.0;
    policy.max_step = eb / 2.0;
    policy.min_step = std::min(policy.min_step, policy.initial_step);
    policy.max_steps = 60;
    policy.record_states = false;

    ControlSchedule sched;
    const double H0 = effective_height(model);
    sched.driven = [H0](double c) { return -c * H0; };
    sched.ddriven_dcontrol = -H0;
    sched.metric_weight = H0;

    RunResult pre_a = continue_path(model, cs, LoadKind::Compression, sched, VecX(), 0.0, ea,
                                    policy, mech);
    if (!pre_a.path.completed()) {
        throw EigenFailure("preload before the mode extraction did not converge");
    }
    RunResult pre_b = continue_path(model, cs, LoadKind::Compression, sched, pre_a.final_q, ea,
                                    eb, policy, mech);
    if (!pre_b.path.completed()) {
        throw EigenFailure("second preload state for the mode extraction did not converge");
    }

    const MatX Ka = evaluate(model, dofs, pre_a.final_q, sched.driven(ea), EvalOrder::Hessian,
                             mech)
                        .tangent;
    const MatX Kb = evaluate(model, dofs, pre_b.final_q, sched.driven(eb), EvalOrder::Hessian,
                             mech)
                        .tangent;
    const MatX dK = (Kb - Ka) / (eb - ea);

    Eigen::LLT<MatX> llt(Ka);
    if (llt.info() != Eigen::Success) {
        // Already past a critical point at the preload; fall back to the
        // tangent spectrum there.
        std::vector<Mode> modes =
            lowest_modes(model, dofs, pre_a.final_q, sched.driven(ea), k, mech);
        for (Mode& m : modes) orient_fold_mode(model, m.nodal);
        return modes;
    }

    // B = -L^-1 dK L^-T, symmetric; its largest eigenvalues mu are the
    // most destabilized directions.
    const MatX Linv_dK = llt.matrixL().solve(dK);
    MatX B = -llt.matrixL().solve(Linv_dK.transpose()).transpose();
    B = 0.5 * (B + B.transpose()).eval();

    const EigenPairs pairs = smallest_eigenpairs(-B, k);
    std::vector<Mode> modes(k);
    for (int i = 0; i < k; ++i) {
        const double mu = -pairs.values[i];
        VecX v = llt.matrixU().solve(pairs.vectors.col(i));
        const double nv = v.norm();
        if (nv > 0.0) v /= nv;
        modes[i].eigenvalue = (mu > 1e-12) ? ea + 1.0 / mu
                                           : std::numeric_limits<double>::infinity();
        modes[i].free_vector = v;
        modes[i].nodal = expand_mode(dofs, pre_a.final_q, sched.driven(ea), v);
        orient_fold_mode(model, modes[i].nodal);
    }
    return modes;
}

BarHingeModel seed_imperfection(const BarHingeModel& model, const std::vector<Vec3>& mode_nodal,
                                double xi) {
    if (xi < 0.0) throw ValidationError("xi", "must be non-negative");
    if (mode_nodal.size() != model.nodes.size()) {
        throw Error("imperfection field size does not match the model");
    }
    BarHingeModel out = model;
    const double t_f = apply_scaling(model.provenance).t_f;
    for (size_t i = 0; i < out.nodes.size(); ++i) {
        out.nodes[i] += xi * t_f * mode_nodal[i];
    }
    for (Bar& b : out.bars) {
        b.rest_length = (out.nodes[b.j] - out.nodes[b.i]).norm();
    }
    for (Hinge& h : out.hinges) {
        h.rest_angle = dihedral_angle(out.nodes[h.a], out.nodes[h.j], out.nodes[h.k], out.nodes[h.b]);
    }
    return out;
}

RunResult run_compression(const BarHingeModel& model, const LoadCase& lc,
                          const MechanicsOptions& mech) {
    lc.validate();
    const ConstraintSet cs = compression_constraints(model);
    ControlSchedule sched;
    const double H0 = effective_height(model);
    sched.driven = [H0](double c) { return -c * H0; };
    sched.ddriven_dcontrol = -H0;
    sched.metric_weight = H0;
    RunResult r = continue_path(model, cs, LoadKind::Compression, sched, VecX(), 0.0,
                                lc.target_strain, lc.step, mech);
    return r;
}

RunResult run_torsion(const ModuleModel& module, const LoadCase& lc,
                      const MechanicsOptions& mech) {
    lc.validate();
    const BarHingeModel& model = module.model;

    LoadCase pre = lc;
    pre.kind = LoadKind::Compression;
    pre.target_strain = std::max(lc.pre_strain, 1e-6);
    RunResult comp = run_compression(model, pre, mech);
    if (!comp.path.completed()) {
        RunResult out;
        out.path.kind = LoadKind::Torsion;
        out.path.status = comp.path.status;
        out.path.message = "pre-compression failed: " + comp.path.message;
        out.constraints = comp.constraints;
        return out;
    }

    // Freeze the top frame at its pre-compressed pose and drive its
    // rotation about the module axis.
    const ConstraintSet comp_cs = compression_constraints(model);
    DofMap comp_dofs(model, comp_cs);
    const double H0 = effective_height(model);
    const double driven_final = -comp.final_control * H0;
    const DofMap::FrameState top = comp_dofs.frame_state(comp.final_q, driven_final, "top");

    ConstraintSet cs;
    cs.frames["bottom"] = FrameConstraint::fixed();
    FrameConstraint topc;
    topc.dof = {top.t.x(), top.t.y(), driven_final, top.w.x(), top.w.y(), std::nullopt};
    cs.frames["top"] = topc;
    cs.driven = DrivenDof{"top", 5};

    DofMap dofs(model, cs);
    VecX q0 = VecX::Zero(dofs.size());
    for (size_t nidx = 0; nidx < model.nodes.size(); ++nidx) {
        const int dst = dofs.node_dof(static_cast<int>(nidx));
        const int src = comp_dofs.node_dof(static_cast<int>(nidx));
        if (dst >= 0 && src >= 0) q0.segment<3>(dst) = comp.final_q.segment<3>(src);
    }

    const double w0 = top.w.z();
    ControlSchedule sched;
    sched.driven = [w0](double deg) { return w0 + deg_to_rad(deg); };
    sched.ddriven_dcontrol = kPi / 180.0;
    sched.metric_weight = H0 * kPi / 180.0;

    RunResult r = continue_path(model, cs, LoadKind::Torsion, sched, q0, 0.0, lc.twist_deg,
                                lc.step, mech);
    return r;
}

namespace {

// Imperfection shape from the ranked buckling modes. With the fold filter,
// mode_index counts only modes that move the apexes; parasitic edge modes
// of the coarse fan are skipped.
const Mode& select_mode(const BarHingeModel& model, const std::vector<Mode>& modes,
                        const Imperfection& imp) {
    if (modes.empty()) throw EigenFailure("no buckling modes available");
    if (imp.filter == ModeFilter::Fold) {
        int count = 0;
        for (const Mode& m : modes) {
            if (fold_participation(model, m.nodal) >= 0.05) {
                if (++count == imp.mode_index) return m;
            }
        }
    }
    if (imp.mode_index <= static_cast<int>(modes.size())) {
        return modes[imp.mode_index - 1];
    }
    throw EigenFailure("requested imperfection mode beyond the extracted set");
}

}  // namespace

Pipeline simulate_compression(const BarHingeModel& model, const LoadCase& lc,
                              const MechanicsOptions& mech) {
    lc.validate();
    Pipeline p;
    if (lc.imperfection.xi > 0.0) {
        const int k = std::min(std::max(6, lc.imperfection.mode_index + 4),
                               static_cast<int>(3 * model.nodes.size()));
        p.modes = buckling_modes(model, lc, k, mech);
        p.seeded = seed_imperfection(model, select_mode(model, p.modes, lc.imperfection).nodal,
                                     lc.imperfection.xi);
    } else {
        p.seeded = model;
    }
    p.run = run_compression(p.seeded, lc, mech);
    return p;
}

Pipeline simulate_torsion(const ModuleModel& module, const LoadCase& lc,
                          const MechanicsOptions& mech) {
    lc.validate();
    Pipeline p;
    if (lc.imperfection.xi > 0.0) {
        const int k = std::max(6, lc.imperfection.mode_index + 4);
        p.modes = buckling_modes(module.model, lc, k, mech);
        p.seeded = seed_imperfection(module.model,
                                     select_mode(module.model, p.modes, lc.imperfection).nodal,
                                     lc.imperfection.xi);
    } else {
        p.seeded = module.model;
    }
    ModuleModel seeded_module{p.seeded, module.radius};
    p.run = run_torsion(seeded_module, lc, mech);
    return p;
}

}  // namespace taperfold
